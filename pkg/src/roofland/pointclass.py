"""Point classification by projecting LiDAR points into a segmented camera image.

Camera frame convention: +z forward (optical axis), +x right, +y down, so
``u = fx * x / z + cx`` indexes image columns and ``v = fy * y / z + cy`` rows.
Points behind the camera or outside the image keep the ``UNLABELED`` class.
Occlusion is not modelled: a roof point hidden behind an obstacle takes the
obstacle's label.
"""

from dataclasses import dataclass
from pathlib import Path
import re
from typing import Optional

import numpy as np

from .types import UNLABELED, ClassifiedPointCloud, ParseError


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


@dataclass(frozen=True, eq=False)
class CameraExtrinsics:
    """Rigid transform taking local-frame points into the camera frame."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.array(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.array(self.translation, dtype=np.float64).reshape(3)
        if not np.allclose(r @ r.T, np.eye(3), atol=1e-9, rtol=0.0):
            raise ValueError("rotation must be orthonormal")
        if abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValueError("rotation must have determinant +1")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "CameraExtrinsics":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def looking_down(cls, camera_position) -> "CameraExtrinsics":
        """Nadir camera at ``camera_position``: image right = +x, image down = -y."""
        r = np.diag([1.0, -1.0, -1.0])
        c = np.asarray(camera_position, dtype=np.float64)
        return cls(r, -r @ c)


@dataclass(frozen=True, eq=False)
class LabelImage:
    """Integer class per pixel, stored as a ``(height, width)`` array."""

    labels: np.ndarray

    def __post_init__(self):
        lab = np.array(self.labels, dtype=np.int64)
        if lab.ndim != 2:
            raise ValueError("label image must be 2-D")
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)

    @classmethod
    def from_flat(cls, width: int, height: int, labels) -> "LabelImage":
        flat = np.asarray(labels, dtype=np.int64).reshape(-1)
        if flat.size != width * height:
            raise ValueError(f"expected {width * height} labels, got {flat.size}")
        return cls(flat.reshape(height, width))

    @property
    def width(self) -> int:
        return int(self.labels.shape[1])

    @property
    def height(self) -> int:
        return int(self.labels.shape[0])


def to_camera_frame(p, ext: CameraExtrinsics) -> np.ndarray:
    """``R @ p + t`` for one point (3,) or many (n, 3)."""
    p = np.asarray(p, dtype=np.float64)
    return p @ ext.rotation.T + ext.translation


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def project_many(p_cam: np.ndarray, intr: CameraIntrinsics):
    """Pixel coordinates (n, 2) and a validity mask for camera-frame points."""
    p_cam = np.asarray(p_cam, dtype=np.float64).reshape(-1, 3)
    z = p_cam[:, 2]
    front = z > 0
    safe_z = np.where(front, z, 1.0)
    u = _round_half_away(intr.fx * p_cam[:, 0] / safe_z + intr.cx)
    v = _round_half_away(intr.fy * p_cam[:, 1] / safe_z + intr.cy)
    valid = front & (u >= 0) & (u < intr.width) & (v >= 0) & (v < intr.height)
    uv = np.zeros((p_cam.shape[0], 2), dtype=np.int64)
    uv[valid, 0] = u[valid]
    uv[valid, 1] = v[valid]
    return uv, valid


def project(p_cam, intr: CameraIntrinsics) -> Optional[tuple]:
    """Nearest pixel ``(u, v)`` for a camera-frame point, or None if it falls outside."""
    uv, valid = project_many(np.asarray(p_cam, dtype=np.float64).reshape(1, 3), intr)
    if not valid[0]:
        return None
    return int(uv[0, 0]), int(uv[0, 1])


def classify_cloud(cloud, label_img: LabelImage, intr: CameraIntrinsics, ext: CameraExtrinsics) -> ClassifiedPointCloud:
    """Label every point with the class of the pixel it projects to."""
    if isinstance(cloud, ClassifiedPointCloud):
        points = cloud.points
        names = cloud.class_names
    else:
        points = np.asarray(cloud, dtype=np.float64).reshape(-1, 3)
        names = None
    if (label_img.width, label_img.height) != (intr.width, intr.height):
        raise ValueError(
            f"label image is {label_img.width}x{label_img.height} but intrinsics say {intr.width}x{intr.height}"
        )
    uv, valid = project_many(to_camera_frame(points, ext), intr)
    classes = np.full(points.shape[0], UNLABELED, dtype=np.int64)
    classes[valid] = label_img.labels[uv[valid, 1], uv[valid, 0]]
    if names is None:
        return ClassifiedPointCloud(points, classes)
    return ClassifiedPointCloud(points, classes, names)


_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*(\S+)")


def read_pgm(path) -> LabelImage:
    """Read a binary (P5) PGM; 16-bit samples are big-endian."""
    data = Path(path).read_bytes()
    pos = 0
    header = []
    for _ in range(4):
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise ParseError("truncated PGM header", path=path)
        header.append(m.group(1))
        pos = m.end()
    if header[0] != b"P5":
        raise ParseError(f"not a binary PGM (magic {header[0]!r})", path=path)
    try:
        width, height, maxval = (int(t) for t in header[1:])
    except ValueError as exc:
        raise ParseError(f"bad PGM header: {exc}", path=path) from None
    if not 0 < maxval < 65536:
        raise ParseError(f"PGM maxval {maxval} out of range", path=path)
    pos += 1  # single whitespace byte after maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    n = width * height
    raw = data[pos : pos + n * dtype.itemsize]
    if len(raw) != n * dtype.itemsize:
        raise ParseError(f"PGM pixel data truncated: expected {n} samples", path=path)
    return LabelImage(np.frombuffer(raw, dtype=dtype).reshape(height, width))


def write_pgm(path, img: LabelImage, maxval: int = 65535) -> None:
    labels = img.labels
    if labels.size and (labels.min() < 0 or labels.max() > maxval):
        raise ValueError("label values must lie in [0, maxval]")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    header = f"P5\n{img.width} {img.height}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + labels.astype(dtype).tobytes())
