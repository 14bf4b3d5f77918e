"""Geometric and semantic types shared across the package."""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

UNLABELED = 255

# Semantic classes of the rooftop segmentation model, plus two rooftop asset
# types (small-building, enclosed-water-tower) it has no dedicated class for.
CLASS_NAMES = {
    0: "sky",
    1: "ground",
    2: "building-wall",
    3: "rooftop",
    4: "small-rooftop-entrance",
    5: "skylight",
    6: "air-vents",
    7: "ac-unit",
    8: "seating",
    9: "air-ducts",
    10: "water-tower",
    11: "chimney",
    12: "tarp",
    13: "vegetation",
    14: "small-building",
    15: "enclosed-water-tower",
    UNLABELED: "unlabeled",
}
CLASS_IDS = {name: cid for cid, name in CLASS_NAMES.items()}
ROOFTOP = CLASS_IDS["rooftop"]
TARP = CLASS_IDS["tarp"]


class RooflandError(Exception):
    pass


class DegenerateInput(RooflandError):
    pass


class DegenerateTriangle(RooflandError):
    pass


class VerticalPlane(RooflandError):
    pass


class NonManifoldBoundary(RooflandError):
    pass


class EmptyPolygon(RooflandError):
    pass


class PlacementFailure(RooflandError):
    pass


class NoLandingSite(RooflandError):
    pass


class ParseError(RooflandError, ValueError):
    def __init__(self, message: str, line: Optional[int] = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip() if where else message)


class Point3(NamedTuple):
    x: float
    y: float
    z: float


class Triangle(NamedTuple):
    v0: int
    v1: int
    v2: int


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ClassifiedPointCloud:
    """Points (n, 3) in meters with one integer class per point.

    ``labeled`` is False for clouds read without a class column; their classes
    are all ``UNLABELED`` until a classifier fills them in.
    """

    points: np.ndarray
    classes: np.ndarray
    class_names: dict = field(default_factory=lambda: dict(CLASS_NAMES))
    labeled: bool = True

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64).reshape(-1, 3)
        cls = np.array(self.classes, dtype=np.int64).reshape(-1)
        if pts.shape[0] != cls.shape[0]:
            raise ValueError(f"{pts.shape[0]} points but {cls.shape[0]} classes")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        if cls.size and cls.min() < 0:
            raise ValueError("class ids must be non-negative")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "classes", _frozen(cls))

    @classmethod
    def unclassified(cls, points, default_class: int = ROOFTOP) -> "ClassifiedPointCloud":
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        return cls(pts, np.full(pts.shape[0], default_class, dtype=np.int64))

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def with_classes(self, classes) -> "ClassifiedPointCloud":
        return ClassifiedPointCloud(self.points, classes, self.class_names, True)


@dataclass(frozen=True)
class Plane:
    """``a*x + b*y + c*z + d = 0`` with unit normal ``(a, b, c)``."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        norm = np.sqrt(self.a**2 + self.b**2 + self.c**2)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"plane normal must be unit length, got |n|={norm}")

    @classmethod
    def from_normal_point(cls, normal, point) -> "Plane":
        n = np.asarray(normal, dtype=np.float64)
        n = n / np.linalg.norm(n)
        d = -float(n @ np.asarray(point, dtype=np.float64))
        return cls(float(n[0]), float(n[1]), float(n[2]), d)

    @property
    def normal(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])

    def residual(self, p) -> float:
        return self.a * p[0] + self.b * p[1] + self.c * p[2] + self.d


def lift_to_plane(p2d, plane: Plane) -> Point3:
    """Point on ``plane`` directly above/below the 2D point."""
    if abs(plane.c) <= 1e-6:
        raise VerticalPlane(f"plane normal z-component {plane.c} too small to lift onto")
    x, y = float(p2d[0]), float(p2d[1])
    z = -(plane.a * x + plane.b * y + plane.d) / plane.c
    return Point3(x, y, z)


def ring_signed_area(ring: np.ndarray) -> float:
    x = ring[:, 0]
    y = ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _as_ring(ring) -> np.ndarray:
    r = np.array(ring, dtype=np.float64).reshape(-1, 2)
    if r.shape[0] > 1 and np.array_equal(r[0], r[-1]):
        r = r[:-1]
    if r.shape[0] < 3:
        raise ValueError("a ring needs at least 3 distinct vertices")
    return r


@dataclass(frozen=True, eq=False)
class PolygonWithHoles:
    """Outer ring plus hole rings, stored open (last vertex != first).

    On construction the outer ring is made counter-clockwise and every hole
    clockwise, whatever orientation the caller supplied.
    """

    outer: np.ndarray
    holes: tuple = ()
    plane: Optional[Plane] = None

    def __post_init__(self):
        outer = _as_ring(self.outer)
        if ring_signed_area(outer) < 0:
            outer = outer[::-1].copy()
        holes = []
        for h in self.holes:
            h = _as_ring(h)
            if ring_signed_area(h) > 0:
                h = h[::-1].copy()
            holes.append(_frozen(h))
        object.__setattr__(self, "outer", _frozen(outer))
        object.__setattr__(self, "holes", tuple(holes))

    @property
    def rings(self) -> list:
        return [self.outer, *self.holes]

    @property
    def area(self) -> float:
        return ring_signed_area(self.outer) + sum(ring_signed_area(h) for h in self.holes)

    @property
    def bounds(self) -> tuple:
        lo = self.outer.min(axis=0)
        hi = self.outer.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def segments(self) -> np.ndarray:
        """All ring edges as an (m, 4) array of ``x0, y0, x1, y1``."""
        segs = [np.hstack([r, np.roll(r, -1, axis=0)]) for r in self.rings]
        return np.vstack(segs)


@dataclass(frozen=True)
class LandingSite:
    center2d: tuple
    center3d: Point3
    radius: float
    precision: float
    mesh_id: int

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be non-negative")
        if self.precision <= 0:
            raise ValueError("precision must be positive")
