"""Pipeline configuration and its YAML file form.

Example::

    filter:
      l_max: 4.0
      dot_min: 0.96
      z_min: 0.10
      allowed_classes: [rooftop]
    precision: 0.5
    camera:
      intrinsics: {fx: 320.0, fy: 320.0, cx: 96.0, cy: 96.0, width: 192, height: 192}
      extrinsics:
        rotation: [[1, 0, 0], [0, -1, 0], [0, 0, -1]]
        translation: [-10.0, 10.0, 50.0]
      label_image: labels.pgm

Every key is optional. A relative ``label_image`` path is resolved against the
directory holding the config file.
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import yaml

from .pointclass import CameraExtrinsics, CameraIntrinsics
from .polylabel import DEFAULT_PRECISION
from .polylidar import FilterParams
from .types import CLASS_IDS, CLASS_NAMES, ROOFTOP, ParseError


@dataclass(frozen=True)
class CameraConfig:
    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics
    label_image: Optional[Path] = None


@dataclass(frozen=True)
class PipelineConfig:
    filter: FilterParams = field(default_factory=FilterParams)
    precision: float = DEFAULT_PRECISION
    camera: Optional[CameraConfig] = None
    class_names: dict = field(default_factory=lambda: dict(CLASS_NAMES))
    default_class: int = ROOFTOP

    def __post_init__(self):
        if not self.precision > 0:
            raise ValueError("precision must be positive")

    def with_precision(self, precision: float) -> "PipelineConfig":
        return replace(self, precision=precision)


def _class_id(value, names_to_ids) -> int:
    if isinstance(value, bool):
        raise ParseError(f"invalid class {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        if value.strip().isdigit():
            return int(value)
        if value in names_to_ids:
            return names_to_ids[value]
    raise ParseError(f"unknown class {value!r}")


def config_from_dict(data: dict, base_dir=None) -> PipelineConfig:
    data = data or {}
    if not isinstance(data, dict):
        raise ParseError("config must be a mapping")
    unknown = set(data) - {"filter", "precision", "camera", "classes", "default_class"}
    if unknown:
        raise ParseError(f"unknown config keys: {sorted(unknown)}")

    class_names = dict(CLASS_NAMES)
    for k, v in (data.get("classes") or {}).items():
        class_names[int(k)] = str(v)
    names_to_ids = {**CLASS_IDS, **{v: k for k, v in class_names.items()}}

    f = data.get("filter") or {}
    defaults = FilterParams()
    try:
        allowed = f.get("allowed_classes")
        params = FilterParams(
            l_max=float(f.get("l_max", defaults.l_max)),
            dot_min=float(f.get("dot_min", defaults.dot_min)),
            z_min=float(f.get("z_min", defaults.z_min)),
            allowed_classes=defaults.allowed_classes
            if allowed is None
            else frozenset(_class_id(c, names_to_ids) for c in allowed),
        )
        camera = None
        if data.get("camera"):
            cam = data["camera"]
            intr = CameraIntrinsics(**{k: cam["intrinsics"][k] for k in ("fx", "fy", "cx", "cy", "width", "height")})
            ext = CameraExtrinsics(cam["extrinsics"]["rotation"], cam["extrinsics"]["translation"])
            label = cam.get("label_image")
            if label is not None:
                label = Path(label)
                if base_dir is not None and not label.is_absolute():
                    label = Path(base_dir) / label
            camera = CameraConfig(intr, ext, label)
        return PipelineConfig(
            filter=params,
            precision=float(data.get("precision", DEFAULT_PRECISION)),
            camera=camera,
            class_names=class_names,
            default_class=_class_id(data.get("default_class", ROOFTOP), names_to_ids),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"invalid config: {exc}") from None


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ParseError(f"invalid YAML: {exc}", path=path) from None
    try:
        return config_from_dict(data, base_dir=path.parent)
    except ParseError as exc:
        raise ParseError(str(exc), path=path) from None


def camera_to_config(intr: CameraIntrinsics, ext: CameraExtrinsics, label_image=None) -> dict:
    out = {
        "intrinsics": {
            "fx": float(intr.fx),
            "fy": float(intr.fy),
            "cx": float(intr.cx),
            "cy": float(intr.cy),
            "width": int(intr.width),
            "height": int(intr.height),
        },
        "extrinsics": {
            "rotation": ext.rotation.tolist(),
            "translation": ext.translation.tolist(),
        },
    }
    if label_image is not None:
        out["label_image"] = str(label_image)
    return out
