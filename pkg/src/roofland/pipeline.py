"""End-to-end landing site selection.

``run`` takes a point cloud (or a path to one) and a :class:`PipelineConfig`,
and returns a :class:`LandingReport`. The stages are:

classification -> triangulation -> filtering -> extraction -> polygonization -> polylabel

Each stage consumes the previous stage's immutable output. Classification
only happens when the config has a camera block. Without one, a cloud read
with a class column keeps its classes. Otherwise every point gets the
config's default class, which is then added to the allowed set.
"""

from dataclasses import dataclass, field, replace
import json
from pathlib import Path
import time
from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

from .config import PipelineConfig
from .io import load_point_cloud
from .pointclass import classify_cloud, read_pgm
from .polylabel import find_pole
from .polylidar import extract_planar_meshes, filter_triangles, mesh_to_polygon
from .triangulation import triangulate_cloud
from .types import (
    ClassifiedPointCloud,
    DegenerateInput,
    LandingSite,
    NoLandingSite,
    PolygonWithHoles,
    lift_to_plane,
)

STAGES = ("classification", "triangulation", "filtering", "extraction", "polygonization", "polylabel")


@dataclass(frozen=True, eq=False)
class MeshPolygon:
    mesh_id: int
    num_triangles: int
    polygon: PolygonWithHoles

    @property
    def area(self) -> float:
        return self.polygon.area


@dataclass(frozen=True, eq=False)
class LandingReport:
    """Outcome of one pipeline run.

    ``site`` is None when no flat region was found; ``message`` then says why.
    Timings are wall-clock milliseconds per stage, plus ``total``.
    """

    site: Optional[LandingSite]
    polygons: tuple = ()
    timings_ms: dict = field(default_factory=dict)
    sizes: dict = field(default_factory=dict)
    message: str = ""

    @property
    def found(self) -> bool:
        return self.site is not None

    def to_dict(self, include_timings: bool = True) -> dict:
        site = None
        if self.site is not None:
            s = self.site
            site = {
                "center2d": [float(s.center2d[0]), float(s.center2d[1])],
                "center3d": [float(c) for c in s.center3d],
                "radius": float(s.radius),
                "precision": float(s.precision),
                "mesh_id": int(s.mesh_id),
            }
        polys = []
        for mp in self.polygons:
            plane = mp.polygon.plane
            polys.append(
                {
                    "mesh_id": mp.mesh_id,
                    "num_triangles": mp.num_triangles,
                    "area": mp.area,
                    "plane": None if plane is None else [plane.a, plane.b, plane.c, plane.d],
                    "outer": mp.polygon.outer.tolist(),
                    "holes": [h.tolist() for h in mp.polygon.holes],
                }
            )
        out = {
            "status": "ok" if self.found else "no_landing_site",
            "message": self.message,
            "site": site,
            "sizes": dict(self.sizes),
            "polygons": polys,
        }
        if include_timings:
            out["timings_ms"] = dict(self.timings_ms)
        return out

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2, sort_keys=True) + "\n"


class _Clock:
    def __init__(self):
        self.timings = {s: 0.0 for s in STAGES}
        self._start = time.perf_counter()

    def stage(self, name):
        clock = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                clock.timings[name] += (time.perf_counter() - self.t0) * 1e3
                return False

        return _Ctx()

    def finish(self) -> dict:
        self.timings["total"] = (time.perf_counter() - self._start) * 1e3
        return self.timings


def _prepare_cloud(cloud: ClassifiedPointCloud, config: PipelineConfig, label_image):
    """Classified cloud and the filter parameters to use on it."""
    params = config.filter
    if config.camera is not None or label_image is not None:
        if config.camera is None:
            raise ValueError("a label image needs camera intrinsics and extrinsics in the config")
        img = label_image if label_image is not None else config.camera.label_image
        if img is None:
            raise ValueError("config has a camera block but no label image was given")
        if isinstance(img, (str, Path)):
            img = read_pgm(img)
        return classify_cloud(cloud, img, config.camera.intrinsics, config.camera.extrinsics), params
    if cloud.labeled:
        return cloud, params
    cloud = cloud.with_classes(np.full(len(cloud), config.default_class, dtype=np.int64))
    return cloud, replace(params, allowed_classes=params.allowed_classes | {config.default_class})


def run(cloud_or_path, config: Optional[PipelineConfig] = None, label_image=None) -> LandingReport:
    """Find the largest obstacle-free circle on the biggest flat surface.

    ``label_image`` (a path or :class:`LabelImage`) overrides the config's
    label image path. A missing landing site is reported through
    ``report.site is None``, never raised.
    """
    config = config or PipelineConfig()
    cloud = load_point_cloud(cloud_or_path) if isinstance(cloud_or_path, (str, Path)) else cloud_or_path
    if not isinstance(cloud, ClassifiedPointCloud):
        cloud = ClassifiedPointCloud.unclassified(cloud, config.default_class)
        cloud = replace(cloud, labeled=False)

    clock = _Clock()
    sizes = {"points": len(cloud), "triangles": 0, "filtered_triangles": 0, "meshes": 0}

    def report(site=None, polygons=(), message=""):
        return LandingReport(site, tuple(polygons), clock.finish(), sizes, message)

    with clock.stage("classification"):
        cloud, params = _prepare_cloud(cloud, config, label_image)

    with clock.stage("triangulation"):
        try:
            tri = triangulate_cloud(cloud)
        except DegenerateInput as exc:
            return report(message=f"no triangulation: {exc}")
    sizes["triangles"] = tri.num_triangles

    with clock.stage("filtering"):
        kept = filter_triangles(tri, cloud, params)
    sizes["filtered_triangles"] = int(kept.size)

    with clock.stage("extraction"):
        meshes = extract_planar_meshes(kept, tri, cloud)
    sizes["meshes"] = len(meshes)
    if not meshes:
        return report(message="no triangle passed the flatness filter")

    with clock.stage("polygonization"):
        polygons = [MeshPolygon(m.mesh_id, len(m), mesh_to_polygon(m, tri)) for m in meshes]

    with clock.stage("polylabel"):
        best = max(polygons, key=lambda mp: (mp.area, -mp.mesh_id))
        center, radius = find_pole(best.polygon, config.precision)
    if not radius > 0:
        return report(polygons=polygons, message="largest flat region has no interior clear of obstacles")

    site = LandingSite(
        center2d=(float(center[0]), float(center[1])),
        center3d=lift_to_plane(center, best.polygon.plane),
        radius=float(radius),
        precision=config.precision,
        mesh_id=best.mesh_id,
    )
    return report(site, polygons)


def require_site(report: LandingReport) -> LandingSite:
    """The report's site, or NoLandingSite carrying the report's message."""
    if report.site is None:
        raise NoLandingSite(report.message or "no landing site found")
    return report.site


def _svg_path(ring: np.ndarray, fy) -> str:
    pts = " L ".join(f"{x:.4f} {fy(y):.4f}" for x, y in ring.tolist())
    return f"M {pts} Z"


def _star(cx, cy, r) -> str:
    pts = []
    for k in range(10):
        ang = np.pi / 2 + k * np.pi / 5
        rad = r if k % 2 == 0 else 0.4 * r
        pts.append(f"{cx + rad * np.cos(ang):.4f},{cy - rad * np.sin(ang):.4f}")
    return " ".join(pts)


def emit_svg(report: LandingReport, path, scale: float = 20.0) -> None:
    """Draw polygons (green outlines, orange holes), the landing circle (blue) and its centre."""
    rings = [r for mp in report.polygons for r in mp.polygon.rings]
    if rings:
        allp = np.vstack(rings)
        lo = allp.min(axis=0)
        hi = allp.max(axis=0)
    else:
        lo = np.zeros(2)
        hi = np.ones(2)
    pad = 1.0
    lo = lo - pad
    hi = hi + pad
    width = (hi[0] - lo[0]) * scale
    height = (hi[1] - lo[1]) * scale
    stroke = 2.0 / scale

    def fy(y):
        return hi[1] + lo[1] - y  # flip so +y points up in the drawing

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1f}" height="{height:.1f}" '
        f'viewBox="{lo[0]:.4f} {lo[1]:.4f} {hi[0] - lo[0]:.4f} {hi[1] - lo[1]:.4f}">',
        f"<title>{escape(report.message or 'landing site')}</title>",
    ]
    for mp in report.polygons:
        lines.append(
            f'<path class="outer" d="{_svg_path(mp.polygon.outer, fy)}" fill="none" stroke="green" stroke-width="{stroke:.4f}"/>'
        )
        for h in mp.polygon.holes:
            lines.append(
                f'<path class="hole" d="{_svg_path(h, fy)}" fill="none" stroke="orange" stroke-width="{stroke:.4f}"/>'
            )
    if report.site is not None:
        cx, cy = report.site.center2d
        lines.append(
            f'<circle cx="{cx:.4f}" cy="{fy(cy):.4f}" r="{report.site.radius:.4f}" fill="none" '
            f'stroke="blue" stroke-width="{stroke:.4f}"/>'
        )
        lines.append(f'<polygon class="center" points="{_star(cx, fy(cy), 0.3)}" fill="blue"/>')
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
