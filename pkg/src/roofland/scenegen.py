"""Synthetic rooftop scenes with known optimal landing sites.

A scene is one flat rectangular roof sampled on a regular grid, populated with
box-shaped obstacles whose counts follow the Manhattan rooftop survey means,
plus an optional flat tarp that only a camera can tell apart from the roof.
A nadir camera renders a ground-truth label image by ray casting, and the best
landing circle is found by brute force on a fine grid.
"""

from dataclasses import dataclass, field
import json
import math
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
import yaml
from scipy.stats import poisson

from .config import camera_to_config
from .io import write_point_cloud
from .pointclass import CameraExtrinsics, CameraIntrinsics, LabelImage, write_pgm
from .types import CLASS_IDS, ROOFTOP, TARP, ClassifiedPointCloud, PlacementFailure

# Mean quantity per building, 112 flat roofs in midtown Manhattan.
ASSET_MEANS = {
    "air-vents": 1.12,
    "small-rooftop-entrance": 0.88,
    "skylight": 0.51,
    "small-building": 0.45,
    "ac-unit": 0.28,
    "seating": 0.12,
    "air-ducts": 0.11,
    "water-tower": 0.10,
    "chimney": 0.05,
    "enclosed-water-tower": 0.04,
    "tarp": 0.03,
    "vegetation": 0.02,
}

# (min side, max side, min height, max height) in meters for box footprints.
ASSET_SIZES = {
    "air-vents": (1.0, 1.5, 0.4, 1.0),
    "small-rooftop-entrance": (2.0, 3.0, 2.2, 2.8),
    "skylight": (1.0, 2.5, 0.3, 0.8),
    "small-building": (3.0, 6.0, 2.5, 4.0),
    "ac-unit": (1.0, 3.0, 1.0, 2.0),
    "seating": (1.0, 2.0, 0.5, 1.0),
    "air-ducts": (1.0, 2.0, 0.5, 1.0),
    "water-tower": (3.0, 5.0, 4.0, 8.0),
    "chimney": (1.0, 1.5, 1.5, 3.0),
    "enclosed-water-tower": (3.0, 5.0, 4.0, 8.0),
    "vegetation": (1.0, 2.0, 0.4, 1.5),
}
TARP_SIZE = (3.0, 6.0)
GROUND = CLASS_IDS["ground"]
ORACLE_STEP = 0.05


class AssetStats(dict):
    """Mean quantity per building for each asset name."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        for name, mean in self.items():
            if mean < 0:
                raise ValueError(f"negative mean for {name!r}")


def sample_asset_counts(stats, rng, size=None) -> dict:
    """Poisson draw per asset with the given mean.

    With ``size=None`` each asset gets one independent draw. With an integer
    ``size`` each asset gets an array of ``size`` draws, produced by
    stratified inverse-CDF sampling: every draw is still exactly Poisson, but
    the uniforms are spread one per stratum of width ``1/size``, so the batch
    mean tracks the true mean far more closely than independent draws would.
    Rare assets (mean 0.02) need this to have a stable empirical mean.
    """
    if size is None:
        return {name: int(rng.poisson(mean)) for name, mean in stats.items()}
    if size < 1:
        raise ValueError("size must be positive")
    out = {}
    for name, mean in stats.items():
        u = (rng.permutation(size) + rng.random(size)) / size
        out[name] = poisson.ppf(u, mean).astype(np.int64) if mean > 0 else np.zeros(size, dtype=np.int64)
    return out


@dataclass(frozen=True)
class SceneSpec:
    width: float = 20.0
    length: float = 20.0
    roof_height: float = 10.0
    spacing: float = 0.5
    noise_sigma: float = 0.02
    seed: int = 0
    asset_stats: dict = field(default_factory=lambda: dict(ASSET_MEANS))
    tarp_probability: float = ASSET_MEANS["tarp"]
    max_attempts: int = 200
    counts: Optional[dict] = None  # fixed asset counts instead of Poisson draws

    def __post_init__(self):
        if self.width <= 0 or self.length <= 0 or self.roof_height <= 0:
            raise ValueError("roof dimensions must be positive")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise sigma must be non-negative")
        if not 0.0 <= self.tarp_probability <= 1.0:
            raise ValueError("tarp probability must lie in [0, 1]")
        if self.counts is not None:
            unknown = set(self.counts) - set(ASSET_SIZES) - {"tarp"}
            if unknown:
                raise ValueError(f"unknown assets: {sorted(unknown)}")


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned footprint ``[x0, x1] x [y0, y1]`` rising ``height`` above the roof."""

    name: str
    class_id: int
    x0: float
    y0: float
    x1: float
    y1: float
    height: float

    def contains(self, x, y):
        return (x >= self.x0) & (x <= self.x1) & (y >= self.y0) & (y <= self.y1)

    def distance(self, x, y):
        dx = np.maximum(np.maximum(self.x0 - x, x - self.x1), 0.0)
        dy = np.maximum(np.maximum(self.y0 - y, y - self.y1), 0.0)
        return np.hypot(dx, dy)


@dataclass
class GroundTruth:
    roof: tuple
    obstacles: list
    oracle_center: tuple
    oracle_radius: float
    geometric_center: tuple
    geometric_radius: float
    oracle_step: float = ORACLE_STEP

    def to_dict(self) -> dict:
        return {
            "roof": list(self.roof),
            "obstacles": [vars(o) for o in self.obstacles],
            "oracle_center": list(self.oracle_center),
            "oracle_radius": self.oracle_radius,
            "geometric_center": list(self.geometric_center),
            "geometric_radius": self.geometric_radius,
            "oracle_step": self.oracle_step,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        return cls(
            roof=tuple(d["roof"]),
            obstacles=[Obstacle(**o) for o in d["obstacles"]],
            oracle_center=tuple(d["oracle_center"]),
            oracle_radius=d["oracle_radius"],
            geometric_center=tuple(d["geometric_center"]),
            geometric_radius=d["geometric_radius"],
            oracle_step=d.get("oracle_step", ORACLE_STEP),
        )


class Scene(NamedTuple):
    cloud: ClassifiedPointCloud
    label_image: LabelImage
    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics
    ground_truth: GroundTruth


def _place(rng, roof, w, l, placed, margin, attempts):
    x_lo, y_lo, x_hi, y_hi = roof
    if w > x_hi - x_lo or l > y_hi - y_lo:
        return None
    for _ in range(attempts):
        x0 = rng.uniform(x_lo, x_hi - w)
        y0 = rng.uniform(y_lo, y_hi - l)
        clear = all(
            x0 + w + margin <= o.x0 or o.x1 + margin <= x0 or y0 + l + margin <= o.y0 or o.y1 + margin <= y0
            for o in placed
        )
        if clear:
            return x0, y0
    return None


def oracle_landing(roof, obstacles, step: float = ORACLE_STEP):
    """Brute-force best circle centre over a grid covering the roof rectangle."""
    x_lo, y_lo, x_hi, y_hi = roof
    xs = np.arange(x_lo, x_hi + step / 2, step)
    ys = np.arange(y_lo, y_hi + step / 2, step)
    gx, gy = np.meshgrid(xs, ys)
    d = np.minimum.reduce([gx - x_lo, x_hi - gx, gy - y_lo, y_hi - gy])
    for o in obstacles:
        d = np.minimum(d, np.where(o.contains(gx, gy), 0.0, o.distance(gx, gy)))
    k = int(np.argmax(d))
    return (float(gx.flat[k]), float(gy.flat[k])), float(max(d.flat[k], 0.0))


def _scene_camera(spec: SceneSpec, roof):
    x_lo, y_lo, x_hi, y_hi = roof
    extent = max(x_hi - x_lo, y_hi - y_lo)
    # High altitude keeps parallax small: an 8 m tower at the roof edge then
    # hides at most ~0.4 m of roof behind it.
    altitude = 10.0 * extent
    cam = ((x_lo + x_hi) / 2.0, (y_lo + y_hi) / 2.0, spec.roof_height + altitude)
    pixel_ground = spec.spacing / 4.0
    size = int(math.ceil(1.2 * extent / pixel_ground))
    f = altitude / pixel_ground
    intr = CameraIntrinsics(f, f, size / 2.0, size / 2.0, size, size)
    return intr, CameraExtrinsics.looking_down(cam), np.asarray(cam)


def render_labels(intr: CameraIntrinsics, ext: CameraExtrinsics, cam_pos, roof, roof_height, obstacles, tarps):
    """Ray-cast the class seen through every pixel centre."""
    v, u = np.mgrid[0 : intr.height, 0 : intr.width].astype(np.float64)
    d_cam = np.stack([(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, np.ones_like(u)], axis=-1)
    d = d_cam @ ext.rotation  # rotate back to the local frame (R^T d)
    ox, oy, oz = cam_pos
    dx, dy, dz = d[..., 0], d[..., 1], d[..., 2]

    labels = np.full(u.shape, GROUND, dtype=np.int64)
    t_roof = (roof_height - oz) / dz
    hx = ox + t_roof * dx
    hy = oy + t_roof * dy
    x_lo, y_lo, x_hi, y_hi = roof
    on_roof = (hx >= x_lo) & (hx <= x_hi) & (hy >= y_lo) & (hy <= y_hi)
    labels[on_roof] = ROOFTOP
    for t in tarps:
        labels[on_roof & t.contains(hx, hy)] = t.class_id

    nearest = np.full(u.shape, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        for o in obstacles:
            t_near = np.full(u.shape, -np.inf)
            t_far = np.full(u.shape, np.inf)
            for origin, direction, lo, hi in (
                (ox, dx, o.x0, o.x1),
                (oy, dy, o.y0, o.y1),
                (oz, dz, roof_height, roof_height + o.height),
            ):
                t1 = (lo - origin) / direction
                t2 = (hi - origin) / direction
                t_near = np.maximum(t_near, np.minimum(t1, t2))
                t_far = np.minimum(t_far, np.maximum(t1, t2))
            hit = (t_near <= t_far) & (t_far > 0) & (t_near < nearest)
            nearest[hit] = t_near[hit]
            labels[hit] = o.class_id
    return LabelImage(labels)


def generate_scene(spec: SceneSpec) -> Scene:
    rng = np.random.default_rng(spec.seed)
    nx = int(math.floor(spec.width / spec.spacing + 1e-9)) + 1
    ny = int(math.floor(spec.length / spec.spacing + 1e-9)) + 1
    roof = (0.0, 0.0, (nx - 1) * spec.spacing, (ny - 1) * spec.spacing)

    if spec.counts is None:
        counts = sample_asset_counts(spec.asset_stats, rng)
        n_tarps = int(rng.random() < spec.tarp_probability)
    else:
        counts = dict(spec.counts)
        n_tarps = min(int(counts.get("tarp", 0)), 1)
    counts.pop("tarp", None)
    margin = spec.spacing
    placed: list[Obstacle] = []
    for name in sorted(counts, key=lambda n: -ASSET_SIZES[n][1]):
        lo_side, hi_side, lo_h, hi_h = ASSET_SIZES[name]
        for _ in range(counts[name]):
            w = max(rng.uniform(lo_side, hi_side), 2 * spec.spacing)
            l = max(rng.uniform(lo_side, hi_side), 2 * spec.spacing)
            h = rng.uniform(lo_h, hi_h)
            pos = _place(rng, roof, w, l, placed, margin, spec.max_attempts)
            if pos is None:
                raise PlacementFailure(f"could not place {name} ({w:.1f} x {l:.1f} m) without overlap")
            placed.append(Obstacle(name, CLASS_IDS[name], pos[0], pos[1], pos[0] + w, pos[1] + l, h))

    tarps: list[Obstacle] = []
    if n_tarps:
        w = rng.uniform(*TARP_SIZE)
        l = rng.uniform(*TARP_SIZE)
        pos = _place(rng, roof, w, l, placed, margin, spec.max_attempts)
        if pos is None:
            raise PlacementFailure("could not place tarp without overlap")
        tarps.append(Obstacle("tarp", TARP, pos[0], pos[1], pos[0] + w, pos[1] + l, 0.0))

    gx, gy = np.meshgrid(np.arange(nx) * spec.spacing, np.arange(ny) * spec.spacing)
    x = gx.ravel()
    y = gy.ravel()
    z = np.full(x.shape, spec.roof_height)
    classes = np.full(x.shape, ROOFTOP, dtype=np.int64)
    for o in placed:
        inside = o.contains(x, y)
        z[inside] += o.height
        classes[inside] = o.class_id
    for t in tarps:
        classes[t.contains(x, y)] = t.class_id
    if spec.noise_sigma > 0:
        z = z + rng.normal(0.0, spec.noise_sigma, z.shape)
    cloud = ClassifiedPointCloud(np.column_stack([x, y, z]), classes)

    intr, ext, cam_pos = _scene_camera(spec, roof)
    labels = render_labels(intr, ext, cam_pos, roof, spec.roof_height, placed, tarps)

    center, radius = oracle_landing(roof, placed + tarps)
    g_center, g_radius = oracle_landing(roof, placed)
    truth = GroundTruth(roof, placed + tarps, center, radius, g_center, g_radius)
    return Scene(cloud, labels, intr, ext, truth)


def scene_for_size(n_points: int, seed: int = 0, spacing: float = 0.5, **kwargs) -> Scene:
    """Square-roof scene whose grid holds roughly ``n_points`` points.

    Small roofs cannot always fit the sampled obstacles; the seeds after
    ``seed`` are tried in turn until one places cleanly.
    """
    side = (max(round(math.sqrt(n_points)), 2) - 1) * spacing
    for s in range(seed, seed + 1000):
        try:
            return generate_scene(SceneSpec(width=side, length=side, spacing=spacing, seed=s, **kwargs))
        except PlacementFailure:
            continue
    raise PlacementFailure(f"no seed in [{seed}, {seed + 1000}) gives a placeable {n_points}-point scene")


def write_scene(scene: Scene, out_dir, with_classes: bool = False) -> dict:
    """Write cloud, label image, config and ground-truth sidecar into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "cloud": out / "cloud.xyz",
        "labels": out / "labels.pgm",
        "config": out / "config.yaml",
        "truth": out / "ground_truth.json",
    }
    write_point_cloud(paths["cloud"], scene.cloud, with_classes=with_classes)
    write_pgm(paths["labels"], scene.label_image)
    cfg = {"camera": camera_to_config(scene.intrinsics, scene.extrinsics, paths["labels"].name)}
    paths["config"].write_text(yaml.safe_dump(cfg, sort_keys=False))
    paths["truth"].write_text(json.dumps(scene.ground_truth.to_dict(), indent=2) + "\n")
    return paths
