"""Timing harness: per-stage wall-clock mean and 95% confidence interval.

Each size gets its own generated scene. After ``warmup`` untimed runs (which
also trigger JIT compilation), the pipeline runs ``repeat`` times and every
stage's timings are summarised with a Student-t interval.
"""

import csv
from dataclasses import dataclass
import math
import re

import numpy as np
from scipy import stats

from .pipeline import STAGES, run
from .scenegen import scene_for_size
from .types import ClassifiedPointCloud

CORE_STAGES = ("triangulation", "filtering", "extraction", "polygonization", "polylabel")


@dataclass(frozen=True)
class StageStats:
    mean: float
    ci95: float
    n: int

    @classmethod
    def of(cls, samples) -> "StageStats":
        x = np.asarray(samples, dtype=np.float64)
        if x.size < 2:
            return cls(float(x.mean()) if x.size else math.nan, math.nan, int(x.size))
        half = stats.t.ppf(0.975, x.size - 1) * x.std(ddof=1) / math.sqrt(x.size)
        return cls(float(x.mean()), float(half), int(x.size))


@dataclass(frozen=True)
class BenchResult:
    size: int
    points: int
    stages: dict  # stage name -> StageStats, plus "core" and "total"


def parse_sizes(text: str) -> list[int]:
    """``"1k,10k,1500"`` -> ``[1000, 10000, 1500]``."""
    sizes = []
    for tok in text.split(","):
        m = re.fullmatch(r"\s*(\d+(?:\.\d+)?)\s*([kKmM]?)\s*", tok)
        if not m:
            raise ValueError(f"bad size {tok!r}")
        mult = {"": 1, "k": 1000, "m": 1000000}[m.group(2).lower()]
        n = int(round(float(m.group(1)) * mult))
        if n < 3:
            raise ValueError(f"size {n} too small for a triangulation")
        sizes.append(n)
    return sizes


def bench_cloud(cloud: ClassifiedPointCloud, config=None, repeat: int = 30, warmup: int = 2) -> dict:
    if repeat < 1:
        raise ValueError("repeat must be at least 1")
    for _ in range(warmup):
        run(cloud, config)
    samples = {s: [] for s in (*STAGES, "core", "total")}
    for _ in range(repeat):
        t = run(cloud, config).timings_ms
        for s in STAGES:
            samples[s].append(t[s])
        samples["core"].append(sum(t[s] for s in CORE_STAGES))
        samples["total"].append(t["total"])
    return {s: StageStats.of(v) for s, v in samples.items()}


def bench_sizes(sizes, repeat: int = 30, warmup: int = 2, seed: int = 0, config=None) -> list[BenchResult]:
    """Benchmark the geometry-only path (no class column, no camera) at each size."""
    results = []
    for n in sizes:
        scene = scene_for_size(n, seed=seed)
        cloud = ClassifiedPointCloud(scene.cloud.points, scene.cloud.classes, labeled=False)
        results.append(BenchResult(n, len(cloud), bench_cloud(cloud, config, repeat, warmup)))
    return results


def scaling_ratio(results, small: int, large: int) -> float:
    by_size = {r.size: r for r in results}
    return by_size[large].stages["core"].mean / by_size[small].stages["core"].mean


def format_table(results) -> str:
    cols = (*STAGES, "core", "total")
    lines = ["size   points  " + "  ".join(f"{c:>22}" for c in cols)]
    for r in results:
        cells = [f"{r.stages[c].mean:9.3f} +/- {r.stages[c].ci95:8.3f}" for c in cols]
        lines.append(f"{r.size:<6} {r.points:>6}  " + "  ".join(f"{c:>22}" for c in cells))
    return "\n".join(lines)


def write_csv(results, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["size", "points", "stage", "mean_ms", "ci95_ms", "repeats"])
        for r in results:
            for name, st in r.stages.items():
                w.writerow([r.size, r.points, name, f"{st.mean:.6f}", f"{st.ci95:.6f}", st.n])
