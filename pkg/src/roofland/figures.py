"""Matplotlib figures for bench results and landing reports."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bench import CORE_STAGES  # noqa: E402


def plot_bench(results, path) -> None:
    """Grouped bars of per-stage mean time with 95% CI error bars, one group per size."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    width = 0.8 / max(len(results), 1)
    x = np.arange(len(CORE_STAGES))
    for k, r in enumerate(results):
        means = [r.stages[s].mean for s in CORE_STAGES]
        errs = [np.nan_to_num(r.stages[s].ci95) for s in CORE_STAGES]
        ax.bar(x + k * width, means, width, yerr=errs, capsize=3, label=f"{r.points} points")
    ax.set_xticks(x + width * (len(results) - 1) / 2)
    ax.set_xticklabels(CORE_STAGES, rotation=20)
    ax.set_ylabel("time (ms)")
    ax.set_title("Per-stage execution time, mean with 95% CI")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_report(report, path, cloud=None) -> None:
    """Top-down view: cloud points (optional), polygons, holes and the landing circle."""
    fig, ax = plt.subplots(figsize=(6, 6))
    if cloud is not None:
        ax.scatter(cloud.points[:, 0], cloud.points[:, 1], s=2, c=cloud.classes, cmap="tab20", alpha=0.5)
    for mp in report.polygons:
        o = np.vstack([mp.polygon.outer, mp.polygon.outer[:1]])
        ax.plot(o[:, 0], o[:, 1], color="green", lw=1.5)
        for h in mp.polygon.holes:
            h = np.vstack([h, h[:1]])
            ax.plot(h[:, 0], h[:, 1], color="orange", lw=1.2)
    if report.site is not None:
        cx, cy = report.site.center2d
        ax.add_patch(plt.Circle((cx, cy), report.site.radius, fill=False, color="blue", lw=1.5))
        ax.plot([cx], [cy], marker="*", color="blue", markersize=12)
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
