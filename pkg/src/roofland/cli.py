"""Command line entry point: ``land run``, ``land gen`` and ``land bench``.

Exit codes: 0 on success, 2 when no landing site is found, 1 on any error.
"""

import argparse
import sys
from pathlib import Path

from .config import PipelineConfig, load_config
from .types import RooflandError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_SITE = 2


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _nonneg_float(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="land", description="Find rooftop landing sites in LiDAR point clouds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="find the landing site in one point cloud")
    p.add_argument("--cloud", required=True, type=Path, help="point cloud file, 'x y z [class]' per line")
    p.add_argument("--config", type=Path, help="YAML config (filter parameters, precision, camera block)")
    p.add_argument("--label-image", type=Path, help="16-bit PGM label image; needs a camera block in the config")
    p.add_argument("--svg", type=Path, help="write an SVG drawing of the result")
    p.add_argument("--report", type=Path, help="write the JSON report")
    p.add_argument("--precision", type=_positive_float, help="polylabel precision in meters")
    p.add_argument("--figure", type=Path, help="write a PNG plot of the cloud and result")

    g = sub.add_parser("gen", help="generate a synthetic rooftop scene")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", type=Path, required=True, help="output directory")
    g.add_argument("--spacing", type=_positive_float, default=0.5, help="grid spacing in meters")
    g.add_argument("--noise", type=_nonneg_float, default=0.02, help="z noise standard deviation in meters")
    g.add_argument("--width", type=_positive_float, default=20.0)
    g.add_argument("--length", type=_positive_float, default=20.0)
    g.add_argument("--with-classes", action="store_true", help="write true classes as a fourth column")

    b = sub.add_parser("bench", help="time the pipeline stages")
    b.add_argument("--sizes", default="1k,10k", help="comma-separated point counts, e.g. 1k,10k")
    b.add_argument("--repeat", type=int, default=30)
    b.add_argument("--warmup", type=int, default=2)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--csv", type=Path, help="write per-stage statistics as CSV")
    b.add_argument("--figure", type=Path, help="write a PNG bar chart")
    return parser


def _cmd_run(args) -> int:
    from .io import load_point_cloud
    from .pipeline import emit_svg, run

    config = load_config(args.config) if args.config else PipelineConfig()
    if args.precision is not None:
        config = config.with_precision(args.precision)

    cloud = load_point_cloud(args.cloud)
    report = run(cloud, config, label_image=args.label_image)
    if args.report:
        args.report.write_text(report.to_json(), encoding="utf-8")
    if args.svg:
        emit_svg(report, args.svg)
    if args.figure:
        from .figures import plot_report

        plot_report(report, args.figure, cloud)
    if report.site is None:
        print(f"no landing site: {report.message}")
        return EXIT_NO_SITE
    s = report.site
    print(
        f"landing site at ({s.center3d.x:.3f}, {s.center3d.y:.3f}, {s.center3d.z:.3f}) "
        f"radius {s.radius:.3f} m (precision {s.precision:g} m, mesh {s.mesh_id})"
    )
    return EXIT_OK


def _cmd_gen(args) -> int:
    from .scenegen import SceneSpec, generate_scene, write_scene

    spec = SceneSpec(width=args.width, length=args.length, spacing=args.spacing, noise_sigma=args.noise, seed=args.seed)
    scene = generate_scene(spec)
    paths = write_scene(scene, args.out, with_classes=args.with_classes)
    gt = scene.ground_truth
    print(f"wrote {len(scene.cloud)} points and {len(gt.obstacles)} obstacles to {args.out}")
    print(f"oracle radius {gt.oracle_radius:.3f} m at ({gt.oracle_center[0]:.2f}, {gt.oracle_center[1]:.2f})")
    for name, path in paths.items():
        print(f"  {name}: {path}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    from .bench import bench_sizes, format_table, parse_sizes, scaling_ratio, write_csv

    sizes = parse_sizes(args.sizes)
    results = bench_sizes(sizes, repeat=args.repeat, warmup=args.warmup, seed=args.seed)
    print(format_table(results))
    if len(sizes) >= 2:
        small, large = min(sizes), max(sizes)
        print(f"ratio core time({large})/time({small}) = {scaling_ratio(results, small, large):.2f}")
    if args.csv:
        write_csv(results, args.csv)
    if args.figure:
        from .figures import plot_bench

        plot_bench(results, args.figure)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "gen": _cmd_gen, "bench": _cmd_bench}
    try:
        return handlers[args.command](args)
    except (RooflandError, OSError, ValueError) as exc:
        print(f"land {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
