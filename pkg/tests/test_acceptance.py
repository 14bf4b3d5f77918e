"""Acceptance checks, one test per criterion (criterion 3 and 4 have two parts).

Each test logs a PASS/FAIL line that is repeated in the pytest terminal
summary under "acceptance criteria".
"""

import time

import numpy as np
import pytest

from conftest import TARP_SEED, camera_config, strip_classes
from oracles import (
    GridDistanceOracle,
    circumcircle_violations,
    filter_condition,
    hull_vertex_count,
    mesh_partition_oracle,
    random_polygon_with_holes,
)
from roofland.bench import bench_cloud, bench_sizes, scaling_ratio
from roofland.polylabel import find_pole, signed_distance
from roofland.polylidar import FilterParams, extract_planar_meshes, filter_triangles
from roofland.scenegen import ASSET_MEANS, SceneSpec, generate_scene, sample_asset_counts, scene_for_size
from roofland.triangulation import delaunay, triangulate_cloud
from roofland.types import ROOFTOP, TARP, ClassifiedPointCloud, PolygonWithHoles

N_SCENES = 30
SPACING = 0.5


# ---------------------------------------------------------------- 1


@pytest.mark.parametrize("precision", [0.5, 0.01])
def test_1_polylabel_precision_against_grid_oracle(precision, criterion):
    rng = np.random.default_rng(2024)
    polys = [random_polygon_with_holes(rng) for _ in range(100)]
    find_pole(PolygonWithHoles(polys[0][0], tuple(polys[0][1])), precision)  # JIT warm-up

    elapsed = 0.0
    worst = 0.0
    failures = 0
    for outer, holes in polys:
        poly = PolygonWithHoles(outer, tuple(holes))
        t0 = time.perf_counter()
        _, radius = find_pole(poly, precision)
        elapsed += time.perf_counter() - t0
        _, grid_best = GridDistanceOracle(outer, holes).max_on_grid(precision / 4)
        err = abs(radius - grid_best)
        worst = max(worst, err)
        failures += err > precision
    ok = failures == 0 and elapsed < 10.0
    criterion(
        1,
        ok,
        f"precision {precision}: {100 - failures}/100 within precision of grid oracle "
        f"(worst |r - oracle| = {worst:.4f}), polylabel time {elapsed:.3f} s (< 10 s)",
    )
    assert failures == 0
    assert elapsed < 10.0


# ---------------------------------------------------------------- 2


def _point_sets():
    rng = np.random.default_rng(7)
    sets = []
    for k in range(50):
        n = int(rng.integers(3, 501))
        kind = k % 5
        if kind == 0:
            pts = rng.uniform(-1000, 1000, (n, 2))
        elif kind == 1:  # integer lattice: cocircular quads, collinear hull points, duplicates
            pts = rng.integers(0, 25, (n, 2)).astype(float)
        elif kind == 2:  # LiDAR-like jittered grid
            side = int(np.ceil(np.sqrt(n)))
            g = np.stack(np.meshgrid(np.arange(side), np.arange(side)), -1).reshape(-1, 2)[:n] * 0.5
            pts = g + rng.normal(0, 1e-3, g.shape)
        elif kind == 3:  # clusters
            centres = rng.uniform(0, 100, (5, 2))
            pts = centres[rng.integers(0, 5, n)] + rng.normal(0, 1.0, (n, 2))
        else:  # points on a circle plus interior
            th = rng.uniform(0, 2 * np.pi, n // 2)
            pts = np.vstack([np.column_stack([np.cos(th), np.sin(th)]) * 10, rng.uniform(-5, 5, (n - n // 2, 2))])
        if len(np.unique(pts, axis=0)) < 3:
            pts = np.vstack([pts, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])
        sets.append(pts)
    return sets


def test_2_delaunay_validity(criterion):
    bad_circles = 0
    bad_counts = 0
    total_tris = 0
    for pts in _point_sets():
        tri = delaunay(pts)
        distinct = np.unique(pts, axis=0)
        n = len(distinct)
        h = hull_vertex_count(distinct)
        total_tris += tri.num_triangles
        bad_circles += len(circumcircle_violations(tri.triangles, pts, rel_tol=1e-9))
        bad_counts += tri.num_triangles != 2 * n - 2 - h
    ok = bad_circles == 0 and bad_counts == 0
    criterion(
        2,
        ok,
        f"50 point sets, {total_tris} triangles: {bad_circles} empty-circumcircle violations (tol 1e-9), "
        f"{bad_counts} sets with triangle count != 2n-2-h",
    )
    assert bad_circles == 0
    assert bad_counts == 0


# ---------------------------------------------------------------- 3


def test_3a_filter_matches_direct_condition(criterion):
    rng = np.random.default_rng(3)
    params = FilterParams()
    checked = 0
    mismatches = 0
    outcomes = {"kept": 0, "long": 0, "class": 0, "steep": 0}
    while checked < 1000:
        n = 150
        xy = rng.uniform(0, rng.uniform(5, 60), (n, 2))
        slope = rng.choice([0.0, 0.05, 0.5, 3.0])
        z = slope * xy[:, 0] + rng.normal(0, rng.choice([0.0, 0.02, 0.08]), n)
        cls = np.where(rng.random(n) < 0.15, TARP, ROOFTOP)
        cloud = ClassifiedPointCloud(np.column_stack([xy, z]), cls)
        tri = triangulate_cloud(cloud)
        kept = set(filter_triangles(tri, cloud, params).tolist())
        for t in rng.permutation(tri.num_triangles)[: min(100, 1000 - checked)]:
            v = tri.triangles[t]
            want = filter_condition(cloud.points[v], cloud.classes[v], params.l_max, params.dot_min, params.z_min, {ROOFTOP})
            mismatches += want != (int(t) in kept)
            checked += 1
            if want:
                outcomes["kept"] += 1
            elif max(np.linalg.norm(cloud.points[v] - np.roll(cloud.points[v], 1, 0), axis=1)) >= params.l_max:
                outcomes["long"] += 1
            elif not np.all(cloud.classes[v] == ROOFTOP):
                outcomes["class"] += 1
            else:
                outcomes["steep"] += 1
    ok = mismatches == 0
    criterion(3, ok, f"filter: {checked - mismatches}/{checked} random triangles agree with direct evaluation {outcomes}")
    assert mismatches == 0
    assert all(v > 0 for v in outcomes.values())


def test_3b_mesh_partition_matches_union_find(criterion):
    agree = 0
    meshes_total = 0
    for seed in range(N_SCENES):
        scene = generate_scene(SceneSpec(seed=seed))
        # geometry-only classes so obstacle tops form extra meshes
        cloud = ClassifiedPointCloud(scene.cloud.points, np.full(len(scene.cloud), ROOFTOP))
        tri = triangulate_cloud(cloud)
        kept = filter_triangles(tri, cloud, FilterParams())
        meshes = extract_planar_meshes(kept, tri, cloud)
        got = {frozenset(m.triangle_indices.tolist()) for m in meshes}
        meshes_total += len(got)
        agree += got == mesh_partition_oracle(tri.triangles, kept)
    ok = agree == N_SCENES
    criterion(3, ok, f"meshes: {agree}/{N_SCENES} scenes partition identically to union-find ({meshes_total} meshes)")
    assert agree == N_SCENES


# ---------------------------------------------------------------- 4


def test_4a_end_to_end_radius_matches_oracle(criterion):
    from roofland.pipeline import run

    precision = 0.5
    tol = precision + 2 * SPACING
    errors = []
    for seed in range(N_SCENES):
        scene = generate_scene(SceneSpec(seed=seed, spacing=SPACING))
        report = run(strip_classes(scene), camera_config(scene, precision=precision), label_image=scene.label_image)
        radius = report.site.radius if report.found else 0.0
        errors.append(abs(radius - scene.ground_truth.oracle_radius))
    passed = sum(e <= tol for e in errors)
    ok = passed == N_SCENES
    criterion(
        4,
        ok,
        f"{passed}/{N_SCENES} scenes with |radius - oracle| <= {tol} m (worst {max(errors):.3f} m, mean {np.mean(errors):.3f} m)",
    )
    assert passed == N_SCENES


def test_4b_tarp_excluded_only_with_classification(tarp_scene, criterion):
    from roofland.pipeline import run

    tarp = next(o for o in tarp_scene.ground_truth.obstacles if o.class_id == TARP)
    centre = ((tarp.x0 + tarp.x1) / 2, (tarp.y0 + tarp.y1) / 2)
    with_cls = run(strip_classes(tarp_scene), camera_config(tarp_scene), label_image=tarp_scene.label_image)
    without = run(strip_classes(tarp_scene))

    def free_at_tarp(report):
        return any(signed_distance(centre, mp.polygon) > 0 for mp in report.polygons)

    excluded_with = not free_at_tarp(with_cls)
    excluded_without = not free_at_tarp(without)
    shrinks = with_cls.site.radius <= without.site.radius
    ok = excluded_with and not excluded_without and shrinks
    criterion(
        4,
        ok,
        f"tarp scene (seed {TARP_SEED}): tarp excluded with classification={excluded_with}, "
        f"without={excluded_without}; radius {with_cls.site.radius:.3f} m <= {without.site.radius:.3f} m",
    )
    assert excluded_with and not excluded_without
    assert shrinks


# ---------------------------------------------------------------- 5, 6


def test_5_performance_1500_points(criterion):
    scene = scene_for_size(1500, seed=0)
    cloud = strip_classes(scene)
    stats = bench_cloud(cloud, repeat=50, warmup=3)
    core = stats["core"]
    upper = core.mean + core.ci95
    ok = upper <= 50.0
    stages = ", ".join(f"{s} {stats[s].mean:.2f}" for s in ("triangulation", "filtering", "extraction", "polygonization", "polylabel"))
    criterion(
        5,
        ok,
        f"{len(cloud)} points: core {core.mean:.2f} ms +/- {core.ci95:.2f} (95% CI, n={core.n}) <= 50 ms [{stages} ms]",
    )
    assert upper <= 50.0


def test_6_scaling_1k_to_10k(criterion):
    results = bench_sizes([1000, 10000], repeat=20, warmup=2)
    ratio = scaling_ratio(results, 1000, 10000)
    small, large = (r.stages["core"] for r in results)
    ok = ratio <= 15.0
    criterion(
        6,
        ok,
        f"time(10k)/time(1k) = {large.mean:.2f} ms / {small.mean:.2f} ms = {ratio:.2f} (<= 15)",
    )
    assert ratio <= 15.0


# ---------------------------------------------------------------- 7


def test_7_asset_means(criterion):
    draws = sample_asset_counts(ASSET_MEANS, np.random.default_rng(0), size=10_000)
    rel = {name: draws[name].mean() / mean - 1.0 for name, mean in ASSET_MEANS.items()}
    worst = max(rel, key=lambda k: abs(rel[k]))
    ok = all(abs(v) <= 0.05 for v in rel.values())
    criterion(
        7,
        ok,
        f"10000 draws: all {len(ASSET_MEANS)} asset means within 5% of the survey means "
        f"(worst {worst} {draws[worst].mean():.4f} vs {ASSET_MEANS[worst]}, {100 * rel[worst]:+.2f}%)",
    )
    assert ok
