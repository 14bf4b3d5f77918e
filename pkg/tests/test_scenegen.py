import json

import numpy as np
import pytest

from roofland.pointclass import classify_cloud
from roofland.scenegen import (
    ASSET_SIZES,
    ASSET_MEANS,
    GroundTruth,
    Obstacle,
    SceneSpec,
    generate_scene,
    oracle_landing,
    sample_asset_counts,
    scene_for_size,
    write_scene,
)
from roofland.types import ROOFTOP, TARP, PlacementFailure


def test_table_means_and_sizes_cover_every_asset():
    assert ASSET_MEANS["air-vents"] == 1.12 and ASSET_MEANS["ac-unit"] == 0.28
    assert set(ASSET_MEANS) - {"tarp"} == set(ASSET_SIZES)


def test_single_draw_is_integer_poisson():
    counts = sample_asset_counts(ASSET_MEANS, np.random.default_rng(0))
    assert set(counts) == set(ASSET_MEANS)
    assert all(isinstance(v, int) and v >= 0 for v in counts.values())


def test_batch_draw_has_poisson_marginal():
    # Stratification must not distort the distribution: compare P(0) and P(1).
    rng = np.random.default_rng(1)
    batches = [sample_asset_counts({"a": 1.12}, rng, size=50)["a"] for _ in range(400)]
    x = np.concatenate(batches)
    assert np.mean(x == 0) == pytest.approx(np.exp(-1.12), abs=0.02)
    assert np.mean(x == 1) == pytest.approx(1.12 * np.exp(-1.12), abs=0.02)
    assert x.var() == pytest.approx(1.12, rel=0.1)


def test_empty_roof_oracle_is_centre():
    assert oracle_landing((0, 0, 10, 10), []) == ((5.0, 5.0), 5.0)
    (cx, cy), r = oracle_landing((0, 0, 20, 10), [])
    assert r == pytest.approx(5.0) and cy == pytest.approx(5.0) and 5 <= cx <= 15


def test_oracle_respects_obstacle():
    ob = Obstacle("ac-unit", 7, 8, 0, 12, 10, 1.0)
    (cx, _), r = oracle_landing((0, 0, 20, 10), [ob])
    assert r == pytest.approx(4.0)
    assert cx == pytest.approx(4.0) or cx == pytest.approx(16.0)


def test_generated_scene_consistency():
    sc = generate_scene(SceneSpec(seed=4))
    gt = sc.ground_truth
    pts = sc.cloud.points
    assert np.all(pts[:, 0] >= 0) and np.all(pts[:, 0] <= 20)
    for o in gt.obstacles:
        inside = o.contains(pts[:, 0], pts[:, 1])
        assert inside.any()
        assert np.all(sc.cloud.classes[inside] == o.class_id)
    # obstacles are disjoint
    for i, a in enumerate(gt.obstacles):
        for b in gt.obstacles[i + 1 :]:
            assert a.x1 <= b.x0 or b.x1 <= a.x0 or a.y1 <= b.y0 or b.y1 <= a.y0
    assert gt.geometric_radius >= gt.oracle_radius


def test_same_seed_same_scene():
    a = generate_scene(SceneSpec(seed=7))
    b = generate_scene(SceneSpec(seed=7))
    assert np.array_equal(a.cloud.points, b.cloud.points)
    assert np.array_equal(a.label_image.labels, b.label_image.labels)


def test_label_image_agrees_with_true_classes():
    sc = generate_scene(SceneSpec(seed=4, tarp_probability=1.0))
    classified = classify_cloud(sc.cloud, sc.label_image, sc.intrinsics, sc.extrinsics)
    agree = np.mean(classified.classes == sc.cloud.classes)
    assert agree > 0.97  # only occlusion and pixel-edge effects differ
    roof_pts = sc.cloud.classes == ROOFTOP
    assert np.mean(classified.classes[roof_pts] == ROOFTOP) > 0.97
    tarp_pts = sc.cloud.classes == TARP
    assert tarp_pts.any() and np.all(classified.classes[tarp_pts] == TARP)


def test_tarp_is_flat_and_obstacles_raised():
    sc = generate_scene(SceneSpec(seed=2, tarp_probability=1.0, noise_sigma=0.0))
    z = sc.cloud.points[:, 2]
    assert np.all(z[sc.cloud.classes == TARP] == 10.0)
    assert np.all(z[(sc.cloud.classes != TARP) & (sc.cloud.classes != ROOFTOP)] > 10.0)


def test_placement_failure_when_roof_too_small():
    with pytest.raises(PlacementFailure):
        generate_scene(SceneSpec(width=2, length=2, asset_stats={"water-tower": 5.0}, seed=0))


def test_spec_validation():
    with pytest.raises(ValueError):
        SceneSpec(spacing=0)
    with pytest.raises(ValueError):
        SceneSpec(tarp_probability=2)


def test_scene_for_size_point_count():
    sc = scene_for_size(1500, seed=0)
    assert abs(len(sc.cloud) - 1500) < 100


def test_write_scene_files(tmp_path):
    sc = generate_scene(SceneSpec(seed=1))
    paths = write_scene(sc, tmp_path)
    assert all(p.exists() for p in paths.values())
    gt = GroundTruth.from_dict(json.loads(paths["truth"].read_text()))
    assert gt.oracle_radius == sc.ground_truth.oracle_radius
    assert gt.obstacles == sc.ground_truth.obstacles
