import json
import xml.dom.minidom

import numpy as np
import pytest

from conftest import camera_config, strip_classes
from roofland.config import PipelineConfig
from roofland.pipeline import STAGES, LandingReport, MeshPolygon, emit_svg, require_site, run
from roofland.polylabel import signed_distance
from roofland.scenegen import SceneSpec, generate_scene, write_scene
from roofland.types import TARP, NoLandingSite, Point3, PolygonWithHoles, LandingSite


def test_empty_roof_site_at_centre():
    sc = generate_scene(SceneSpec(seed=0, counts={}, noise_sigma=0.0))
    r = run(strip_classes(sc))
    assert r.found
    assert r.site.center2d == pytest.approx((10, 10), abs=0.5)
    assert r.site.radius == pytest.approx(10.0, abs=0.5)
    assert r.site.center3d.z == pytest.approx(10.0)
    assert set(STAGES) <= set(r.timings_ms)
    assert all(v >= 0 for v in r.timings_ms.values())
    assert r.timings_ms["total"] >= sum(r.timings_ms[s] for s in STAGES) - 1.0


def test_ac_unit_and_entrance_scene_gives_two_holes():
    sc = generate_scene(SceneSpec(seed=2, counts={"ac-unit": 1, "small-rooftop-entrance": 1}))
    r = run(strip_classes(sc), camera_config(sc), label_image=sc.label_image)
    best = next(mp for mp in r.polygons if mp.mesh_id == r.site.mesh_id)
    assert len(best.polygon.holes) == 2
    assert abs(r.site.radius - sc.ground_truth.oracle_radius) <= 0.5


def test_unlabeled_cloud_uses_default_class_and_geometry():
    sc = generate_scene(SceneSpec(seed=3))
    r = run(strip_classes(sc))
    # obstacle tops are flat too, so they show up as extra meshes
    assert r.sizes["meshes"] == 1 + len(sc.ground_truth.obstacles)
    assert abs(r.site.radius - sc.ground_truth.oracle_radius) <= 0.5 + 2 * 0.5


def test_labeled_cloud_without_camera_uses_file_classes():
    sc = generate_scene(SceneSpec(seed=3))
    r = run(sc.cloud)
    assert r.sizes["meshes"] == 1  # obstacle points are not rooftop
    assert r.timings_ms["classification"] < 50


def test_tarp_only_excluded_with_classification(tarp_scene):
    sc = tarp_scene
    tarp = next(o for o in sc.ground_truth.obstacles if o.class_id == TARP)
    centre = ((tarp.x0 + tarp.x1) / 2, (tarp.y0 + tarp.y1) / 2)
    with_cls = run(strip_classes(sc), camera_config(sc), label_image=sc.label_image)
    without = run(strip_classes(sc))

    def best_poly(rep):
        return next(mp.polygon for mp in rep.polygons if mp.mesh_id == rep.site.mesh_id)

    assert signed_distance(centre, best_poly(with_cls)) < 0
    assert signed_distance(centre, best_poly(without)) > 0
    assert with_cls.site.radius <= without.site.radius
    assert with_cls.site.radius < without.site.radius - 0.5


def test_camera_config_from_files(tmp_path, tarp_scene):
    paths = write_scene(tarp_scene, tmp_path)
    from roofland.config import load_config

    r = run(paths["cloud"], load_config(paths["config"]))
    direct = run(strip_classes(tarp_scene), camera_config(tarp_scene), label_image=tarp_scene.label_image)
    assert r.site.radius == direct.site.radius


def test_report_is_deterministic_without_timings():
    sc = generate_scene(SceneSpec(seed=5))
    a = run(sc.cloud).to_json(include_timings=False)
    b = run(sc.cloud).to_json(include_timings=False)
    assert a == b
    d = json.loads(run(sc.cloud).to_json())
    assert d["status"] == "ok" and set(STAGES) <= set(d["timings_ms"])
    assert d["site"]["radius"] > 0


def test_no_flat_region_is_reported_not_raised():
    rng = np.random.default_rng(0)
    xy = rng.uniform(0, 10, (200, 2))
    steep = np.column_stack([xy, 3.0 * xy[:, 0]])
    r = run(steep)
    assert not r.found and r.site is None
    assert "flat" in r.message
    assert json.loads(r.to_json())["status"] == "no_landing_site"
    with pytest.raises(NoLandingSite):
        require_site(r)


def test_degenerate_cloud_reported():
    r = run(np.array([[0, 0, 0], [1, 1, 0], [2, 2, 0]], float))
    assert not r.found and "triangulation" in r.message


def test_precision_is_passed_through():
    sc = generate_scene(SceneSpec(seed=5))
    r = run(sc.cloud, PipelineConfig(precision=0.05))
    assert r.site.precision == 0.05
    assert abs(r.site.radius - sc.ground_truth.oracle_radius) <= 0.05 + 2 * 0.5


def test_label_image_without_camera_is_an_error(tarp_scene):
    with pytest.raises(ValueError):
        run(tarp_scene.cloud, PipelineConfig(), label_image=tarp_scene.label_image)
    with pytest.raises(ValueError):
        run(tarp_scene.cloud, camera_config(tarp_scene))


def _square_report():
    poly = PolygonWithHoles([(0, 0), (4, 0), (4, 4), (0, 4)])
    site = LandingSite((2.0, 2.0), Point3(2.0, 2.0, 0.0), 2.0, 0.5, 0)
    return LandingReport(site, (MeshPolygon(0, 2, poly),))


def test_svg_structure(tmp_path):
    p = tmp_path / "o.svg"
    emit_svg(_square_report(), p)
    doc = xml.dom.minidom.parse(str(p))
    assert len(doc.getElementsByTagName("path")) == 1
    assert len(doc.getElementsByTagName("circle")) == 1
    assert doc.getElementsByTagName("path")[0].getAttribute("stroke") == "green"
    assert doc.getElementsByTagName("circle")[0].getAttribute("stroke") == "blue"


def test_empty_report_svg_is_valid(tmp_path):
    p = tmp_path / "e.svg"
    emit_svg(LandingReport(None), p)
    doc = xml.dom.minidom.parse(str(p))
    assert doc.documentElement.tagName == "svg"
    assert doc.getElementsByTagName("path") == [] and doc.getElementsByTagName("circle") == []


def test_tarp_svg_has_orange_hole_over_tarp(tmp_path, tarp_scene):
    r = run(strip_classes(tarp_scene), camera_config(tarp_scene), label_image=tarp_scene.label_image)
    p = tmp_path / "t.svg"
    emit_svg(r, p)
    doc = xml.dom.minidom.parse(str(p))
    holes = [e for e in doc.getElementsByTagName("path") if e.getAttribute("stroke") == "orange"]
    assert len(holes) >= 1
    n_rings = sum(len(mp.polygon.rings) for mp in r.polygons)
    assert len(doc.getElementsByTagName("path")) == n_rings


def test_svg_to_unwritable_path_raises(tmp_path):
    with pytest.raises(OSError):
        emit_svg(_square_report(), tmp_path / "missing" / "x.svg")
