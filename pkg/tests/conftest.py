import pytest

from roofland.config import CameraConfig, PipelineConfig
from roofland.scenegen import SceneSpec, generate_scene
from roofland.types import UNLABELED, ClassifiedPointCloud


def camera_config(scene, **kw) -> PipelineConfig:
    return PipelineConfig(camera=CameraConfig(scene.intrinsics, scene.extrinsics), **kw)


def strip_classes(scene) -> ClassifiedPointCloud:
    """The scene's cloud as a sensor would deliver it: geometry only."""
    pts = scene.cloud.points
    return ClassifiedPointCloud(pts, [UNLABELED] * len(pts), labeled=False)


TARP_SEED = 1  # a seed whose tarp sits where the best circle would otherwise go


@pytest.fixture(scope="session")
def tarp_scene():
    return generate_scene(SceneSpec(seed=TARP_SEED, tarp_probability=1.0))


# ------------------------------------------------------------ acceptance log

_CRITERIA = []


@pytest.fixture
def criterion():
    """Call ``criterion(number, passed, detail)`` to log one acceptance line."""

    def record(number, passed, detail):
        line = f"ACCEPTANCE {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        _CRITERIA.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
