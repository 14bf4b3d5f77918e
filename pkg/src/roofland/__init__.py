"""Rooftop landing site selection from classified LiDAR point clouds."""

from .config import PipelineConfig, load_config
from .io import load_point_cloud, write_point_cloud
from .pipeline import LandingReport, emit_svg, run
from .polylabel import find_pole
from .polylidar import FilterParams, extract_planar_meshes, filter_triangles, mesh_to_polygon
from .triangulation import Triangulation, delaunay, triangulate_cloud
from .types import (
    ClassifiedPointCloud,
    LandingSite,
    NoLandingSite,
    Plane,
    PolygonWithHoles,
    RooflandError,
)

__all__ = [
    "ClassifiedPointCloud",
    "FilterParams",
    "LandingReport",
    "LandingSite",
    "NoLandingSite",
    "PipelineConfig",
    "Plane",
    "PolygonWithHoles",
    "RooflandError",
    "Triangulation",
    "delaunay",
    "emit_svg",
    "extract_planar_meshes",
    "filter_triangles",
    "find_pole",
    "load_config",
    "load_point_cloud",
    "mesh_to_polygon",
    "run",
    "triangulate_cloud",
    "write_point_cloud",
]
