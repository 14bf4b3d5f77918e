"""Flat-surface extraction: triangle filtering, planar mesh growth and polygon tracing.

Pipeline over a :class:`~roofland.triangulation.Triangulation` of the z-dropped
cloud:

1. ``filter_triangles`` keeps triangles that are short-edged, built only from
   allowed classes, and either nearly horizontal or nearly flat in z.
2. ``extract_planar_meshes`` groups the kept triangles into edge-connected
   meshes by breadth-first region growing.
3. ``mesh_to_polygon`` walks the boundary half-edges of a mesh into rings and
   returns a 2D polygon whose holes are the obstacle cutouts.
"""

from dataclasses import dataclass, field
import math
from typing import Iterable

import numpy as np
from numba import njit

from .triangulation import Triangulation
from .types import (
    ROOFTOP,
    ClassifiedPointCloud,
    DegenerateTriangle,
    NonManifoldBoundary,
    Plane,
    PolygonWithHoles,
    Triangle,
    ring_signed_area,
)

K_HAT = np.array([0.0, 0.0, 1.0])
MIN_TRIANGLE_AREA = 1e-12


@dataclass(frozen=True)
class FilterParams:
    l_max: float = 4.0
    dot_min: float = 0.96
    z_min: float = 0.10
    allowed_classes: frozenset = field(default_factory=lambda: frozenset({ROOFTOP}))

    def __post_init__(self):
        if not self.l_max > 0:
            raise ValueError("l_max must be positive")
        if not 0.0 <= self.dot_min <= 1.0:
            raise ValueError("dot_min must lie in [0, 1]")
        if not self.z_min >= 0:
            raise ValueError("z_min must be non-negative")
        object.__setattr__(self, "allowed_classes", frozenset(int(c) for c in self.allowed_classes))


@dataclass(frozen=True, eq=False)
class PlanarMesh:
    triangle_indices: np.ndarray
    plane: Plane
    mesh_id: int

    def __len__(self) -> int:
        return int(self.triangle_indices.size)


def triangle_normal(t, cloud: ClassifiedPointCloud) -> np.ndarray:
    """Unit normal of a 3D triangle, flipped so its z-component is non-negative."""
    t = Triangle(*(int(i) for i in t))
    p = cloud.points
    cross = np.cross(p[t.v1] - p[t.v0], p[t.v2] - p[t.v0])
    norm = float(np.linalg.norm(cross))
    if 0.5 * norm < MIN_TRIANGLE_AREA:
        raise DegenerateTriangle(f"triangle {tuple(t)} has area {0.5 * norm:.3g} m^2")
    n = cross / norm
    return -n if n[2] < 0 else n


def _triangle_geometry(triangles: np.ndarray, points: np.ndarray):
    """Per-triangle unit normals (zero rows when degenerate), 3D max edge and z extent."""
    p = points[triangles]  # (k, 3 vertices, xyz)
    e01 = p[:, 1] - p[:, 0]
    e12 = p[:, 2] - p[:, 1]
    e20 = p[:, 0] - p[:, 2]
    max_edge = np.sqrt(
        np.maximum.reduce([(e01**2).sum(1), (e12**2).sum(1), (e20**2).sum(1)])
    )
    cross = np.cross(e01, -e20)
    norm = np.linalg.norm(cross, axis=1)
    ok = 0.5 * norm >= MIN_TRIANGLE_AREA
    normals = np.zeros_like(cross)
    normals[ok] = cross[ok] / norm[ok, None]
    normals[normals[:, 2] < 0] *= -1.0
    z = p[:, :, 2]
    z_extent = z.max(axis=1) - z.min(axis=1)
    return normals, max_edge, z_extent


def filter_triangles(tri: Triangulation, cloud: ClassifiedPointCloud, params: FilterParams) -> np.ndarray:
    """Indices (ascending) of the triangles accepted for plane extraction.

    A triangle is kept when every edge is shorter than ``l_max`` (measured in
    3D), every vertex class is allowed, and either ``|n . k| > dot_min`` or its
    vertical extent is below ``z_min``. The second branch keeps slightly noisy
    flat triangles so sensor noise does not punch spurious holes in the mesh.
    Degenerate (zero-area) triangles can only pass through the second branch.
    """
    if tri.num_triangles == 0:
        return np.empty(0, dtype=np.int64)
    normals, max_edge, z_extent = _triangle_geometry(tri.triangles, cloud.points)
    dot = np.abs(normals @ K_HAT)
    allowed = np.fromiter(params.allowed_classes, dtype=np.int64)
    class_ok = np.isin(cloud.classes[tri.triangles], allowed).all(axis=1)
    short = max_edge < params.l_max
    keep = short & class_ok & ((dot > params.dot_min) | (z_extent < params.z_min))
    return np.flatnonzero(keep)


def mesh_plane(triangle_indices, tri: Triangulation, cloud: ClassifiedPointCloud) -> Plane:
    """Plane through the mesh vertex centroid with the mean triangle normal."""
    idx = np.asarray(triangle_indices, dtype=np.int64)
    normals, _, _ = _triangle_geometry(tri.triangles[idx], cloud.points)
    n = normals.sum(axis=0)
    if np.linalg.norm(n) == 0.0:
        n = K_HAT.copy()
    centroid = cloud.points[np.unique(tri.triangles[idx])].mean(axis=0)
    return Plane.from_normal_point(n, centroid)


def extract_planar_meshes(
    filtered: Iterable[int], tri: Triangulation, cloud: ClassifiedPointCloud
) -> list[PlanarMesh]:
    """Partition the filtered triangles into edge-connected meshes.

    Seeds are taken in ascending triangle index rather than at random; the
    resulting partition is the same either way, and this keeps output stable.
    """
    filtered = np.unique(np.fromiter(filtered, dtype=np.int64))
    if filtered.size == 0:
        return []
    labels = _bfs_labels(filtered, tri.halfedges, tri.num_triangles)
    # Labels are handed out in seed order, so sorting by label keeps mesh ids
    # ordered by each mesh's lowest triangle index.
    mesh_of = labels[filtered]
    order = np.argsort(mesh_of, kind="stable")
    groups = np.split(filtered[order], np.flatnonzero(np.diff(mesh_of[order])) + 1)
    meshes = []
    for mesh_id, idx in enumerate(groups):
        idx.setflags(write=False)
        meshes.append(PlanarMesh(idx, mesh_plane(idx, tri, cloud), mesh_id))
    return meshes


@njit(cache=True)
def _bfs_labels(filtered, halfedges, num_triangles):
    """Mesh label per triangle (-1 if not filtered), grown breadth-first from
    unvisited seeds in ascending index order."""
    labels = np.full(num_triangles, -1, dtype=np.int64)
    remaining = np.zeros(num_triangles, dtype=np.bool_)
    for t in filtered:
        remaining[t] = True
    queue = np.empty(filtered.size, dtype=np.int64)
    n_meshes = 0
    for seed in filtered:
        if not remaining[seed]:
            continue
        remaining[seed] = False
        head = 0
        tail = 1
        queue[0] = seed
        while head < tail:
            t = queue[head]
            head += 1
            labels[t] = n_meshes
            for h in range(3 * t, 3 * t + 3):
                twin = halfedges[h]
                if twin < 0:
                    continue
                nb = twin // 3
                if remaining[nb]:
                    remaining[nb] = False
                    queue[tail] = nb
                    tail += 1
        n_meshes += 1
    return labels


def _counterclockwise_angle(bx, by, ox, oy) -> float:
    """Angle swept turning counter-clockwise from direction b to direction o, in (0, 2*pi]."""
    ang = math.atan2(bx * oy - by * ox, bx * ox + by * oy) % (2.0 * math.pi)
    return ang if ang > 0.0 else 2.0 * math.pi


def boundary_halfedges(mesh: PlanarMesh, tri: Triangulation) -> np.ndarray:
    members = mesh.triangle_indices
    in_mesh = np.zeros(tri.num_triangles, dtype=bool)
    in_mesh[members] = True
    hs = (3 * members[:, None] + np.arange(3)).ravel()
    twins = tri.halfedges[hs]
    outside = (twins < 0) | ~in_mesh[np.where(twins < 0, 0, twins) // 3]
    return hs[outside]


def trace_rings(mesh: PlanarMesh, tri: Triangulation) -> list[list[int]]:
    """Link boundary half-edges into closed vertex rings.

    Where a vertex carries several outgoing boundary edges (rings pinched
    together at one vertex) the walk makes the most clockwise turn, i.e. takes
    the outgoing edge nearest counter-clockwise of the edge it arrived along.
    That keeps the walk on the border of one empty region, so a hole touching
    the outline or another hole at a vertex still gets its own simple ring.
    The outline of an edge-connected mesh is always a single ring: any path
    through the mesh joining two wedges at a pinch vertex encloses the empty
    wedge between them, turning it into a hole.
    """
    bnd = boundary_halfedges(mesh, tri)
    flat = tri.triangles.ravel()
    pts = tri.points2d
    start_v = flat[bnd].tolist()
    end_v = flat[np.where(bnd % 3 == 2, bnd - 2, bnd + 1)].tolist()

    outgoing: dict[int, list[int]] = {}
    for k, v in enumerate(start_v):
        outgoing.setdefault(v, []).append(k)

    used = [False] * len(start_v)
    rings = []
    for first in range(len(start_v)):
        if used[first]:
            continue
        ring = []
        k = first
        while True:
            used[k] = True
            ring.append(start_v[k])
            v = end_v[k]
            cands = outgoing.get(v)
            if not cands:
                raise NonManifoldBoundary(f"boundary dead-ends at vertex {v}")
            if len(cands) == 1:
                nxt = cands[0]
            else:
                u = start_v[k]
                bx, by = pts[u, 0] - pts[v, 0], pts[u, 1] - pts[v, 1]
                nxt = min(
                    cands,
                    key=lambda c: _counterclockwise_angle(
                        bx, by, pts[end_v[c], 0] - pts[v, 0], pts[end_v[c], 1] - pts[v, 1]
                    ),
                )
            if nxt == first:
                break
            if used[nxt]:
                raise NonManifoldBoundary(f"ambiguous boundary linking at vertex {v}")
            k = nxt
        rings.append(ring)
    return rings


def mesh_to_polygon(mesh: PlanarMesh, tri: Triangulation) -> PolygonWithHoles:
    """Polygon with holes covering the mesh's 2D footprint.

    The counter-clockwise ring with the largest area is the outline and
    clockwise rings are holes. Holes outside the outline are dropped; this
    guards against an island sitting inside a hole and touching it at a vertex.
    """
    if len(mesh) == 0:
        raise ValueError("mesh is empty")
    rings = [tri.points2d[np.asarray(r)] for r in trace_rings(mesh, tri)]
    areas = [ring_signed_area(r) for r in rings]
    outer = int(np.argmax(areas))
    outer_ring = rings[outer]
    holes = []
    for i, r in enumerate(rings):
        if i == outer or areas[i] > 0:
            continue
        # The midpoint of a hole edge never lies on another ring, so it
        # decides unambiguously whether the hole sits inside the outline.
        mid = 0.5 * (r[0] + r[1])
        if _point_in_ring(mid, outer_ring):
            holes.append(r)
    return PolygonWithHoles(outer_ring, tuple(holes), mesh.plane)


def _point_in_ring(p, ring: np.ndarray) -> bool:
    x, y = p
    xa, ya = ring[:, 0], ring[:, 1]
    xb, yb = np.roll(xa, -1), np.roll(ya, -1)
    crosses = (ya > y) != (yb > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = (xb - xa) * (y - ya) / (yb - ya) + xa
    return bool(np.count_nonzero(crosses & (x < xi)) % 2)


def mesh_area_2d(mesh: PlanarMesh, tri: Triangulation) -> float:
    p = tri.points2d[tri.triangles[mesh.triangle_indices]]
    a = p[:, 1] - p[:, 0]
    b = p[:, 2] - p[:, 0]
    return float(0.5 * np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]).sum())
