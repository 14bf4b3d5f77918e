"""2D Delaunay triangulation of the z-dropped point cloud.

Sweep-hull construction in the style of delaunator: points are inserted in
order of distance from a seed circumcircle, each new point is connected to the
visible part of the convex hull, and edges are flipped until locally Delaunay.
All orientation and in-circle decisions go through adaptive exact predicates.

Half-edge layout: triangle ``t`` owns half-edges ``3t, 3t+1, 3t+2``; half-edge
``h`` starts at vertex ``triangles.flat[h]`` and ends at the start vertex of
``next_halfedge(h)``. ``halfedges[h]`` is the twin half-edge or -1 on the hull.
Every triangle is counter-clockwise.
"""

from dataclasses import dataclass
import math

import numpy as np
from numba import njit

from ._predicates import incircle, orient2d
from .types import ClassifiedPointCloud, DegenerateInput

__all__ = [
    "Triangulation",
    "delaunay",
    "drop_z",
    "next_halfedge",
    "prev_halfedge",
    "triangulate_cloud",
]


def next_halfedge(h):
    return h - 2 if h % 3 == 2 else h + 1


def prev_halfedge(h):
    return h + 2 if h % 3 == 0 else h - 1


@dataclass(frozen=True, eq=False)
class Triangulation:
    """Delaunay triangles over a set of 2D points.

    ``triangles`` holds indices into ``points2d`` (shape ``(k, 3)``);
    ``halfedges`` has shape ``(3k,)``. When duplicate 2D positions were present,
    only the first occurrence is used as a vertex and ``vertex_map[i]`` gives the
    index that stands in for point ``i``.
    """

    triangles: np.ndarray
    halfedges: np.ndarray
    points2d: np.ndarray
    hull: np.ndarray
    vertex_map: np.ndarray

    @property
    def num_triangles(self) -> int:
        return int(self.triangles.shape[0])

    @property
    def num_vertices(self) -> int:
        return int(np.unique(self.triangles).size) if self.triangles.size else 0

    def neighbors(self, t: int) -> list[int]:
        """Triangles sharing an edge with triangle ``t``."""
        out = []
        for h in range(3 * t, 3 * t + 3):
            twin = self.halfedges[h]
            if twin >= 0:
                out.append(int(twin) // 3)
        return out


def drop_z(cloud: ClassifiedPointCloud) -> np.ndarray:
    """Project points onto the xy-plane, preserving order."""
    return np.array(cloud.points[:, :2], dtype=np.float64, copy=True).reshape(-1, 2)


_jit = njit(cache=True, error_model="numpy")


@_jit
def _pseudo_angle(dx, dy):
    p = dx / (abs(dx) + abs(dy))
    if dy > 0.0:
        return (3.0 - p) / 4.0
    return (1.0 + p) / 4.0


@_jit
def _hash_key(x, y, cx, cy, hash_size):
    return int(math.floor(_pseudo_angle(x - cx, y - cy) * hash_size)) % hash_size


@_jit
def _circumradius2(ax, ay, bx, by, cx, cy):
    dx = bx - ax
    dy = by - ay
    ex = cx - ax
    ey = cy - ay
    bl = dx * dx + dy * dy
    cl = ex * ex + ey * ey
    d = 0.5 / (dx * ey - dy * ex)
    x = (ey * bl - dy * cl) * d
    y = (dx * cl - ex * bl) * d
    return x * x + y * y


@_jit
def _circumcenter(ax, ay, bx, by, cx, cy):
    dx = bx - ax
    dy = by - ay
    ex = cx - ax
    ey = cy - ay
    bl = dx * dx + dy * dy
    cl = ex * ex + ey * ey
    d = 0.5 / (dx * ey - dy * ex)
    return ax + (ey * bl - dy * cl) * d, ay + (dx * cl - ex * bl) * d


@_jit
def _link(halfedges, a, b):
    halfedges[a] = b
    if b != -1:
        halfedges[b] = a


@_jit
def _add_triangle(triangles, halfedges, tlen, i0, i1, i2, a, b, c):
    t = tlen
    triangles[t] = i0
    triangles[t + 1] = i1
    triangles[t + 2] = i2
    _link(halfedges, t, a)
    _link(halfedges, t + 1, b)
    _link(halfedges, t + 2, c)
    return t


@_jit
def _legalize(a, xs, ys, triangles, halfedges, hull_tri, hull_prev, hull_start, stack):
    i = 0
    ar = 0
    while True:
        b = halfedges[a]
        a0 = a - a % 3
        ar = a0 + (a + 2) % 3
        if b == -1:
            if i == 0:
                break
            i -= 1
            a = stack[i]
            continue

        b0 = b - b % 3
        al = a0 + (a + 1) % 3
        bl = b0 + (b + 2) % 3
        p0 = triangles[ar]
        pr = triangles[a]
        pl = triangles[al]
        p1 = triangles[bl]

        if incircle(xs[p0], ys[p0], xs[pr], ys[pr], xs[pl], ys[pl], xs[p1], ys[p1]) > 0.0:
            triangles[a] = p1
            triangles[b] = p0
            hbl = halfedges[bl]
            if hbl == -1:
                # flipped edge touched the hull on the far side; repoint its hull entry
                e = hull_start
                for _ in range(hull_prev.shape[0]):
                    if hull_tri[e] == bl:
                        hull_tri[e] = a
                        break
                    e = hull_prev[e]
                    if e == hull_start:
                        break
            _link(halfedges, a, hbl)
            _link(halfedges, b, halfedges[ar])
            _link(halfedges, ar, bl)
            br = b0 + (b + 1) % 3
            if i < stack.shape[0]:
                stack[i] = br
                i += 1
        else:
            if i == 0:
                break
            i -= 1
            a = stack[i]
    return ar


@_jit
def _sweep_hull(xs, ys):
    """Core triangulation. Returns (triangles, halfedges, hull, status).

    status: 0 ok, 1 all points collinear, 2 a point could not be inserted.
    """
    n = xs.shape[0]
    max_tri = max(2 * n - 5, 1)
    triangles = np.empty(3 * max_tri, dtype=np.int64)
    halfedges = np.empty(3 * max_tri, dtype=np.int64)
    empty = np.empty(0, dtype=np.int64)

    min_x = xs.min()
    max_x = xs.max()
    min_y = ys.min()
    max_y = ys.max()
    cx = 0.5 * (min_x + max_x)
    cy = 0.5 * (min_y + max_y)

    i0 = 0
    best = np.inf
    for i in range(n):
        d = (xs[i] - cx) ** 2 + (ys[i] - cy) ** 2
        if d < best:
            i0 = i
            best = d
    i1 = -1
    best = np.inf
    for i in range(n):
        if i == i0:
            continue
        d = (xs[i] - xs[i0]) ** 2 + (ys[i] - ys[i0]) ** 2
        if d < best and d > 0.0:
            i1 = i
            best = d
    i2 = -1
    best = np.inf
    for i in range(n):
        if i == i0 or i == i1:
            continue
        if orient2d(xs[i0], ys[i0], xs[i1], ys[i1], xs[i], ys[i]) == 0.0:
            continue
        r = _circumradius2(xs[i0], ys[i0], xs[i1], ys[i1], xs[i], ys[i])
        if r < best:
            i2 = i
            best = r
    if i1 == -1 or i2 == -1:
        return triangles[:0], halfedges[:0], empty, 1

    if orient2d(xs[i0], ys[i0], xs[i1], ys[i1], xs[i2], ys[i2]) < 0.0:
        i1, i2 = i2, i1

    ccx, ccy = _circumcenter(xs[i0], ys[i0], xs[i1], ys[i1], xs[i2], ys[i2])
    dists = (xs - ccx) ** 2 + (ys - ccy) ** 2
    ids = np.argsort(dists, kind="mergesort")

    hash_size = max(int(math.ceil(math.sqrt(n))), 1)
    hull_prev = np.zeros(n, dtype=np.int64)
    hull_next = np.zeros(n, dtype=np.int64)
    hull_tri = np.zeros(n, dtype=np.int64)
    hull_hash = np.full(hash_size, -1, dtype=np.int64)
    stack = np.empty(3 * max_tri + 16, dtype=np.int64)

    hull_start = i0
    hull_next[i0] = i1
    hull_prev[i2] = i1
    hull_next[i1] = i2
    hull_prev[i0] = i2
    hull_next[i2] = i0
    hull_prev[i1] = i0
    hull_tri[i0] = 0
    hull_tri[i1] = 1
    hull_tri[i2] = 2
    hull_hash[_hash_key(xs[i0], ys[i0], ccx, ccy, hash_size)] = i0
    hull_hash[_hash_key(xs[i1], ys[i1], ccx, ccy, hash_size)] = i1
    hull_hash[_hash_key(xs[i2], ys[i2], ccx, ccy, hash_size)] = i2

    tlen = 0
    _add_triangle(triangles, halfedges, tlen, i0, i1, i2, -1, -1, -1)
    tlen += 3

    status = 0
    for k in range(n):
        i = ids[k]
        if i == i0 or i == i1 or i == i2:
            continue
        x = xs[i]
        y = ys[i]

        start = 0
        key = _hash_key(x, y, ccx, ccy, hash_size)
        for j in range(hash_size):
            start = hull_hash[(key + j) % hash_size]
            if start != -1 and start != hull_next[start]:
                break

        start = hull_prev[start]
        e = start
        while True:
            q = hull_next[e]
            if orient2d(xs[e], ys[e], xs[q], ys[q], x, y) < 0.0:
                break
            e = q
            if e == start:
                e = -1
                break
        if e == -1:
            status = 2
            continue

        t = _add_triangle(triangles, halfedges, tlen, e, i, hull_next[e], -1, -1, hull_tri[e])
        tlen += 3
        hull_tri[i] = _legalize(t + 2, xs, ys, triangles, halfedges, hull_tri, hull_prev, hull_start, stack)
        hull_tri[e] = t

        nn = hull_next[e]
        while True:
            q = hull_next[nn]
            if not orient2d(xs[nn], ys[nn], xs[q], ys[q], x, y) < 0.0:
                break
            t = _add_triangle(triangles, halfedges, tlen, nn, i, q, hull_tri[i], -1, hull_tri[nn])
            tlen += 3
            hull_tri[i] = _legalize(t + 2, xs, ys, triangles, halfedges, hull_tri, hull_prev, hull_start, stack)
            hull_next[nn] = nn
            nn = q

        if e == start:
            while True:
                q = hull_prev[e]
                if not orient2d(xs[q], ys[q], xs[e], ys[e], x, y) < 0.0:
                    break
                t = _add_triangle(triangles, halfedges, tlen, q, i, e, -1, hull_tri[e], hull_tri[q])
                tlen += 3
                _legalize(t + 2, xs, ys, triangles, halfedges, hull_tri, hull_prev, hull_start, stack)
                hull_tri[q] = t
                hull_next[e] = e
                e = q

        hull_start = e
        hull_prev[i] = e
        hull_next[e] = i
        hull_prev[nn] = i
        hull_next[i] = nn
        hull_hash[_hash_key(x, y, ccx, ccy, hash_size)] = i
        hull_hash[_hash_key(xs[e], ys[e], ccx, ccy, hash_size)] = e

    hull_len = 1
    e = hull_next[hull_start]
    while e != hull_start:
        hull_len += 1
        e = hull_next[e]
    hull = np.empty(hull_len, dtype=np.int64)
    e = hull_start
    for k in range(hull_len):
        hull[k] = e
        e = hull_next[e]

    return triangles[:tlen].copy(), halfedges[:tlen].copy(), hull, status


def _unique_first(points2d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indices of first occurrences (ascending) and the per-point representative."""
    _, first, inverse = np.unique(points2d, axis=0, return_index=True, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    keep = np.sort(first)
    return keep, first[inverse]


def delaunay(points2d) -> Triangulation:
    """Delaunay triangulation of 2D points.

    Duplicate positions are collapsed onto their first occurrence. Raises
    ``DegenerateInput`` for fewer than three distinct points or when all points
    are collinear.
    """
    pts = np.asarray(points2d, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] < 3:
        raise DegenerateInput(f"need at least 3 points, got {pts.shape[0]}")
    if not np.all(np.isfinite(pts)):
        raise DegenerateInput("non-finite coordinates")
    keep, vertex_map = _unique_first(pts)
    if keep.size < 3:
        raise DegenerateInput(f"need at least 3 distinct points, got {keep.size}")

    sub = pts[keep]
    tri, half, hull, status = _sweep_hull(np.ascontiguousarray(sub[:, 0]), np.ascontiguousarray(sub[:, 1]))
    if status == 1:
        raise DegenerateInput("all points are collinear")
    if status == 2:
        # only reachable if distance-order insertion met a point inside the hull
        raise RuntimeError("triangulation failed to insert a point")

    return Triangulation(
        triangles=keep[tri].reshape(-1, 3),
        halfedges=half,
        points2d=pts,
        hull=keep[hull],
        vertex_map=vertex_map,
    )


def triangulate_cloud(cloud: ClassifiedPointCloud) -> Triangulation:
    return delaunay(drop_z(cloud))
