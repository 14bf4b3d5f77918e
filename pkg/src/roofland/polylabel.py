"""Largest inscribed circle of a polygon with holes (pole of inaccessibility).

Best-first quadtree search: square cells are ranked by the largest distance any
point inside them could reach (centre distance + half diagonal), and a cell is
only split while that bound beats the best centre found so far by more than
the requested precision.
"""

from dataclasses import dataclass
import heapq
import itertools
import math

import numpy as np
from numba import njit

from .types import EmptyPolygon, PolygonWithHoles, ring_signed_area

DEFAULT_PRECISION = 0.5
SQRT2 = math.sqrt(2.0)


@njit(cache=True)
def _signed_distance(px, py, segs):
    inside = False
    best = np.inf
    for k in range(segs.shape[0]):
        ax = segs[k, 0]
        ay = segs[k, 1]
        bx = segs[k, 2]
        by = segs[k, 3]
        if (ay > py) != (by > py):
            if px < (bx - ax) * (py - ay) / (by - ay) + ax:
                inside = not inside
        dx = bx - ax
        dy = by - ay
        qx = ax
        qy = ay
        if dx != 0.0 or dy != 0.0:
            t = ((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy)
            if t > 1.0:
                qx = bx
                qy = by
            elif t > 0.0:
                qx = ax + dx * t
                qy = ay + dy * t
        d = (px - qx) ** 2 + (py - qy) ** 2
        if d < best:
            best = d
    d = math.sqrt(best)
    return d if inside else -d


def signed_distance(p, poly: PolygonWithHoles) -> float:
    """Distance from ``p`` to the nearest ring edge; negative outside or in a hole."""
    return float(_signed_distance(float(p[0]), float(p[1]), poly.segments()))


@dataclass(order=True)
class Cell:
    """Square search cell. Sorts so that the highest ``potential`` pops first."""

    sort_key: tuple
    x: float
    y: float
    half_size: float
    dist: float
    potential: float

    @property
    def center(self) -> tuple:
        return (self.x, self.y)


def _make_cell(x, y, h, segs, seq) -> Cell:
    d = _signed_distance(x, y, segs)
    pot = d + h * SQRT2
    return Cell((-pot, seq), x, y, h, d, pot)


def _centroid(ring: np.ndarray):
    x = ring[:, 0]
    y = ring[:, 1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    f = x * yn - xn * y
    area = f.sum() * 3.0
    if area == 0.0:
        return float(ring[0, 0]), float(ring[0, 1])
    return float(((x + xn) * f).sum() / area), float(((y + yn) * f).sum() / area)


def find_pole(poly: PolygonWithHoles, precision: float = DEFAULT_PRECISION, stats: dict = None):
    """Centre and radius of the largest circle inside ``poly`` that avoids its holes.

    The radius is the signed distance at the returned centre, and no point of
    the polygon is farther than ``radius + precision`` from the boundary.
    Pass a dict as ``stats`` to receive the number of cells evaluated.
    """
    if not precision > 0:
        raise ValueError("precision must be positive")
    if abs(ring_signed_area(poly.outer)) == 0.0:
        raise EmptyPolygon("outer ring has zero area")
    segs = poly.segments()
    min_x, min_y, max_x, max_y = poly.bounds
    width = max_x - min_x
    height = max_y - min_y
    cell_size = min(width, height)
    if cell_size <= 0.0:
        raise EmptyPolygon("polygon has a degenerate bounding box")

    seq = itertools.count()
    h = cell_size / 2.0
    queue = []
    nx = max(1, math.ceil(width / cell_size))
    ny = max(1, math.ceil(height / cell_size))
    for i in range(nx):
        for j in range(ny):
            queue.append(_make_cell(min_x + i * cell_size + h, min_y + j * cell_size + h, h, segs, next(seq)))
    heapq.heapify(queue)

    cx, cy = _centroid(poly.outer)
    best = _make_cell(cx, cy, 0.0, segs, next(seq))
    bbox_cell = _make_cell(min_x + width / 2.0, min_y + height / 2.0, 0.0, segs, next(seq))
    if bbox_cell.dist > best.dist:
        best = bbox_cell

    probes = len(queue) + 2
    while queue:
        cell = heapq.heappop(queue)
        if cell.dist > best.dist:
            best = cell
        if cell.potential - best.dist <= precision:
            continue
        h = cell.half_size / 2.0
        for sx, sy in ((-1, -1), (1, -1), (-1, 1), (1, 1)):
            heapq.heappush(queue, _make_cell(cell.x + sx * h, cell.y + sy * h, h, segs, next(seq)))
        probes += 4

    if stats is not None:
        stats["probes"] = probes
    return (best.x, best.y), float(best.dist)
