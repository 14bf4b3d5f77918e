"""Plain-text point cloud files.

One point per line, ``x y z`` or ``x y z class`` separated by whitespace.
Blank lines and lines starting with ``#`` are ignored.
"""

import math
from pathlib import Path

import numpy as np

from .types import UNLABELED, ClassifiedPointCloud, ParseError


def parse_point_cloud(lines, path=None) -> ClassifiedPointCloud:
    coords = []
    classes = []
    n_fields = None
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        fields = text.split()
        if len(fields) not in (3, 4):
            raise ParseError(f"expected 3 or 4 fields, got {len(fields)}", lineno, path)
        if n_fields is None:
            n_fields = len(fields)
        elif len(fields) != n_fields:
            raise ParseError(f"mixed line formats: {len(fields)} fields after {n_fields}", lineno, path)
        try:
            xyz = [float(f) for f in fields[:3]]
        except ValueError:
            raise ParseError(f"non-numeric coordinate in {text!r}", lineno, path) from None
        if not all(math.isfinite(c) for c in xyz):
            raise ParseError(f"non-finite coordinate in {text!r}", lineno, path)
        coords.append(xyz)
        if n_fields == 4:
            try:
                c = int(fields[3])
            except ValueError:
                raise ParseError(f"class must be an integer, got {fields[3]!r}", lineno, path) from None
            if c < 0:
                raise ParseError(f"class must be non-negative, got {c}", lineno, path)
            classes.append(c)

    points = np.array(coords, dtype=np.float64).reshape(-1, 3)
    if n_fields == 4:
        return ClassifiedPointCloud(points, np.array(classes, dtype=np.int64))
    return ClassifiedPointCloud(points, np.full(points.shape[0], UNLABELED, dtype=np.int64), labeled=False)


def load_point_cloud(path) -> ClassifiedPointCloud:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        return parse_point_cloud(fh, path)


def write_point_cloud(path, cloud: ClassifiedPointCloud, with_classes: bool = True) -> None:
    """Write with 17 significant digits so reading back is bit-exact."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("# x y z" + (" class" if with_classes else "") + "\n")
        for p, c in zip(cloud.points.tolist(), cloud.classes.tolist()):
            row = f"{p[0]!r} {p[1]!r} {p[2]!r}"
            fh.write(f"{row} {c}\n" if with_classes else row + "\n")
