"""Reduce planar point clouds to one-dimensional observables.

Two reductions are provided: the area of the convex hull and the set of
pairwise Euclidean distances.  The outlier estimators from
:mod:`tailscope.estimators` then apply to either observable.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist

from .distributions import DistributionModel
from .errors import DegenerateSampleError, ParameterDomainError
from .estimators import EstimateWithCI, OrderedAbsSample, first_kind_rate, max_ratio_event
from .rng import replicate_generator

__all__ = [
    "PointCloud2D",
    "HullArea",
    "convex_hull",
    "convex_hull_area",
    "brute_force_hull_area",
    "pairwise_distances",
    "hull_area_outlier_mc",
    "read_point_cloud_csv",
]

ORIENTATION_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class PointCloud2D:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or (pts.size and pts.shape[1] != 2):
            raise ParameterDomainError(f"points must have shape (n, 2), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ParameterDomainError("point coordinates must be finite")
        object.__setattr__(self, "points", pts.reshape(-1, 2))

    @property
    def n(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class HullArea:
    area: float
    degenerate: bool = False

    def __float__(self) -> float:
        return self.area


def _cloud(cloud) -> np.ndarray:
    if isinstance(cloud, PointCloud2D):
        return cloud.points
    return PointCloud2D(cloud).points


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(cloud) -> np.ndarray:
    """Hull vertices in counter-clockwise order (Andrew's monotone chain).

    Points whose turn has ``|cross| <= ORIENTATION_EPS`` are treated as
    collinear and dropped.
    """
    pts = _cloud(cloud)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    ordered = [tuple(p) for p in pts[order]]
    if len(ordered) < 3:
        return np.array(ordered, dtype=float).reshape(-1, 2)

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= ORIENTATION_EPS:
                out.pop()
            out.append(p)
        return out

    lower = chain(ordered)
    upper = chain(reversed(ordered))
    return np.array(lower[:-1] + upper[:-1], dtype=float).reshape(-1, 2)


def _shoelace(vertices: np.ndarray) -> float:
    if len(vertices) < 3:
        return 0.0
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * abs(math.fsum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def convex_hull_area(cloud) -> HullArea:
    """Area of the convex hull; fewer than 3 points or a collinear cloud is flagged degenerate."""
    pts = _cloud(cloud)
    if len(pts) < 3:
        return HullArea(0.0, True)
    hull = convex_hull(pts)
    if len(hull) < 3:
        return HullArea(0.0, True)
    return HullArea(_shoelace(hull))


def brute_force_hull_area(cloud) -> float:
    """Hull area from every directed pair that has all other points on its left.

    O(n^3); intended as an independent check for small clouds.  A point lying
    on the segment between the pair's endpoints does not disqualify the pair,
    while sub-segments of a longer collinear edge are rejected, so each hull
    edge is counted once.
    """
    pts = [tuple(p) for p in _cloud(cloud)]
    pts = list(dict.fromkeys(pts))
    n = len(pts)
    twice_area = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            a, b = pts[i], pts[j]
            ok = True
            for m in range(n):
                if m in (i, j):
                    continue
                c = _cross(a, b, pts[m])
                if c < 0.0:
                    ok = False
                    break
                if c == 0.0:
                    # collinear: must lie within the closed segment [a, b]
                    t = (pts[m][0] - a[0]) * (b[0] - a[0]) + (pts[m][1] - a[1]) * (b[1] - a[1])
                    length2 = (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
                    if t < 0.0 or t > length2:
                        ok = False
                        break
            if ok:
                twice_area.append(a[0] * b[1] - b[0] * a[1])
    return 0.5 * abs(math.fsum(twice_area)) if n >= 3 else 0.0


def pairwise_distances(cloud) -> np.ndarray:
    """All ``n(n-1)/2`` unordered-pair Euclidean distances."""
    pts = _cloud(cloud)
    if len(pts) < 2:
        raise ParameterDomainError("pairwise_distances needs at least two points")
    return pdist(pts)


def read_point_cloud_csv(source) -> PointCloud2D:
    """Read a two-column CSV of ``x, y`` rows; a non-numeric first row is taken as a header."""
    if isinstance(source, (str, Path)) and Path(source).exists():
        text = Path(source).read_text()
    elif hasattr(source, "read"):
        text = source.read()
    else:
        raise ParameterDomainError(f"cannot read point cloud from {source!r}")
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    points = []
    for i, row in enumerate(rows):
        if len(row) < 2:
            raise ParameterDomainError(f"row {i + 1}: expected two columns, got {row!r}")
        try:
            points.append((float(row[0]), float(row[1])))
        except ValueError:
            if i == 0:
                continue
            raise ParameterDomainError(f"row {i + 1}: non-numeric value in {row!r}") from None
    return PointCloud2D(np.array(points, dtype=float).reshape(-1, 2))


def _replicate_areas(model_x, model_y, n, replicates, seed):
    areas = np.empty(replicates)
    degenerate = 0
    for r in range(replicates):
        rng = replicate_generator(seed, r)
        xs = model_x.draw(rng, n)
        ys = model_y.draw(rng, n)
        hull = convex_hull_area(np.column_stack([xs, ys]))
        areas[r] = hull.area
        degenerate += hull.degenerate
    return areas, degenerate


def hull_area_outlier_mc(
    model_x: DistributionModel,
    model_y: DistributionModel | None,
    n: int,
    param: float,
    mode: str,
    replicates: int,
    seed: int,
    group_size: int = 10,
) -> EstimateWithCI:
    """Apply a one-dimensional outlier notion to simulated hull areas.

    Each replicate draws ``n`` points with independent coordinates
    ``x ~ model_x``, ``y ~ model_y`` (``model_y`` defaults to ``model_x``) and
    records the hull area.

    ``mode="first-kind"``: fraction of replicate areas farther than
    ``param`` empirical standard deviations from the mean area.
    ``mode="order-kappa"``: the areas are cut into consecutive groups of
    ``group_size``; the estimate is the fraction of groups whose largest area is
    an outlier of order ``1/param``.
    """
    if int(n) != n or n < 3:
        raise ParameterDomainError(f"hull areas need n >= 3 points, got {n!r}")
    if int(replicates) != replicates or replicates < 1:
        raise ParameterDomainError(f"replicates must be a positive integer, got {replicates!r}")
    model_y = model_x if model_y is None else model_y
    areas, degenerate = _replicate_areas(model_x, model_y, int(n), int(replicates), seed)
    if mode == "first-kind":
        try:
            rate = first_kind_rate(areas, param)
        except DegenerateSampleError:
            rate = 0.0
        count = round(rate * len(areas))
        return EstimateWithCI.from_counts(count, len(areas), degenerate)
    if mode == "order-kappa":
        if not 0.0 < param <= 1.0:
            raise ParameterDomainError(f"kappa must lie in (0, 1], got {param!r}")
        if group_size < 2:
            raise ParameterDomainError("group_size must be at least 2")
        groups = len(areas) // group_size
        if groups < 1:
            raise ParameterDomainError(f"need at least {group_size} replicates for one group")
        hits = sum(
            max_ratio_event(OrderedAbsSample.from_sample(areas[g * group_size:(g + 1) * group_size]), param)
            for g in range(groups)
        )
        return EstimateWithCI.from_counts(hits, groups, degenerate)
    raise ParameterDomainError(f"mode must be 'first-kind' or 'order-kappa', got {mode!r}")
