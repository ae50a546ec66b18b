"""Approximations of the attractor S: chaos-game point clouds and grid cell sets."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .errors import DimensionMismatch, EmptySet, GridTooLarge, OutsideDomain
from .ifs import IFSystem, MetricDomain, _norm, fixed_point

MAX_CELLS = 10**8
_KD_P = {"euclidean": 2, "chebyshev": np.inf, "manhattan": 1}


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray  # (n, d)
    seed: Optional[int] = None
    n_points: int = 0
    burn_in: int = 0

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True, eq=False)
class CellSet:
    """Occupied cells of a lattice with spacing ``h`` anchored at ``origin``."""

    h: float
    origin: np.ndarray
    cells: np.ndarray  # (n, d) unique integer coordinates, lexicographically sorted
    iterations: int = 0
    converged: bool = False
    last_change: float = math.inf  # Hausdorff distance between the last two iterates

    @property
    def dimension(self) -> int:
        return self.cells.shape[1]

    def centers(self) -> np.ndarray:
        return self.origin + (self.cells + 0.5) * self.h

    def __len__(self) -> int:
        return len(self.cells)


def chaos_game(
    sys: IFSystem,
    n_points: int,
    seed: int = 0,
    burn_in: int = 100,
    weights: Optional[Sequence[float]] = None,
) -> PointCloud:
    """Random orbit started at the fixed point of the first map.

    The start point already lies in S, so ``burn_in`` is only a safety
    margin.  Map choices use numpy's PCG64 generator seeded with ``seed``.
    """
    if n_points < 1 or burn_in < 0:
        raise ValueError("need n_points >= 1 and burn_in >= 0")
    dom = sys.domain
    rng = np.random.default_rng(seed)
    total = burn_in + n_points
    choices = rng.choice(sys.m, size=total, p=None if weights is None else np.asarray(weights) / np.sum(weights))
    p = fixed_point(sys.maps[0], dom, tol=1e-15 * dom.diameter_bound)
    maps = [w.map for w in sys.maps]
    out = np.empty((n_points, dom.dimension))
    for k in range(total):
        if k >= burn_in:
            out[k - burn_in] = p
        p = maps[choices[k]](p)
    slack = 1e-6 * dom.diameter_bound
    if np.any(out < dom.lo_array - slack) or np.any(out > dom.hi_array + slack):
        raise OutsideDomain("chaos-game orbit leaves the domain box; the maps do not preserve it")
    return PointCloud(out, seed, n_points, burn_in)


def _grid_shape(dom: MetricDomain, h: float) -> np.ndarray:
    extent = (dom.hi_array - dom.lo_array) / h
    return np.maximum(np.ceil(extent - 1e-9), 1).astype(np.int64)


def _cells_of(points: np.ndarray, origin: np.ndarray, h: float, shape: np.ndarray) -> np.ndarray:
    idx = np.floor((points - origin) / h).astype(np.int64)
    idx = np.clip(idx, 0, shape - 1)
    return np.unique(idx, axis=0)


def iterate_sets(sys: IFSystem, h: float, max_iter: int = 50, stop_tol: float = 0.0) -> CellSet:
    """Set iteration ``S_{k+1} = U_j f_j(S_k)`` on a lattice of cell size ``h``.

    ``S_0`` is the whole box.  Each step maps cell centres only, so the result
    approximates the attractor without being a guaranteed superset of it.
    """
    if not h > 0:
        raise ValueError("resolution must be positive")
    dom = sys.domain
    shape = _grid_shape(dom, h)
    if float(np.prod(shape.astype(float))) > MAX_CELLS:
        raise GridTooLarge(f"{int(np.prod(shape))} cells exceed the limit of {MAX_CELLS}")
    origin = dom.lo_array
    cells = np.indices(tuple(shape)).reshape(dom.dimension, -1).T
    cells = np.unique(cells, axis=0)
    converged = False
    change = math.inf
    it = 0
    while it < max_iter:
        centers = origin + (cells + 0.5) * h
        images = np.concatenate([w.map(centers) for w in sys.maps])
        new = _cells_of(images, origin, h, shape)
        it += 1
        if np.array_equal(new, cells):
            change = 0.0
            cells = new
            converged = True
            break
        change = _hausdorff(origin + (new + 0.5) * h, centers, dom.metric)
        cells = new
        if change <= stop_tol:
            converged = True
            break
    return CellSet(h, origin, cells, it, converged, change)


def _diameter_bruteforce(pts: np.ndarray, metric: str, chunk: int = 2048) -> float:
    best = 0.0
    for i in range(0, len(pts), chunk):
        block = pts[i : i + chunk]
        d = _norm(block[:, None, :] - pts[None, i:, :], metric)
        best = max(best, float(d.max()))
    return best


def _diameter(pts: np.ndarray, metric: str, exact_limit: int = 20_000) -> tuple[float, bool]:
    """Return ``(diameter, exact)``."""
    n, d = pts.shape
    if n <= 1:
        return 0.0, True
    if metric == "chebyshev":
        return float(np.max(pts.max(axis=0) - pts.min(axis=0))), True
    if metric == "manhattan" or d == 1:
        # max over sign patterns s of (max s.x - min s.x)
        best = 0.0
        for signs in itertools.product((1.0, -1.0), repeat=d - 1):
            proj = pts @ np.array((1.0,) + signs)
            best = max(best, float(proj.max() - proj.min()))
        return best, True
    if d <= 3:
        try:
            hull = pts[ConvexHull(pts).vertices]
        except QhullError:  # degenerate (e.g. collinear) clouds
            hull = pts
        if len(hull) <= exact_limit:
            return _diameter_bruteforce(hull, metric), True
    if n <= exact_limit:
        return _diameter_bruteforce(pts, metric), True
    # farthest-pair refinement from a deterministic subsample
    sub = pts[np.linspace(0, n - 1, exact_limit).astype(int)]
    a = sub[0]
    best = 0.0
    for _ in range(8):
        dist = _norm(pts - a, metric)
        j = int(np.argmax(dist))
        if dist[j] <= best:
            break
        best, a = float(dist[j]), pts[j]
    return max(best, _diameter_bruteforce(sub, metric)), False


def diameter_estimate(cloud: Union[PointCloud, np.ndarray], dom: MetricDomain, return_exact: bool = False):
    """Largest pairwise distance in the cloud, capped at the box diameter.

    Exact in all practical cases (via coordinate extremes or the convex hull);
    ``return_exact=True`` also returns whether the value is exact.
    """
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise EmptySet("cannot take the diameter of an empty cloud")
    value, exact = _diameter(pts, dom.metric)
    value = min(value, dom.box_diameter)
    return (value, exact) if return_exact else value


def _hausdorff(a: np.ndarray, b: np.ndarray, metric: str) -> float:
    p = _KD_P[metric]
    d_ab = cKDTree(b).query(a, p=p)[0].max()
    d_ba = cKDTree(a).query(b, p=p)[0].max()
    return float(max(d_ab, d_ba))


def _as_points(s) -> np.ndarray:
    if isinstance(s, PointCloud):
        return s.points
    if isinstance(s, CellSet):
        return s.centers()
    return np.atleast_2d(np.asarray(s, dtype=float))


def hausdorff_distance(a, b, dom: MetricDomain) -> float:
    """Exact Hausdorff distance between two finite sets (cell sets use centres)."""
    pa, pb = _as_points(a), _as_points(b)
    if pa.size == 0 or pb.size == 0:
        raise EmptySet("Hausdorff distance needs two nonempty sets")
    if pa.shape[1] != pb.shape[1] or pa.shape[1] != dom.dimension:
        raise DimensionMismatch("sets live in different dimensions")
    return _hausdorff(pa, pb, dom.metric)


def image_union(sys: IFSystem, pts: np.ndarray) -> np.ndarray:
    """``U_j f_j(pts)`` as one point array."""
    return np.concatenate([w.map(pts) for w in sys.maps])
