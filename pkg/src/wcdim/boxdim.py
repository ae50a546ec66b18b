"""Box-counting dimension of point clouds.

The grid is anchored at the domain box corner, not at the data minimum, so
counts are reproducible across clouds of the same scene.  Points on the upper
box face fall into the last cell.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .attractor import PointCloud
from .errors import DegenerateFit, EmptySet, ScaleTooSmall
from .ifs import MetricDomain

# points within this fraction of a cell below a grid line are snapped onto it
SNAP = 1e-9


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    r2: float
    window_lo: int
    window_hi: int  # inclusive


@dataclass(frozen=True)
class BoxCountSeries:
    scales: tuple
    counts: tuple
    fit: Optional[Fit] = None


def default_scales(D: float, ratio: float = 0.5, k_min: int = 2, k_max: int = 9) -> list[float]:
    return [D * ratio**k for k in range(k_min, k_max + 1)]


def box_counts(cloud, dom: MetricDomain, scales: Sequence[float]) -> BoxCountSeries:
    pts = cloud.points if isinstance(cloud, PointCloud) else np.atleast_2d(np.asarray(cloud, dtype=float))
    if pts.size == 0:
        raise EmptySet("box counting needs at least one point")
    scales = [float(s) for s in scales]
    if not scales or any(s <= 0 for s in scales) or any(b >= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be positive and strictly decreasing")
    if scales[-1] < 1e-12 * dom.diameter_bound:
        raise ScaleTooSmall(f"scale {scales[-1]} is below 1e-12 * D")
    lo = dom.lo_array
    extent = dom.hi_array - lo
    counts = []
    for eps in scales:
        n_cells = np.maximum(np.ceil(extent / eps - SNAP), 1).astype(np.int64)
        idx = np.floor((pts - lo) / eps + SNAP).astype(np.int64)
        idx = np.clip(idx, 0, n_cells - 1)
        counts.append(int(len(np.unique(idx, axis=0))))
    return BoxCountSeries(tuple(scales), tuple(counts))


def fit_dimension(series: BoxCountSeries, window: Optional[tuple[int, int]] = None) -> BoxCountSeries:
    """Least-squares slope of log N against log(1/eps).

    ``window`` is an inclusive index range; by default the largest and the
    smallest scale are dropped.
    """
    k = len(series.scales)
    lo, hi = window if window is not None else (1, k - 2)
    if lo < 0 or hi >= k or hi - lo + 1 < 3:
        raise ValueError(f"window [{lo}, {hi}] needs at least three of the {k} scales")
    x = -np.log(np.asarray(series.scales[lo : hi + 1]))
    y = np.log(np.asarray(series.counts[lo : hi + 1], dtype=float))
    if np.all(y == y[0]):
        raise DegenerateFit("all counts in the window are equal")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot
    return replace(series, fit=Fit(float(slope), float(intercept), r2, lo, hi))
