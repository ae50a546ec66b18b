"""Metric domains, weak contractions and iterated function systems.

Points are plain numpy arrays of shape ``(d,)``; batches are ``(n, d)``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

from .coeff import CoefficientFunction, envelope
from .errors import DimensionMismatch, NoConvergence
from .expr import Expression, eval_expression

METRICS = ("euclidean", "chebyshev", "manhattan")


def _norm(v: np.ndarray, metric: str) -> np.ndarray:
    if metric == "euclidean":
        return np.sqrt(np.sum(v * v, axis=-1))
    if metric == "chebyshev":
        return np.max(np.abs(v), axis=-1)
    return np.sum(np.abs(v), axis=-1)


@dataclass(frozen=True)
class MetricDomain:
    """Bounding box with a metric; ``diameter_bound`` defaults to the box diameter.

    The bound only has to dominate the diameter of the attractor.
    """

    dimension: int
    metric: str
    lo: tuple
    hi: tuple
    diameter_bound: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if len(self.lo) != self.dimension or len(self.hi) != self.dimension:
            raise DimensionMismatch("box corners must have `dimension` coordinates")
        if any(not (a < b) for a, b in zip(self.lo, self.hi)):
            raise ValueError("box needs lo < hi in every coordinate")
        if not math.isfinite(self.box_diameter):
            raise ValueError("box diameter is not finite")
        if self.diameter_bound is None:
            object.__setattr__(self, "diameter_bound", self.box_diameter)
        elif not (self.diameter_bound > 0 and math.isfinite(self.diameter_bound)):
            raise ValueError("diameter bound must be positive")
        else:
            object.__setattr__(self, "diameter_bound", float(self.diameter_bound))

    @property
    def box_diameter(self) -> float:
        return float(_norm(np.subtract(self.hi, self.lo), self.metric))

    @property
    def lo_array(self) -> np.ndarray:
        return np.asarray(self.lo)

    @property
    def hi_array(self) -> np.ndarray:
        return np.asarray(self.hi)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo_array + self.hi_array)


def distance(dom: MetricDomain, a, b):
    """Distance under the domain metric; row-wise for ``(n, d)`` batches."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1:] != (dom.dimension,) or b.shape[-1:] != (dom.dimension,):
        raise DimensionMismatch(f"points must have {dom.dimension} coordinates")
    out = _norm(a - b, dom.metric)
    return float(out) if np.ndim(out) == 0 else out


# --- point maps -------------------------------------------------------------


class _LinearMap:
    """Shared evaluation for maps of the form ``x -> A x + b``."""

    @cached_property
    def _a(self) -> np.ndarray:
        return np.asarray(self.linear_part(), dtype=float)

    @cached_property
    def _b(self) -> np.ndarray:
        return np.asarray(self.translation, dtype=float)

    @property
    def dimension(self) -> int:
        return len(self.translation)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self._a.T + self._b

    def displacement(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        # f(x) - f(y) through the linear part only, avoiding cancellation
        return (np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) @ self._a.T


@dataclass(frozen=True)
class SimilarityMap(_LinearMap):
    """``x -> r R x + b`` with R a rotation by ``angle`` (planar only) or identity."""

    ratio: float
    translation: tuple
    angle: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "translation", tuple(float(v) for v in self.translation))
        if not (0.0 < self.ratio < 1.0):
            raise ValueError("similarity ratio must lie in (0, 1)")
        if self.angle != 0.0 and len(self.translation) != 2:
            raise ValueError("rotation angle is only supported in the plane")

    def linear_part(self) -> np.ndarray:
        d = len(self.translation)
        if d == 2:
            c, s = math.cos(self.angle), math.sin(self.angle)
            return self.ratio * np.array([[c, -s], [s, c]])
        return self.ratio * np.eye(d)


@dataclass(frozen=True)
class AffineMap(_LinearMap):
    matrix: tuple
    translation: tuple

    def __post_init__(self):
        object.__setattr__(self, "translation", tuple(float(v) for v in self.translation))
        object.__setattr__(self, "matrix", tuple(tuple(float(v) for v in row) for row in self.matrix))
        d = len(self.translation)
        if len(self.matrix) != d or any(len(row) != d for row in self.matrix):
            raise DimensionMismatch(f"affine matrix must be {d}x{d}")

    def linear_part(self) -> np.ndarray:
        return np.array(self.matrix)


@dataclass(frozen=True)
class ExpressionMap:
    """One expression per output coordinate, in variables ``x1..xd``."""

    components: tuple

    @property
    def dimension(self) -> int:
        return len(self.components)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        env = {f"x{i + 1}": x[..., i] for i in range(self.dimension)}
        cols = [np.broadcast_to(eval_expression(e, env), x.shape[:-1]) for e in self.components]
        return np.stack(cols, axis=-1).astype(float)

    def displacement(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self(x) - self(y)


PointMap = Union[SimilarityMap, AffineMap, ExpressionMap]


@dataclass(frozen=True)
class WeakContraction:
    map: PointMap
    coefficient: CoefficientFunction
    name: str = ""

    @property
    def dimension(self) -> int:
        return self.map.dimension


@dataclass(frozen=True)
class IFSystem:
    domain: MetricDomain
    maps: tuple

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        if len(self.maps) < 2:
            raise ValueError("an iterated function system needs at least two maps")
        for w in self.maps:
            if w.dimension != self.domain.dimension:
                raise DimensionMismatch(f"map {w.name!r} has dimension {w.dimension}")

    @property
    def m(self) -> int:
        return len(self.maps)

    def envelopes(self) -> list:
        return [envelope(w.coefficient) for w in self.maps]


def apply_map(w: WeakContraction, p) -> np.ndarray:
    """Image of a point (or batch of points) under the map of ``w``."""
    return w.map(np.asarray(p, dtype=float))


def fixed_point(
    w: WeakContraction,
    dom: MetricDomain,
    start=None,
    tol: float = 1e-12,
    max_iter: int = 100_000,
) -> np.ndarray:
    """Iterate ``p <- f(p)`` until successive iterates are within ``tol``.

    The limit is additionally probed for strict local contraction; a map that
    fails the probe (the identity, say) has no unique fixed point and is
    reported as :class:`NoConvergence`.
    """
    p = dom.center if start is None else np.asarray(start, dtype=float)
    if p.shape != (dom.dimension,):
        raise DimensionMismatch(f"start must have {dom.dimension} coordinates")
    for _ in range(max_iter):
        q = apply_map(w, p)
        step = distance(dom, p, q)
        p = q
        if step <= tol:
            break
    else:
        raise NoConvergence(max_iter)
    h = max(math.sqrt(tol), 1e-6) * dom.diameter_bound
    probes = p + h * np.concatenate([np.eye(dom.dimension), -np.eye(dom.dimension)])
    d_before = distance(dom, probes, p)
    d_after = _norm(w.map.displacement(probes, np.broadcast_to(p, probes.shape)), dom.metric)
    if np.any(d_after >= d_before):
        raise NoConvergence(max_iter, "map does not shrink distances near the limit point")
    return p


# --- validation ---------------------------------------------------------------


@dataclass
class ValidationReport:
    passed: bool
    worst_ratio: float
    n_pairs: int
    violations: list = field(default_factory=list)  # (x, y, lhs, rhs), at most 10

    def summary(self) -> dict:
        return {
            "pass": self.passed,
            "worst_ratio": self.worst_ratio,
            "n_pairs": self.n_pairs,
            "violations": [
                {"x": list(map(float, x)), "y": list(map(float, y)), "lhs": lhs, "rhs": rhs}
                for x, y, lhs, rhs in self.violations
            ],
        }


CHUNK = 8192
MAX_VIOLATIONS = 10


def _sample_pairs(rng: np.random.Generator, dom: MetricDomain, n: int):
    lo, hi = dom.lo_array, dom.hi_array
    x = rng.uniform(lo, hi, size=(n, dom.dimension))
    y = rng.uniform(lo, hi, size=(n, dom.dimension))
    n_small = n // 10
    if n_small:
        D = dom.diameter_bound
        r = np.exp(rng.uniform(math.log(1e-6 * D), math.log(0.1 * D), size=n_small))
        direction = rng.normal(size=(n_small, dom.dimension))
        direction /= _norm(direction, dom.metric)[:, None]
        y[:n_small] = np.clip(x[:n_small] + r[:, None] * direction, lo, hi)
    return x, y


def _check_chunk(w, env, dom, seed_seq, n, slack):
    rng = np.random.default_rng(seed_seq)
    x, y = _sample_pairs(rng, dom, n)
    d = _norm(x - y, dom.metric)
    keep = d > 0
    x, y, d = x[keep], y[keep], d[keep]
    lhs = _norm(w.map.displacement(x, y), dom.metric)
    rhs = np.asarray(env(d)) * d
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
    bad = np.flatnonzero(lhs > rhs + slack)
    return ratio.max(initial=0.0), [(x[i], y[i], float(lhs[i]), float(rhs[i])) for i in bad[:MAX_VIOLATIONS]], len(bad)


def validate_weak_contraction(
    w: WeakContraction,
    dom: MetricDomain,
    n_pairs: int = 10_000,
    seed: int = 0,
    slack: float | None = None,
    workers: int = 1,
) -> ValidationReport:
    """Check ``d(f x, f y) <= env(d(x, y)) d(x, y) + slack`` on random pairs.

    Passing is evidence, not proof.  Pairs are drawn uniformly in the box,
    except that a tenth are placed at log-uniform separations down to
    ``1e-6 * D``.  The pair budget is split into fixed-size chunks, each with
    its own substream spawned from ``seed``, so the outcome does not depend on
    ``workers``.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    if slack is None:
        slack = 1e-9 * dom.diameter_bound
    env = envelope(w.coefficient)
    sizes = [CHUNK] * (n_pairs // CHUNK) + ([n_pairs % CHUNK] if n_pairs % CHUNK else [])
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(streams, sizes))
    if workers == 0:
        workers = os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda job: _check_chunk(w, env, dom, job[0], job[1], slack), jobs))
    else:
        results = [_check_chunk(w, env, dom, s, n, slack) for s, n in jobs]
    worst = max(r[0] for r in results)
    violations = [v for r in results for v in r[1]][:MAX_VIOLATIONS]
    n_bad = sum(r[2] for r in results)
    return ValidationReport(n_bad == 0, float(worst), n_pairs, violations)
