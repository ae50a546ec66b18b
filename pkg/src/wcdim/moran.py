"""Root of the generalised Moran equation ``sum_j c_j**x = 1``.

Conventions: ``0**x`` is 0 for every ``x >= 0`` (so zero coefficients never
contribute), and the root is 0 when every coefficient is 0.  With a single
nonzero coefficient the unique root is 0 as well, since ``c**x == 1`` with
``0 < c < 1`` forces ``x == 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coeff import EnvelopeFunction
from .errors import InvalidCoefficient

DEFAULT_TOL = 1e-12
ZERO_THRESHOLD = 1e-15


@dataclass(frozen=True)
class MoranProblem:
    coefficients: tuple
    tolerance: float = DEFAULT_TOL
    zero_threshold: float = ZERO_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if len(self.coefficients) < 2:
            raise InvalidCoefficient("need at least two coefficients")
        for c in self.coefficients:
            if not (0.0 <= c < 1.0):
                raise InvalidCoefficient(f"coefficient {c!r} outside [0, 1)")
        if not self.tolerance > 0:
            raise InvalidCoefficient("tolerance must be positive")

    def active(self) -> list[float]:
        """Coefficients in the active set (strictly positive after thresholding)."""
        return [c for c in self.coefficients if c > self.zero_threshold]


@dataclass(frozen=True)
class DimensionCurve:
    samples: tuple  # ((t, x), ...) with t strictly increasing
    x_at_zero: float

    @property
    def t(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def x(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])


def moran_sum(coeffs: Sequence[float], x: float) -> float:
    return math.fsum(c**x for c in coeffs if c > 0)


def _resolution(tol: float) -> float:
    # power of two far below tol: |g'| <= max|ln c| < 745 at the root, so the
    # residual stays under tol, and a fixed dyadic resolution keeps the
    # returned root monotone in the coefficients
    return 2.0 ** math.floor(math.log2(tol / 1024.0))


def bisect_root(coeffs: Sequence[float], lo: float, hi: float, tol: float = DEFAULT_TOL) -> float:
    """Bisect ``sum c**x - 1`` on a bracket with ``g(lo) >= 1 >= g(hi)``."""
    g_lo, g_hi = moran_sum(coeffs, lo), moran_sum(coeffs, hi)
    if g_lo < 1.0 or g_hi > 1.0:
        raise ValueError(f"[{lo}, {hi}] does not bracket the root")
    if g_lo == 1.0:
        return lo
    if g_hi == 1.0:
        return hi
    width = _resolution(tol)
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g = moran_sum(coeffs, mid)
        if g == 1.0:
            return mid
        if g > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_moran(p: MoranProblem | Sequence[float], tol: float | None = None) -> float:
    """x0 >= 0 with ``sum_{c_j > 0} c_j**x0 = 1``; 0 when no coefficient is positive."""
    if not isinstance(p, MoranProblem):
        p = MoranProblem(tuple(p), **({"tolerance": tol} if tol is not None else {}))
    active = p.active()
    if len(active) <= 1:
        return 0.0
    hi = 1.0
    while moran_sum(active, hi) > 1.0:
        hi *= 2.0
    return bisect_root(active, 0.0, hi, p.tolerance)


def x_curve(envelopes: Sequence[EnvelopeFunction], t_grid, tol: float = DEFAULT_TOL) -> DimensionCurve:
    """Solve ``sum_j env_j(t)**x(t) = 1`` at each grid point."""
    if len(envelopes) < 2:
        raise InvalidCoefficient("need at least two envelopes")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ValueError("empty t grid")
    if np.any(t_grid < 0) or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t grid must be nonnegative and strictly increasing")
    table = np.array([np.atleast_1d(env(t_grid)) for env in envelopes])
    xs = [solve_moran(MoranProblem(tuple(table[:, i]), tol)) for i in range(t_grid.size)]
    x0 = solve_moran(MoranProblem(tuple(env.value_at_zero for env in envelopes), tol))
    return DimensionCurve(tuple(zip(t_grid.tolist(), xs)), x0)
