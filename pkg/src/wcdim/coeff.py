"""Contraction-coefficient functions alpha(t) and their tail-infimum envelopes.

A coefficient function bounds how much a map may shrink a pair of points
closer than ``t``.  Only its tail infimum ``inf_{p > t} alpha(p)`` matters
for the dimension bound, so every coefficient kind reduces to an
:class:`EnvelopeFunction`, a right-continuous nondecreasing step function.

Piecewise convention: with breakpoints ``0 < t_1 < ... < t_k`` and values
``v_0..v_k``, ``v_0`` holds on ``(0, t_1)`` and ``v_i`` on ``[t_i, t_{i+1})``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import EvaluatesOutsideUnit, ExpressionDomainError, GridTooCoarse, InvalidCoefficient
from .expr import Expression, eval_expression

NEAR_ONE = 1e-12
DEFAULT_SAMPLES = 2048
DEFAULT_T_MIN = 1e-8


def _check_unit(values, what: str) -> None:
    arr = np.asarray(values, dtype=float)
    if arr.size and (np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr >= 1)):
        raise EvaluatesOutsideUnit(f"{what}: coefficient values must lie in [0, 1)")
    if arr.size and np.any(arr >= 1 - NEAR_ONE):
        warnings.warn(
            f"{what}: coefficient within {NEAR_ONE:g} of 1; cover depths will be huge",
            RuntimeWarning,
            stacklevel=3,
        )


@dataclass(frozen=True)
class CoefficientFunction:
    """alpha(t) for t > 0. Build with :meth:`constant`, :meth:`piecewise` or :meth:`expression`."""

    kind: str
    values: tuple = ()
    breakpoints: tuple = ()
    expr: Optional[Expression] = None
    t_min: float = DEFAULT_T_MIN
    t_max: float = 4.0
    samples: int = DEFAULT_SAMPLES

    def __post_init__(self):
        if self.kind == "constant":
            if len(self.values) != 1:
                raise InvalidCoefficient("constant coefficient needs exactly one value")
            _check_unit(self.values, "constant")
        elif self.kind == "piecewise":
            bp = np.asarray(self.breakpoints, dtype=float)
            if len(self.values) != len(bp) + 1:
                raise InvalidCoefficient("piecewise coefficient needs one more value than breakpoints")
            if bp.size and (bp[0] <= 0 or np.any(np.diff(bp) <= 0) or not np.all(np.isfinite(bp))):
                raise InvalidCoefficient("breakpoints must be positive and strictly increasing")
            _check_unit(self.values, "piecewise")
        elif self.kind == "expression":
            if self.expr is None:
                raise InvalidCoefficient("expression coefficient needs an expression")
            if not (0 < self.t_min < self.t_max) or self.samples < 2:
                raise InvalidCoefficient("bad sampling grid for expression coefficient")
        else:
            raise InvalidCoefficient(f"unknown coefficient kind {self.kind!r}")

    @classmethod
    def constant(cls, c: float) -> "CoefficientFunction":
        return cls("constant", values=(float(c),))

    @classmethod
    def piecewise(cls, breakpoints, values) -> "CoefficientFunction":
        return cls("piecewise", values=tuple(map(float, values)), breakpoints=tuple(map(float, breakpoints)))

    @classmethod
    def expression(
        cls,
        expr: Expression,
        t_max: float = 4.0,
        t_min: float = DEFAULT_T_MIN,
        samples: int = DEFAULT_SAMPLES,
    ) -> "CoefficientFunction":
        """Expression in ``t``, sampled on a geometric grid over ``[t_min, t_max]``.

        ``t_max`` should be a few times the domain diameter; envelopes are
        only ever consumed at arguments up to the diameter.
        """
        return cls("expression", expr=expr, t_min=float(t_min), t_max=float(t_max), samples=int(samples))

    def grid(self) -> np.ndarray:
        return np.geomspace(self.t_min, self.t_max, self.samples)

    def __call__(self, t):
        return eval_alpha(self, t)


def eval_alpha(f: CoefficientFunction, t):
    """alpha(t) for t > 0 (scalar or array)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("alpha is defined for t > 0 only")
    if f.kind == "constant":
        out = np.full(t_arr.shape, f.values[0])
    elif f.kind == "piecewise":
        idx = np.searchsorted(np.asarray(f.breakpoints), t_arr, side="right")
        out = np.asarray(f.values)[idx]
    else:
        try:
            out = np.broadcast_to(eval_expression(f.expr, {"t": t_arr}), t_arr.shape)
        except ExpressionDomainError as exc:
            raise EvaluatesOutsideUnit(f"alpha({f.expr}) cannot be evaluated: {exc}") from exc
        out = np.asarray(out, dtype=float)
        if np.any(out < 0) or np.any(out >= 1):
            raise EvaluatesOutsideUnit(f"alpha({f.expr}) leaves [0, 1)")
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EnvelopeFunction:
    """Right-continuous step function: ``values[i]`` holds on ``[knots[i], knots[i+1])``.

    ``knots[0] == 0`` and the last value extends to infinity.
    """

    knots: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def value_at_zero(self) -> float:
        return float(self.values[0])

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.knots, t_arr, side="right") - 1
        out = self.values[np.clip(idx, 0, None)]
        return float(out) if out.ndim == 0 else out

    def __eq__(self, other):
        if not isinstance(other, EnvelopeFunction):
            return NotImplemented
        return np.array_equal(self.knots, other.knots) and np.array_equal(self.values, other.values)

    __hash__ = None


def _suffix_min(a: np.ndarray) -> np.ndarray:
    return np.minimum.accumulate(a[::-1])[::-1]


def _local_minima(a: np.ndarray) -> np.ndarray:
    left = np.r_[np.inf, a[:-1]]
    right = np.r_[a[1:], np.inf]
    return np.flatnonzero((a <= left) & (a <= right) & ((a < left) | (a < right)))


def _refine(f: CoefficientFunction, grid: np.ndarray, vals: np.ndarray, per_gap: int):
    """Add ``per_gap`` samples in each gap adjacent to a local minimum."""
    extra = []
    for i in _local_minima(vals):
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        if hi > lo:
            extra.append(np.linspace(lo, hi, 2 * per_gap + 3)[1:-1])
    if not extra:
        return grid, vals
    new_t = np.setdiff1d(np.concatenate(extra), grid)
    merged = np.concatenate([grid, new_t])
    order = np.argsort(merged, kind="stable")
    merged_vals = np.concatenate([vals, np.asarray(eval_alpha(f, new_t), dtype=float)])
    return merged[order], merged_vals[order]


def _suffix_min_at(grid: np.ndarray, vals: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """min of the samples at or beyond each point of ``pts``."""
    sm = _suffix_min(vals)
    return sm[np.searchsorted(grid, pts, side="left")]


def _sampled_envelope(
    f: CoefficientFunction,
    per_gap: int = 8,
    max_passes: int = 8,
    tol: float = 1e-9,
    max_points: int = 1_000_000,
) -> EnvelopeFunction:
    base = f.grid()
    grid, vals = base, np.asarray(eval_alpha(f, base), dtype=float)
    current = _suffix_min_at(grid, vals, base)
    for _ in range(max_passes):
        grid, vals = _refine(f, grid, vals, per_gap)
        if len(grid) > max_points:
            raise GridTooCoarse(f"alpha({f.expr}): more than {max_points} samples needed to resolve minima")
        refined = _suffix_min_at(grid, vals, base)
        if np.max(current - refined) <= tol:
            break
        current = refined
    else:
        raise GridTooCoarse(
            f"alpha({f.expr}): suffix minima still moving after {max_passes} refinement passes"
        )
    sm = _suffix_min(vals)
    knots = np.concatenate([[0.0], grid])
    values = np.concatenate([sm, [vals[-1]]])
    return EnvelopeFunction(knots, values)


@lru_cache(maxsize=256)
def envelope(f: CoefficientFunction) -> EnvelopeFunction:
    """Tail infimum ``inf_{p > t} alpha(p)`` as a step function on ``[0, inf)``.

    Exact for constant and piecewise kinds.  For expressions it is the suffix
    minimum over the sample grid, refined around local minima until the
    suffix minima settle, which can only overestimate the true infimum.
    """
    if f.kind == "constant":
        return EnvelopeFunction(np.array([0.0]), np.array([f.values[0]]))
    if f.kind == "piecewise":
        knots = np.concatenate([[0.0], np.asarray(f.breakpoints, dtype=float)])
        return EnvelopeFunction(knots, _suffix_min(np.asarray(f.values, dtype=float)))
    return _sampled_envelope(f)


def global_infimum(f: CoefficientFunction) -> float:
    """``inf_{t > 0} alpha(t)``."""
    return envelope(f).value_at_zero
