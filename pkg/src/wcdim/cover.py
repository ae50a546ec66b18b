"""Word covers of the attractor and the diameter bounds behind the dimension estimate.

For a word ``w = j_1 ... j_n`` the piece ``S_w = f_{j_1} o ... o f_{j_n}(S)``
has diameter at most ``B(w)``, defined by ``B(empty) = D`` and
``B(j w) = env_j(B(w)) * B(w)``.  Levels are kept as a multiset of
``(value, multiplicity)`` pairs; values are merged when they agree to 12
significant digits, keeping the larger one so every entry stays an upper bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coeff import EnvelopeFunction
from .errors import DegenerateK, DepthTooShallow, TooManyWords
from .moran import MoranProblem, solve_moran

WORD_LIMIT = 10**7
SIG_DIGITS = 12


@dataclass(frozen=True, eq=False)
class WordBoundLevel:
    depth: int
    m: int
    values: np.ndarray  # distinct upper bounds B(w)
    multiplicities: np.ndarray  # number of words sharing each value

    @property
    def word_count(self) -> int:
        return int(self.multiplicities.sum())

    @property
    def max_bound(self) -> float:
        return float(self.values.max())

    def as_dict(self) -> dict:
        return {float(v): int(k) for v, k in zip(self.values, self.multiplicities)}


def compute_K(envelopes: Sequence[EnvelopeFunction], D: float) -> float:
    """Uniform per-level decay factor ``max_j env_j(D)``."""
    if len(envelopes) < 2:
        raise ValueError("need at least two envelopes")
    if not D > 0:
        raise ValueError("D must be positive")
    K = max(env(D) for env in envelopes)
    if K >= 1:
        raise DegenerateK(f"K = {K} >= 1")
    return float(K)


def _dedup(values: np.ndarray, mult: np.ndarray):
    safe = np.where(values > 0, values, 1.0)
    scale = 10.0 ** (SIG_DIGITS - 1 - np.floor(np.log10(safe)))
    keys = np.where(values > 0, np.round(values * scale) / scale, 0.0)
    uniq, inverse = np.unique(keys, return_inverse=True)
    rep = np.zeros(len(uniq))
    np.maximum.at(rep, inverse, values)
    counts = np.bincount(inverse, weights=mult, minlength=len(uniq)).astype(np.int64)
    return rep, counts


def _next_level(envelopes, values, mult):
    new_vals = np.concatenate([np.asarray(env(values)) * values for env in envelopes])
    new_mult = np.tile(mult, len(envelopes))
    return _dedup(new_vals, new_mult)


def iter_levels(envelopes: Sequence[EnvelopeFunction], D: float, word_limit: int = WORD_LIMIT):
    """Yield levels 1, 2, ... until ``m**n`` would exceed ``word_limit``."""
    m = len(envelopes)
    values, mult = np.array([float(D)]), np.array([1], dtype=np.int64)
    n = 0
    while True:
        n += 1
        if m**n > word_limit:
            raise TooManyWords(f"level {n} has {m}**{n} words, above the limit {word_limit}")
        values, mult = _next_level(envelopes, values, mult)
        yield WordBoundLevel(n, m, values, mult)


def word_bounds(
    envelopes: Sequence[EnvelopeFunction], D: float, depth: int, word_limit: int = WORD_LIMIT
) -> WordBoundLevel:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    m = len(envelopes)
    if m**depth > word_limit:
        raise TooManyWords(f"{m}**{depth} words exceed the limit {word_limit}")
    for level in iter_levels(envelopes, D, word_limit):
        if level.depth == depth:
            return level


def word_bound(envelopes: Sequence[EnvelopeFunction], D: float, word: Sequence[int]) -> float:
    """B(w) for a single word of 0-based map indices, applied right to left."""
    b = float(D)
    for j in reversed(word):
        b = envelopes[j](b) * b
    return b


def premeasure_sum(level: WordBoundLevel, p: float) -> float:
    """``sum_w B(w)**p`` with ``0**p = 0``.

    Once ``max B(w) <= eps`` this upper-bounds the ``eps``-cover pre-measure.
    """
    nz = level.values > 0
    return math.fsum((level.multiplicities[nz] * level.values[nz] ** p).tolist())


def depth_for_epsilon(
    envelopes: Sequence[EnvelopeFunction], D: float, eps: float, word_limit: int = WORD_LIMIT
) -> int:
    """Smallest n >= 1 with every B(w) at level n at most ``eps``."""
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    for level in iter_levels(envelopes, D, word_limit):
        if level.max_bound <= eps:
            return level.depth


@dataclass(frozen=True)
class BoundCheck:
    t: float
    depth: int
    p: int
    x_t: float
    K: float
    lhs: float  # sum_w B(w)**x(t)
    grouped: float  # same sum after bounding the first n-p-1 factors by env(t), the rest by K
    rhs: float  # m**(p+1) * (K**(p+1) * D)**x(t)
    rhs_literal: float  # (K**(p+1) * D)**x(t), without the multiplicity of the last p+1 letters
    holds: bool


def _pow0(base: float, x: float) -> float:
    return 0.0 if base == 0 else base**x


def proof_bound_check(
    envelopes: Sequence[EnvelopeFunction], D: float, t: float, n: int, rtol: float = 1e-9
) -> BoundCheck:
    """Compare the level-n cover sum at exponent x(t) with its n-independent bound.

    ``p`` is the first depth whose word bounds are all ``<= t``.  Every factor
    of ``B(w)`` whose argument comes from a suffix of length ``> p`` is then
    at most ``env_j(t)``; the remaining ``p + 1`` factors are at most ``K``.
    Summing over words, the first ``n - p - 1`` letters contribute
    ``(sum_j env_j(t)**x)**(n-p-1) = 1`` and the last ``p + 1`` letters are
    free, which contributes ``m**(p+1)``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    m = len(envelopes)
    p = depth_for_epsilon(envelopes, D, t)
    if n < p + 2:
        raise DepthTooShallow(f"depth {n} < p + 2 = {p + 2}")
    K = compute_K(envelopes, D)
    at_t = [env(t) for env in envelopes]
    x_t = solve_moran(MoranProblem(tuple(at_t)))
    lhs = premeasure_sum(word_bounds(envelopes, D, n), x_t)
    tail = _pow0(K ** (p + 1) * D, x_t)
    head = math.fsum(_pow0(a, x_t) for a in at_t)
    grouped = m ** (p + 1) * tail * head ** (n - p - 1)
    rhs = m ** (p + 1) * tail
    holds = lhs <= grouped * (1 + rtol) and grouped <= rhs * (1 + rtol)
    return BoundCheck(t, n, p, x_t, K, lhs, grouped, rhs, tail, holds)
