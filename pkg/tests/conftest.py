import math
from pathlib import Path

import numpy as np
import pytest

from wcdim.coeff import CoefficientFunction, envelope
from wcdim.ifs import IFSystem, MetricDomain, SimilarityMap, WeakContraction

SCENES = Path(__file__).resolve().parent.parent / "scenes"
THIRD = 1 / 3


def similarity_system(dom, specs):
    """specs: iterable of (ratio, translation, coefficient)."""
    maps = [
        WeakContraction(SimilarityMap(r, tuple(b)), c, f"f{j + 1}")
        for j, (r, b, c) in enumerate(specs)
    ]
    return IFSystem(dom, maps)


@pytest.fixture
def line():
    return MetricDomain(1, "euclidean", (0.0,), (1.0,))


@pytest.fixture
def cantor(line):
    c = CoefficientFunction.constant(THIRD)
    return similarity_system(line, [(THIRD, (0.0,), c), (THIRD, (2 / 3,), c)])


@pytest.fixture
def sierpinski():
    dom = MetricDomain(2, "euclidean", (0.0, 0.0), (1.0, 1.0))
    c = CoefficientFunction.constant(0.5)
    return similarity_system(dom, [(0.5, (0, 0), c), (0.5, (0.5, 0), c), (0.5, (0, 0.5), c)])


@pytest.fixture
def step_up():
    """0.25 on (0, 1), 0.5 on [1, inf)."""
    return CoefficientFunction.piecewise([1.0], [0.25, 0.5])


def random_piecewise(rng, max_breaks=8):
    k = int(rng.integers(0, max_breaks + 1))
    bps = np.sort(rng.uniform(1e-3, 10.0, size=k))
    bps = np.unique(bps)
    vals = rng.uniform(0.0, 0.95, size=len(bps) + 1)
    return CoefficientFunction.piecewise(bps.tolist(), vals.tolist())


def grid_infimum(f, t, upper=100.0, step=1e-3):
    """Independent oracle: min of alpha over a fine grid of p in (t, upper]."""
    start = math.floor(t / step) * step + step
    if start <= t:
        start += step
    p = np.arange(start, upper + step / 2, step)
    p = p[p > t]
    return float(np.min(f(p)))
