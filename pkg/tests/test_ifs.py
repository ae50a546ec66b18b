import math

import numpy as np
import pytest

from wcdim.coeff import CoefficientFunction
from wcdim.errors import DimensionMismatch, NoConvergence
from wcdim.expr import parse_expression
from wcdim.ifs import (
    AffineMap,
    ExpressionMap,
    IFSystem,
    MetricDomain,
    SimilarityMap,
    WeakContraction,
    apply_map,
    distance,
    fixed_point,
    validate_weak_contraction,
)

HALF = CoefficientFunction.constant(0.5)


def plane(metric):
    return MetricDomain(2, metric, (0, 0), (3, 4))


def test_distances():
    assert distance(plane("euclidean"), (0, 0), (3, 4)) == 5.0
    assert distance(plane("chebyshev"), (0, 0), (3, 4)) == 4.0
    assert distance(plane("manhattan"), (0, 0), (3, 4)) == 7.0
    for metric in ("euclidean", "chebyshev", "manhattan"):
        assert distance(plane(metric), (1.5, 2), (1.5, 2)) == 0.0


def test_distance_rowwise_and_shape_check():
    dom = plane("euclidean")
    d = distance(dom, np.zeros((3, 2)), np.array([[3, 4], [0, 1], [1, 0]]))
    np.testing.assert_array_equal(d, [5, 1, 1])
    with pytest.raises(DimensionMismatch):
        distance(dom, (0,), (1,))


def test_domain_defaults_and_validation():
    dom = plane("euclidean")
    assert dom.diameter_bound == 5.0
    assert MetricDomain(1, "euclidean", (0,), (1,), diameter_bound=0.5).diameter_bound == 0.5
    with pytest.raises(ValueError):
        MetricDomain(1, "euclidean", (1,), (0,))
    with pytest.raises(ValueError):
        MetricDomain(1, "taxicab", (0,), (1,))
    with pytest.raises(DimensionMismatch):
        MetricDomain(2, "euclidean", (0,), (1,))


def test_apply_map_examples():
    third = WeakContraction(SimilarityMap(1 / 3, (0.0,)), CoefficientFunction.constant(1 / 3))
    assert apply_map(third, [0.9])[0] == pytest.approx(0.3, abs=1e-16)
    right = WeakContraction(SimilarityMap(1 / 3, (2 / 3,)), CoefficientFunction.constant(1 / 3))
    assert apply_map(right, [0.0])[0] == 2 / 3
    ident = WeakContraction(AffineMap(((1, 0), (0, 1)), (0, 0)), HALF)
    p = np.array([0.3, -1.7])
    np.testing.assert_array_equal(apply_map(ident, p), p)


def test_similarity_rotation():
    m = SimilarityMap(0.5, (0.0, 0.0), angle=math.pi / 2)
    np.testing.assert_allclose(m(np.array([1.0, 0.0])), [0.0, 0.5], atol=1e-16)
    with pytest.raises(ValueError):
        SimilarityMap(0.5, (0.0,), angle=0.1)
    with pytest.raises(ValueError):
        SimilarityMap(1.0, (0.0,))


def test_expression_map_batches():
    m = ExpressionMap((parse_expression("x1 / 2 + x2"), parse_expression("x2 / 3")))
    pts = np.array([[1.0, 3.0], [0.0, 0.0]])
    np.testing.assert_allclose(m(pts), [[3.5, 1.0], [0.0, 0.0]])


def test_fixed_points():
    dom = MetricDomain(1, "euclidean", (0,), (4,))
    w = WeakContraction(ExpressionMap((parse_expression("x1 / 2 + 1"),)), HALF)
    assert fixed_point(w, dom, start=[0.0], tol=1e-10)[0] == pytest.approx(2.0, abs=1e-10)
    unit = MetricDomain(1, "euclidean", (0,), (1,))
    w = WeakContraction(SimilarityMap(1 / 3, (0.0,)), CoefficientFunction.constant(1 / 3))
    assert abs(fixed_point(w, unit, start=[1.0], tol=1e-12)[0]) <= 1e-12


def test_identity_has_no_fixed_point():
    dom = MetricDomain(2, "euclidean", (0, 0), (1, 1))
    w = WeakContraction(AffineMap(((1, 0), (0, 1)), (0, 0)), HALF)
    with pytest.raises(NoConvergence):
        fixed_point(w, dom, start=[0.2, 0.7])


def test_system_needs_two_maps(line):
    w = WeakContraction(SimilarityMap(0.5, (0.0,)), HALF)
    with pytest.raises(ValueError):
        IFSystem(line, [w])
    with pytest.raises(DimensionMismatch):
        IFSystem(line, [w, WeakContraction(SimilarityMap(0.5, (0.0, 0.0)), HALF)])


def halving(alpha):
    return WeakContraction(SimilarityMap(0.5, (0.0,)), alpha, "half")


@pytest.mark.parametrize("seed", [0, 1, 12345])
def test_validator_discriminates(line, seed):
    ok = validate_weak_contraction(halving(HALF), line, n_pairs=10_000, seed=seed)
    assert ok.passed and ok.worst_ratio <= 1 + 1e-12
    bad = validate_weak_contraction(halving(CoefficientFunction.constant(0.4)), line, n_pairs=10_000, seed=seed)
    assert not bad.passed and len(bad.violations) >= 1
    x, y, lhs, rhs = bad.violations[0]
    assert lhs == pytest.approx(0.5 * abs(x[0] - y[0]))
    assert rhs == pytest.approx(0.4 * abs(x[0] - y[0]))


def test_validator_uses_the_envelope(line):
    alpha = CoefficientFunction.piecewise([1.0], [0.25, 1 / 3])
    w = WeakContraction(SimilarityMap(1 / 3, (0.0,)), alpha)
    rep = validate_weak_contraction(w, line, n_pairs=2000)
    assert not rep.passed
    assert rep.worst_ratio == pytest.approx(4 / 3)


def test_validator_independent_of_workers(line):
    w = halving(CoefficientFunction.constant(0.45))
    a = validate_weak_contraction(w, line, n_pairs=30_000, seed=3, workers=1)
    b = validate_weak_contraction(w, line, n_pairs=30_000, seed=3, workers=4)
    assert a.summary() == b.summary()


def test_validator_report_summary_is_plain(line):
    s = validate_weak_contraction(halving(CoefficientFunction.constant(0.4)), line, n_pairs=100).summary()
    assert set(s) == {"pass", "worst_ratio", "n_pairs", "violations"}
    assert len(s["violations"]) <= 10
    assert all(isinstance(v, float) for v in s["violations"][0]["x"])
