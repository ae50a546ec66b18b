import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wcdim.errors import ExpressionDomainError, ExpressionSyntaxError, UnboundVariable
from wcdim.expr import eval_expression, parse_expression, to_source


def ev(text, **b):
    return eval_expression(parse_expression(text), b)


def test_examples():
    assert ev("x1/3", x1=0.9) == pytest.approx(0.3, abs=1e-15)
    assert ev("min(0.9, t/(1+t))", t=1.0) == 0.5
    with pytest.raises(ExpressionDomainError):
        ev("sqrt(x1)", x1=-1.0)


@pytest.mark.parametrize(
    "text, value",
    [
        ("2^3^2", 512.0),
        ("-2^2", -4.0),
        ("(-2)^2", 4.0),
        ("1 - 2 - 3", -4.0),
        ("8 / 4 / 2", 1.0),
        ("2 * pi", 2 * math.pi),
        ("max(1, 5, 3)", 5.0),
        ("abs(-0.25) + exp(0) + log(1) + cos(0) + sin(0)", 2.25),
        ("1.5e-1 + .5", 0.65),
    ],
)
def test_precedence_and_functions(text, value):
    assert ev(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text", ["log(0)", "1/0", "sqrt(-4)", "exp(1000)"])
def test_domain_errors(text):
    with pytest.raises(ExpressionDomainError):
        ev(text)


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        ev("x1 + x2", x1=1.0)


@pytest.mark.parametrize("text", ["", "1 +", "(1", "sin(1", "foo(1)", "min(1)", "1 $ 2", "3 4"])
def test_syntax_errors(text):
    with pytest.raises(ExpressionSyntaxError):
        parse_expression(text)


def test_syntax_error_column():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression("1 + $")
    assert info.value.column == 5


def test_declared_variables_are_enforced():
    parse_expression("t / 2", {"t"})
    with pytest.raises(ExpressionSyntaxError):
        parse_expression("x1 / 2", {"t"})
    assert parse_expression("pi * t", {"t"}).variables == frozenset({"t"})


def test_vectorised_matches_scalar():
    e = parse_expression("min(0.9, 0.25 + t / 8) * cos(t)")
    ts = np.linspace(0.1, 3.0, 50)
    vec = eval_expression(e, {"t": ts})
    assert vec.shape == ts.shape
    for t, v in zip(ts, vec):
        assert eval_expression(e, {"t": float(t)}) == v


atoms = st.one_of(
    st.floats(0, 100, allow_nan=False).map(repr),
    st.sampled_from(["x1", "t", "pi"]),
)


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from("+-*/^"), children).map(lambda a: f"({a[0]} {a[1]} {a[2]})"),
        children.map(lambda c: f"-{c}"),
        st.tuples(st.sampled_from(["sin", "abs", "exp"]), children).map(lambda a: f"{a[0]}({a[1]})"),
        st.tuples(st.sampled_from(["min", "max"]), children, children).map(lambda a: f"{a[0]}({a[1]}, {a[2]})"),
    )


sources = st.recursive(atoms, _combine, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(sources)
def test_to_source_round_trips(text):
    e = parse_expression(text)
    again = parse_expression(to_source(e.tree))
    assert again == e
