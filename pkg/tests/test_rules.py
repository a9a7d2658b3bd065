import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadkernel.expr import DomainError, parse
from quadkernel.harness import builtin_corpus, residual_check
from quadkernel.rules import (RULES, QuadratureEstimate, corrected_trapezoid,
                              first_order_trapezoid_bound, midpoint, simple_rule, simpson, trapezoid)

E = math.e


@pytest.mark.parametrize("fn, f, norm, value, bound", [
    (midpoint, "x^2", 2, 0.25, 1 / 12),
    (trapezoid, "x^2", 2, 0.5, 1 / 6),
    (trapezoid, "exp(x)", E, (1 + E) / 2, E / 12),
    (corrected_trapezoid, "x^2", 2, 0.3125, 1 / 16),
    (simpson, "x^4", 24, 5 / 24, 1 / 120),
    (simpson, "x^3", 0, 0.25, 0.0),
    (simpson, "x^2", 0, 1 / 3, 0.0),
])
def test_examples_unit_interval(fn, f, norm, value, bound):
    est = fn(f, (0, 1), norm)
    assert est.value == pytest.approx(value, rel=1e-15)
    assert est.error_bound == pytest.approx(bound, rel=1e-15)


def test_trapezoid_exp_error_within_bound():
    est = trapezoid("exp(x)", (0, 1), E)
    err = abs(est.value - (E - 1))
    assert err == pytest.approx(0.1408590857704775, rel=1e-12) and err <= est.error_bound


@pytest.mark.parametrize("fn", [midpoint, trapezoid, corrected_trapezoid, simpson])
@pytest.mark.parametrize("f, exact", [("x", 0.5), ("3", 3.0), ("7 - 2*x", 6.0)])
def test_linear_and_constant_exact(fn, f, exact):
    assert fn(f, (0, 1), 0.0).value == pytest.approx(exact, abs=1e-15)


@pytest.mark.parametrize("fn, kind", [(midpoint, "M"), (trapezoid, "T"), (corrected_trapezoid, "CT"),
                                      (simpson, "S")])
def test_evaluation_counts(fn, kind):
    est = fn("x^2", (0, 1), 2.0)
    want = {"M": (1, 0), "T": (2, 0), "CT": (2, 2), "S": (3, 0)}[kind]
    assert (est.evaluations, est.derivative_evaluations) == want


coef = st.floats(-10, 10, allow_nan=False)


def poly_text(cs):
    return " + ".join(f"({c!r})*x^{k}" for k, c in enumerate(cs))


def poly_integral(cs):
    return math.fsum(c / (k + 1) for k, c in enumerate(cs))


@settings(max_examples=60, deadline=None)
@given(st.lists(coef, min_size=2, max_size=2))
def test_degree_one_exact(cs):
    f, exact = poly_text(cs), poly_integral(cs)
    for fn in (midpoint, trapezoid, corrected_trapezoid):
        assert abs(fn(f, (0, 1), 0.0).value - exact) <= 1e-13


@settings(max_examples=60, deadline=None)
@given(st.lists(coef, min_size=4, max_size=4))
def test_simpson_exact_on_cubics(cs):
    assert abs(simpson(poly_text(cs), (0, 1), 0.0).value - poly_integral(cs)) <= 1e-13


@settings(max_examples=40, deadline=None)
@given(st.lists(coef, min_size=3, max_size=3).filter(lambda cs: abs(cs[2]) > 1e-3))
def test_degree_two_not_exact_for_two_point_rules(cs):
    # pins the exactness degree: the quadratic term is always felt
    f, exact = poly_text(cs), poly_integral(cs)
    for fn in (midpoint, trapezoid, corrected_trapezoid):
        assert abs(fn(f, (0, 1), 0.0).value - exact) > 1e-6


@pytest.mark.parametrize("fn, f, norm, exact", [
    (trapezoid, "x^2", 2, Fraction(1, 3)),
    (midpoint, "x^2", 2, Fraction(1, 3)),
    (simpson, "x^4", 24, Fraction(1, 5)),
])
def test_sharpness(fn, f, norm, exact):
    est = fn(f, (0, 1), norm)
    err = abs(Fraction(est.value) - exact)
    assert float(err) == pytest.approx(est.error_bound, rel=1e-12)


def test_corrected_trapezoid_example_error():
    est = corrected_trapezoid("x^2", (0, 1), 2)
    assert 1 / 3 - est.value == pytest.approx(1 / 48, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-10, 10), w=st.floats(1e-3, 10), norm=st.floats(0, 1e3))
def test_bound_ratios(a, w, norm):
    t = trapezoid("x", (a, a + w), norm).error_bound
    assert midpoint("x", (a, a + w), norm).error_bound == pytest.approx(t / 2, rel=1e-14)
    assert corrected_trapezoid("x", (a, a + w), norm).error_bound == pytest.approx(3 * t / 8, rel=1e-14)


@pytest.mark.parametrize("f, norm, bound", [("x^1.5", 1.5, 0.375), ("5", 0.0, 0.0), ("x^2", 2.0, 0.5)])
def test_first_order_bound(f, norm, bound):
    est = first_order_trapezoid_bound(f, (0, 1), norm)
    assert est.error_bound == pytest.approx(bound) and est.order == 1
    assert est.value == trapezoid(f, (0, 1), 0.0).value


def test_first_order_bound_covers_x_to_the_1_5():
    est = first_order_trapezoid_bound("x^1.5", (0, 1), 1.5)
    assert abs(est.value - 0.4) <= est.error_bound


@pytest.mark.parametrize("rule", RULES)
@pytest.mark.parametrize("entry", [e for e in builtin_corpus() if e.smoothness != "C1"],
                         ids=lambda e: e.name)
def test_representation_residual(rule, entry):
    res = residual_check(rule, entry, resolution=2 ** 12)
    assert res <= 1e-9 * max(1.0, abs(entry.exact_value))


@pytest.mark.parametrize("interval", [(1, 1), (2, 1), (0, math.inf), (math.nan, 1)])
def test_bad_interval(interval):
    with pytest.raises(ValueError):
        trapezoid("x", interval, 0)


@pytest.mark.parametrize("norm", [-1.0, math.inf, math.nan])
def test_bad_norm(norm):
    with pytest.raises(ValueError):
        midpoint("x", (0, 1), norm)


def test_unknown_rule():
    with pytest.raises(ValueError):
        simple_rule("boole", "x", (0, 1), 0)


def test_domain_error_propagates():
    with pytest.raises(DomainError):
        trapezoid("log(x)", (0, 1), 1.0)


def test_accepts_expression_objects():
    assert trapezoid(parse("x^2"), (0, 1), 2).value == 0.5


def test_estimate_rejects_bad_bound():
    with pytest.raises(ValueError):
        QuadratureEstimate(1.0, -1.0, "trapezoid", 2, 1.0)
    with pytest.raises(ValueError):
        QuadratureEstimate(1.0, math.inf, "trapezoid", 2, 1.0)
