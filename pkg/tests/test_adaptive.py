import math

import pytest

from quadkernel.adaptive import Partition, adaptive_integrate, local_bound, local_norm
from quadkernel.composite import composite_rule
from quadkernel.expr import differentiate, parse
from quadkernel.harness import builtin_corpus
from quadkernel.kernels import ORDER
from quadkernel.rules import RULES, simple_rule

EXP10 = (math.exp(10) - 1) / 10


@pytest.mark.parametrize("f, interval, want", [
    ("x^2", (0.3, 0.9), 2.0),
    ("exp(x)", (0.5, 1.0), math.e),          # f'' increasing, sup at the right end
    ("sin(x)", (0.0, math.pi / 2), 1.0),     # |f''| = sin, increasing on [0, pi/2]
    ("x^4", (-1.0, 0.5), 12.0),
])
def test_local_norm(f, interval, want):
    got = local_norm(differentiate(parse(f), 2), interval)
    assert want <= got <= want * (1 + 1.1e-6)


def test_local_bound_matches_simple_rule():
    for rule in RULES:
        m = ORDER[rule]
        assert local_bound(rule, 0.3, 2.0) == pytest.approx(
            simple_rule(rule, "x", (0.0, 0.3), 2.0).error_bound, rel=1e-15)
        assert local_bound(rule, 0.3, 0.0) == 0.0 and m in (2, 4)


def test_x_squared_trapezoid():
    res = adaptive_integrate("trapezoid", "x^2", (0, 1), 1e-3)
    assert res.converged
    assert res.estimate.error_bound <= 1e-3
    assert abs(res.estimate.value - 1 / 3) <= 1e-3


@pytest.mark.parametrize("rule", RULES)
def test_linear_terminates_immediately(rule):
    res = adaptive_integrate(rule, "2*x + 1", (0, 3), 1e-15)
    assert res.converged and res.iterations == 0 and len(res.partition) == 1
    assert res.estimate.value == pytest.approx(12.0, rel=1e-15)


def test_exp10_refines_towards_the_right():
    res = adaptive_integrate("trapezoid", "exp(10*x)", (0, 1), 1e-4)
    cells = res.partition.cells()
    left = max(hi - lo for lo, hi in cells if hi <= 0.5)
    right = max(hi - lo for lo, hi in cells if lo >= 0.5)
    assert left > right


def test_exp10_beats_uniform():
    res = adaptive_integrate("trapezoid", "exp(10*x)", (0, 1), 1e-4)
    evals = res.estimate.evaluations
    assert res.converged and evals < 10 ** 5
    err = abs(res.estimate.value - EXP10)
    assert err <= 1e-4
    uniform = composite_rule("trapezoid", "exp(10*x)", (0, 1, evals - 1), 0.0)
    assert err <= abs(uniform.value - EXP10)


SAFE = [e for e in builtin_corpus() if e.smoothness == "analytic"]


@pytest.mark.parametrize("rule", RULES)
@pytest.mark.parametrize("entry", SAFE, ids=lambda e: e.name)
def test_safety_and_monotone_refinement(rule, entry):
    history = []

    def step(i, value, bound, partition):
        history.append((value, bound))
        assert partition.a == entry.a and partition.b == entry.b

    tol = 1e-6 * max(1.0, abs(entry.exact_value))
    res = adaptive_integrate(rule, entry.expression, entry.interval, tol, on_step=step)
    assert res.converged
    for value, bound in history:
        assert abs(entry.exact_value - value) <= bound * (1 + 1e-9)
    bounds = [b for _, b in history]
    assert all(b1 <= b0 for b0, b1 in zip(bounds, bounds[1:]))


def test_budget_exhaustion_is_reported():
    res = adaptive_integrate("trapezoid", "exp(10*x)", (0, 1), 1e-10, max_evals=200)
    assert not res.converged
    assert res.estimate.evaluations <= 200
    assert res.estimate.error_bound > 1e-10
    assert abs(res.estimate.value - EXP10) <= res.estimate.error_bound


def test_locals_are_consistent():
    res = adaptive_integrate("simpson", "exp(-x^2)", (-1, 2), 1e-8)
    cells = res.partition.cells()
    assert [(c.lo, c.hi) for c in res.locals] == cells
    assert math.fsum(c.bound for c in res.locals) == pytest.approx(res.estimate.error_bound, rel=1e-14)
    assert math.fsum(c.value for c in res.locals) == pytest.approx(res.estimate.value, rel=1e-14)
    global_norm = max(c.norm for c in res.locals)
    assert all(c.norm <= global_norm for c in res.locals)


def test_leftmost_tie_break():
    # symmetric f'' -> both halves tie after the first split; left goes first
    seen = []
    adaptive_integrate("trapezoid", "x^2", (-1, 1), 1e-9, max_evals=4,
                       on_step=lambda i, v, b, p: seen.append(p.breakpoints))
    assert seen[1] == (-1.0, 0.0, 1.0)
    assert seen[2] == (-1.0, -0.5, 0.0, 1.0)


def test_deterministic():
    runs = {adaptive_integrate("midpoint", "sin(10*x)*exp(x)", (0, 2), 1e-3).estimate.value
            for _ in range(3)}
    assert len(runs) == 1


def test_partition_validation_and_csv():
    p = Partition((0, 0.25, 1))
    assert p.to_csv() == "0\n0.25\n1\n" and p.widths() == [0.25, 0.75]
    for bad in [(0,), (0, 0), (1, 0.5), (0, math.inf)]:
        with pytest.raises(ValueError):
            Partition(bad)


@pytest.mark.parametrize("kwargs", [dict(tol=0), dict(tol=-1), dict(tol=math.nan),
                                    dict(tol=1e-3, max_evals=0)])
def test_argument_validation(kwargs):
    with pytest.raises(ValueError):
        adaptive_integrate("trapezoid", "x", (0, 1), **kwargs)


def test_unknown_rule():
    with pytest.raises(ValueError):
        adaptive_integrate("first_order_trapezoid", "x", (0, 1), 1e-3)
