"""Test-function corpus and executable checks of the error bounds.

Exact integrals are stored as closed-form strings in the endpoints ``a``
and ``b``.  They are evaluated with mpmath at 40 digits and rounded once
to a double, so ``exact_value`` is the correctly rounded integral.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import mpmath
import numpy as np

from . import kernels
from .composite import (UniformPartition, composite_kernel_for, composite_rule,
                        composite_rule_first_order)
from .expr import Expression, differentiate, evaluate, evaluate_array, parse
from .rules import RULES
from .sampling import DivergentNormError, sup_with_divergence_check

__all__ = [
    "CorpusEntry", "ConvergenceRow", "Check", "builtin_corpus", "find_entry",
    "sup_norm", "derivative_norm", "convergence_table", "rows_to_csv", "residual_check",
    "kernel_integral", "adaptive_simpson", "abs_error", "bound_sweep", "bound_holds", "run_checks",
    "SmoothnessWarning", "DivergentNormError", "SWEEP_NS", "CSV_HEADER",
]

SMOOTHNESS = ("C1", "C2", "C4", "analytic")
CSV_HEADER = "n,value,abs_error,bound,ratio,observed_order"
SWEEP_NS = tuple(2 ** k for k in range(11))
_MP_DPS = 40


class SmoothnessWarning(UserWarning):
    pass


def _mp_eval(text: str, a: float, b: float) -> mpmath.mpf:
    names = {k: getattr(mpmath, k) for k in
             ("pi", "e", "exp", "log", "sin", "cos", "atan", "sqrt", "erf", "mpf")}
    with mpmath.workdps(_MP_DPS):
        names.update(a=mpmath.mpf(a), b=mpmath.mpf(b))
        return +eval(text, {"__builtins__": {}}, names)  # noqa: S307 - trusted corpus text


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    text: str
    a: float
    b: float
    exact: str          # closed form in a, b (mpmath syntax)
    smoothness: str = "analytic"
    note: str = ""

    def __post_init__(self):
        if self.smoothness not in SMOOTHNESS:
            raise ValueError(f"smoothness must be one of {SMOOTHNESS}")
        kernels._check_interval(self.a, self.b)

    @cached_property
    def expression(self) -> Expression:
        return parse(self.text)

    @cached_property
    def exact_mp(self) -> mpmath.mpf:
        return _mp_eval(self.exact, self.a, self.b)

    @property
    def exact_value(self) -> float:
        return float(self.exact_mp)

    @property
    def interval(self) -> tuple[float, float]:
        return (self.a, self.b)

    def supports(self, order: int) -> bool:
        """Whether the m-th derivative is bounded (per the smoothness tag)."""
        need = {1: "C1", 2: "C2", 4: "C4"}[order]
        return SMOOTHNESS.index(self.smoothness) >= SMOOTHNESS.index(need)


def builtin_corpus() -> list[CorpusEntry]:
    return [
        CorpusEntry("x^2 on [0,1]", "x^2", 0.0, 1.0, "(b**3 - a**3)/3"),
        CorpusEntry("x^3 on [0,1]", "x^3", 0.0, 1.0, "(b**4 - a**4)/4"),
        CorpusEntry("x^4 on [0,1]", "x^4", 0.0, 1.0, "(b**5 - a**5)/5"),
        CorpusEntry("exp(x) on [0,1]", "exp(x)", 0.0, 1.0, "exp(b) - exp(a)"),
        CorpusEntry("sin(x) on [0,pi]", "sin(x)", 0.0, math.pi, "cos(a) - cos(b)"),
        CorpusEntry("1/(1+x^2) on [0,1]", "1/(1+x^2)", 0.0, 1.0, "atan(b) - atan(a)"),
        CorpusEntry("x^1.5 on [0,1]", "x^1.5", 0.0, 1.0, "(b**mpf(2.5) - a**mpf(2.5))/mpf(2.5)",
                    smoothness="C1", note="f'' unbounded at 0"),
        CorpusEntry("log(1+x) on [0,1]", "log(1+x)", 0.0, 1.0,
                    "(1+b)*log(1+b) - (1+a)*log(1+a) - (b - a)"),
        CorpusEntry("cos(x) on [0,1.5]", "cos(x)", 0.0, 1.5, "sin(b) - sin(a)"),
        CorpusEntry("exp(10x) on [0,1]", "exp(10*x)", 0.0, 1.0, "(exp(10*b) - exp(10*a))/10"),
        CorpusEntry("sqrt(1+x) on [0,3]", "sqrt(1+x)", 0.0, 3.0,
                    "2*((1+b)**mpf(1.5) - (1+a)**mpf(1.5))/3"),
        CorpusEntry("exp(-x^2) on [-1,2]", "exp(-x^2)", -1.0, 2.0, "sqrt(pi)*(erf(b) - erf(a))/2"),
        CorpusEntry("1/x on [1,2]", "1/x", 1.0, 2.0, "log(b) - log(a)"),
    ]


def find_entry(text: str, a: float, b: float) -> CorpusEntry | None:
    """The builtin entry with this integrand text and interval, if any."""
    key = "".join(text.split())
    for entry in builtin_corpus():
        if "".join(entry.text.split()) == key and (entry.a, entry.b) == (float(a), float(b)):
            return entry
    return None


def abs_error(entry: CorpusEntry, value: float) -> float:
    """|value - exact| against the correctly rounded exact integral."""
    return abs(float(value) - entry.exact_value)


# -- norms -----------------------------------------------------------------

def sup_norm(fm: Expression, interval: Sequence[float]) -> float:
    """||fm||_inf on the interval: 4097 samples, golden-section polish, +1e-6.

    Raises :class:`DivergentNormError` when the sampled sup keeps growing
    as the grid is refined (e.g. f'' of x^1.5 on [0, 1]).
    """
    a, b = kernels._check_interval(*interval)
    return sup_with_divergence_check(fm, a, b)


_NORMS: dict[tuple, float] = {}


def derivative_norm(entry: CorpusEntry, order: int) -> float:
    key = (entry.text, entry.a, entry.b, order)
    if key not in _NORMS:
        _NORMS[key] = sup_norm(differentiate(entry.expression, order), entry.interval)
    return _NORMS[key]


# -- convergence tables ----------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    value: float
    abs_error: float
    bound: float
    ratio: float | None           # bound / |error|; None when the error is 0
    observed_order: float | None  # None for the first row or zero errors


def _estimate(rule: str, entry: CorpusEntry, n: int, norm: float | None, first_order: bool):
    p = UniformPartition(entry.a, entry.b, n)
    if first_order:
        return composite_rule_first_order(rule, entry.expression, p, norm)
    return composite_rule(rule, entry.expression, p, norm)


def _norm_for(rule: str, entry: CorpusEntry, norm: float | None) -> tuple[float, bool]:
    """(norm, first_order) to use for `rule` on `entry`."""
    m = kernels.ORDER[rule]
    if norm is not None:
        return float(norm), False
    if entry.supports(m):
        try:
            return derivative_norm(entry, m), False
        except DivergentNormError as exc:
            reason = f"||f^({m})|| looks unbounded ({exc})"
    else:
        reason = f"entry is only {entry.smoothness}"
    warnings.warn(f"{rule} on {entry.name}: {reason}; using the first-order bound",
                  SmoothnessWarning, stacklevel=3)
    return derivative_norm(entry, 1), True


def convergence_table(rule: str, entry: CorpusEntry, ns: Iterable[int],
                      norm: float | None = None) -> list[ConvergenceRow]:
    """Composite `rule` on `entry` for each n, with true errors and observed orders.

    When the entry is not smooth enough for the rule (or its derivative norm
    diverges), a :class:`SmoothnessWarning` is issued and the C^1 bound is used.
    """
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}")
    norm, first_order = _norm_for(rule, entry, norm)
    rows: list[ConvergenceRow] = []
    for n in ns:
        est = _estimate(rule, entry, n, norm, first_order)
        err = abs_error(entry, est.value)
        ratio = est.error_bound / err if err > 0 else None
        order = None
        if rows and err > 0 and rows[-1].abs_error > 0:
            order = math.log(rows[-1].abs_error / err) / math.log(n / rows[-1].n)
        rows.append(ConvergenceRow(n, est.value, err, est.error_bound, ratio, order))
    return rows


def _fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.17g}"


def rows_to_csv(rows: Iterable[ConvergenceRow]) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for r in rows:
        out.write(",".join([str(r.n), _fmt(r.value), _fmt(r.abs_error), _fmt(r.bound),
                            _fmt(r.ratio), _fmt(r.observed_order)]) + "\n")
    return out.getvalue()


# -- error representation --------------------------------------------------

def _composite_simpson(g, lo: float, hi: float, resolution: int) -> float:
    n = resolution + resolution % 2
    xs = lo + (hi - lo) * np.arange(n + 1) / n
    xs[-1] = hi
    y = g(xs)
    return float((hi - lo) / (3 * n) * (y[0] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum() + y[-1]))


def kernel_integral(fm: Expression, k: kernels.KernelSpec, resolution: int = 2 ** 16) -> float:
    """Integral of fm * P over [a, b], composite Simpson on every kernel piece."""
    total = 0.0
    for piece in k.pieces:
        local = piece.local()
        total += _composite_simpson(
            lambda xs, q=local, lo=piece.lo: evaluate_array(fm, xs) * q(xs - lo),
            piece.lo, piece.hi, resolution)
    return total


def residual_check(rule: str, entry: CorpusEntry, resolution: int = 2 ** 16,
                   n: int | None = None) -> float:
    """|(exact - rule value) - (+-1/m!) integral f^(m) P| for the composite rule.

    `n` defaults to the simple rule (n = 2 for simpson, whose cells are pairs).
    """
    if n is None:
        n = 2 if rule == "simpson" else 1
    p = UniformPartition(entry.a, entry.b, n)
    est = composite_rule(rule, entry.expression, p, 0.0)
    k = composite_kernel_for(rule, p)
    fm = differentiate(entry.expression, k.order)
    predicted = kernels.representation_sign(k.order) * kernel_integral(fm, k, resolution) / k.divisor
    with mpmath.workdps(_MP_DPS):
        actual = entry.exact_mp - mpmath.mpf(est.value)
        return float(abs(actual - mpmath.mpf(predicted)))


# -- oracle for the corpus' exact values -----------------------------------

def adaptive_simpson(g, a: float, b: float, tol: float = 1e-12, max_depth: int = 60) -> float:
    """Classic recursive adaptive Simpson with Richardson correction."""
    def simpson(fa, fm, fb, a, b):
        return (b - a) * (fa + 4 * fm + fb) / 6

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = (a + b) / 2
        lm, rm = (a + m) / 2, (m + b) / 2
        flm, frm = g(lm), g(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15 * tol:
            return left + right + delta / 15
        return (recurse(a, m, fa, flm, fm, left, tol / 2, depth + 1)
                + recurse(m, b, fm, frm, fb, right, tol / 2, depth + 1))

    fa, fb, fm = g(a), g(b), g((a + b) / 2)
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)


# -- sweeps ----------------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SweepFailure:
    entry: str
    rule: str
    n: int
    abs_error: float
    bound: float


def sweep_ns(rule: str, ns: Sequence[int] = SWEEP_NS) -> list[int]:
    return [n for n in ns if rule != "simpson" or n % 2 == 0]


def bound_holds(row: ConvergenceRow, slack: float = 1e-10) -> bool:
    return row.abs_error <= row.bound * (1 + slack)


def bound_sweep(entries: Sequence[CorpusEntry] | None = None,
                rules: Sequence[str] = RULES, ns: Sequence[int] = SWEEP_NS,
                slack: float = 1e-10) -> tuple[int, list[SweepFailure]]:
    """Check |exact - value| <= bound * (1 + slack) everywhere; returns (cases, failures)."""
    entries = builtin_corpus() if entries is None else entries
    cases, failures = 0, []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmoothnessWarning)
        for entry in entries:
            for rule in rules:
                for row in convergence_table(rule, entry, sweep_ns(rule, ns)):
                    cases += 1
                    if not bound_holds(row, slack):
                        failures.append(SweepFailure(entry.name, rule, row.n, row.abs_error, row.bound))
    return cases, failures


def run_checks(entries: Sequence[CorpusEntry] | None = None) -> list[Check]:
    """The corpus-level checks behind the ``corpus`` CLI command."""
    entries = builtin_corpus() if entries is None else entries
    checks = []

    for entry in entries:
        oracle = adaptive_simpson(lambda x: evaluate(entry.expression, x), entry.a, entry.b)
        rel = abs(oracle - entry.exact_value) / max(abs(entry.exact_value), 1e-300)
        checks.append(Check(f"exact value of {entry.name}", rel <= 1e-10, f"rel diff {rel:.3g}"))

    cases, failures = bound_sweep(entries)
    detail = f"{cases} cases" + "".join(
        f"; {f.rule} on {f.entry} n={f.n}: error {f.abs_error:.3g} > bound {f.bound:.3g}"
        for f in failures[:5])
    checks.append(Check("bound validity sweep", not failures, detail))

    for entry in entries:
        for rule in RULES:
            if not entry.supports(kernels.ORDER[rule]):
                continue
            res = residual_check(rule, entry)
            tol = 1e-8 * (1 + abs(entry.exact_value))
            checks.append(Check(f"error representation, {rule} on {entry.name}", res <= tol,
                                f"residual {res:.3g}"))

    exp_entry = next((e for e in entries if e.text == "exp(x)"), None)
    if exp_entry is not None:
        for rule in RULES:
            lo, hi = (3.9, 4.1) if rule == "simpson" else (1.9, 2.1)
            rows = convergence_table(rule, exp_entry, [4, 8, 16, 32, 64, 128, 256])
            orders = [r.observed_order for r in rows[1:]]
            ok = all(o is not None and lo <= o <= hi for o in orders)
            checks.append(Check(f"observed order, {rule} on exp(x)", ok,
                                ", ".join(f"{o:.4f}" for o in orders if o is not None)))

    for entry in entries:
        if entry.smoothness != "C1":
            continue
        try:
            sup_norm(differentiate(entry.expression, 2), entry.interval)
            flagged, detail = False, "||f''|| was not flagged as divergent"
        except DivergentNormError as exc:
            flagged, detail = True, f"history {[round(h, 3) for h in exc.history]}"
        checks.append(Check(f"unbounded f'' flagged for {entry.name}", flagged, detail))
    return checks

