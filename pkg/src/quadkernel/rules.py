"""Simple (single-interval) quadrature rules with a-priori error bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

from . import kernels
from .expr import Expression, differentiate, evaluate, parse

__all__ = [
    "RULES", "QuadratureEstimate", "as_expression", "rule_value",
    "midpoint", "trapezoid", "corrected_trapezoid", "simpson",
    "first_order_trapezoid_bound", "simple_rule",
]

RULES = ("midpoint", "trapezoid", "corrected_trapezoid", "simpson")

# integrand / derivative evaluations per application of the simple rule
EVALUATIONS = {"midpoint": (1, 0), "trapezoid": (2, 0),
               "corrected_trapezoid": (2, 2), "simpson": (3, 0)}

Integrand = Union[Expression, str]


@dataclass(frozen=True)
class QuadratureEstimate:
    value: float
    error_bound: float
    rule: str
    order: int                  # m, the derivative the bound is stated in
    derivative_norm: float      # ||f^(m)||_r as supplied
    norm_exponent: float = math.inf   # r
    n: int = 1
    evaluations: int = 0
    derivative_evaluations: int = 0

    def __post_init__(self):
        if not (self.error_bound >= 0.0 and math.isfinite(self.error_bound)):
            raise ValueError(f"error bound must be finite and >= 0, got {self.error_bound!r}")


def as_expression(f: Integrand) -> Expression:
    return parse(f) if isinstance(f, str) else f


def _interval(interval: Sequence[float]) -> tuple[float, float]:
    a, b = interval
    return kernels._check_interval(a, b)


def _check_norm(norm: float) -> float:
    norm = float(norm)
    if not (norm >= 0.0 and math.isfinite(norm)):
        raise ValueError(f"derivative norm must be finite and >= 0, got {norm!r}")
    return norm


def rule_value(rule: str, a: float, b: float, f_at: Callable[[float], float],
               df_at: Callable[[float], float] | None = None) -> float:
    """Value of the simple `rule` on [a, b] from point evaluators."""
    w = b - a
    if rule == "midpoint":
        return w * f_at((a + b) / 2)
    if rule == "trapezoid":
        return w * (f_at(a) + f_at(b)) / 2
    if rule == "corrected_trapezoid":
        if df_at is None:
            raise ValueError("corrected trapezoid needs the first derivative")
        return w * (f_at(a) + f_at(b)) / 2 + 3 * w * w * (df_at(a) - df_at(b)) / 32
    if rule == "simpson":
        return w * (f_at(a) + 4 * f_at((a + b) / 2) + f_at(b)) / 6
    raise ValueError(f"unknown rule {rule!r}; expected one of {', '.join(RULES)}")


def simple_rule(rule: str, f: Integrand, interval: Sequence[float], norm: float) -> QuadratureEstimate:
    """Apply one of :data:`RULES` on a single interval.

    `norm` is ||f''||_inf (||f''''||_inf for simpson) on the interval.
    """
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}; expected one of {', '.join(RULES)}")
    e = as_expression(f)
    a, b = _interval(interval)
    norm = _check_norm(norm)
    df_at = None
    if rule == "corrected_trapezoid":
        de = differentiate(e, 1)
        df_at = lambda x: evaluate(de, x)  # noqa: E731
    value = rule_value(rule, a, b, lambda x: evaluate(e, x), df_at)
    k = kernels.kernel_for(rule, (a, b))
    fe, de_count = EVALUATIONS[rule]
    return QuadratureEstimate(value, kernels.error_bound(k, norm), rule, k.order, norm,
                              evaluations=fe, derivative_evaluations=de_count)


def midpoint(f: Integrand, interval: Sequence[float], f2_norm: float) -> QuadratureEstimate:
    """(b - a) f((a + b)/2), error at most (b - a)^3 ||f''|| / 24."""
    return simple_rule("midpoint", f, interval, f2_norm)


def trapezoid(f: Integrand, interval: Sequence[float], f2_norm: float) -> QuadratureEstimate:
    """(b - a)[f(a) + f(b)]/2, error at most (b - a)^3 ||f''|| / 12."""
    return simple_rule("trapezoid", f, interval, f2_norm)


def corrected_trapezoid(f: Integrand, interval: Sequence[float], f2_norm: float) -> QuadratureEstimate:
    """Trapezoid plus 3(b - a)^2 [f'(a) - f'(b)] / 32.

    The endpoint correction comes from the monic quadratic with least L1
    norm on [a, b]; the error is at most (b - a)^3 ||f''|| / 32.
    """
    return simple_rule("corrected_trapezoid", f, interval, f2_norm)


def simpson(f: Integrand, interval: Sequence[float], f4_norm: float) -> QuadratureEstimate:
    """(b - a)[f(a) + 4 f(c) + f(b)]/6, error at most (b - a)^5 ||f''''|| / 2880."""
    return simple_rule("simpson", f, interval, f4_norm)


def first_order_trapezoid_bound(f: Integrand, interval: Sequence[float],
                                f1_norm: float) -> QuadratureEstimate:
    """Trapezoid value with the C^1 bound (b - a)^2 ||f'|| / 4."""
    e = as_expression(f)
    a, b = _interval(interval)
    norm = _check_norm(f1_norm)
    value = rule_value("trapezoid", a, b, lambda x: evaluate(e, x))
    k = kernels.kernel_for("first_order_trapezoid", (a, b))
    return QuadratureEstimate(value, kernels.error_bound(k, norm), "trapezoid", 1, norm,
                              evaluations=2)
