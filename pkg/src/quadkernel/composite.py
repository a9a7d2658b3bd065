"""Composite rules on uniform partitions."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import kernels
from .expr import differentiate, evaluate, evaluate_array
from .rules import RULES, Integrand, QuadratureEstimate, _check_norm, as_expression

__all__ = [
    "UniformPartition", "pairwise_sum", "composite_rule", "composite_corrected_trapezoid",
    "composite_corrected_trapezoid_fd", "composite_first_order_bound",
    "composite_rule_first_order", "composite_kernel_for",
]

# |E_n| <= (b - a)^(m+1) ||f^(m)|| / (D n^m)
_DIVISOR = {"midpoint": 24, "trapezoid": 12, "corrected_trapezoid": 32, "simpson": 180}


@dataclass(frozen=True)
class UniformPartition:
    a: float
    b: float
    n: int

    def __post_init__(self):
        kernels._check_interval(self.a, self.b)
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "n", int(self.n))

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def breakpoints(self) -> np.ndarray:
        x = self.a + (self.b - self.a) * np.arange(self.n + 1) / self.n
        x[0], x[-1] = self.a, self.b
        return x

    @property
    def midpoints(self) -> np.ndarray:
        i = np.arange(1, self.n + 1)
        return self.a + (self.b - self.a) * (2 * i - 1) / (2 * self.n)

    def cells(self, width: int = 1) -> list[tuple[float, float]]:
        x = self.breakpoints
        return [(float(x[i]), float(x[i + width])) for i in range(0, self.n, width)]


def pairwise_sum(values) -> float:
    """Sum by adjacent pairs, level by level; the order is fixed by position."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return 0.0
    while v.size > 1:
        if v.size % 2:
            head = v[:-1:2] + v[1::2]
            v = np.append(head, v[-1])
        else:
            v = v[0::2] + v[1::2]
    return float(v[0])


def _partition(partition) -> UniformPartition:
    if isinstance(partition, UniformPartition):
        return partition
    a, b, n = partition
    return UniformPartition(a, b, n)


def _bound(rule: str, p: UniformPartition, norm: float) -> float:
    m = kernels.ORDER[rule]
    if norm == 0.0:
        return 0.0
    return (p.b - p.a) ** (m + 1) * norm / (_DIVISOR[rule] * p.n ** m)


def _trapezoid_value(fx: np.ndarray, p: UniformPartition) -> float:
    interior = pairwise_sum(fx[1:-1])
    return float((p.b - p.a) * (fx[0] + 2 * interior + fx[-1]) / (2 * p.n))


def composite_rule(rule: str, f: Integrand, partition, norm: float) -> QuadratureEstimate:
    """Composite `rule` over a uniform partition.

    `norm` is ||f''||_inf on [a, b] (||f''''||_inf for simpson, which needs
    even n and works on the pairs [x_{2i-2}, x_{2i}]).
    """
    if rule == "corrected_trapezoid":
        return composite_corrected_trapezoid(f, partition, norm)
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}; expected one of {', '.join(RULES)}")
    e = as_expression(f)
    p = _partition(partition)
    norm = _check_norm(norm)
    L = p.b - p.a
    if rule == "midpoint":
        fy = evaluate_array(e, p.midpoints)
        value = L * pairwise_sum(fy) / p.n
        count = p.n
    elif rule == "trapezoid":
        fx = evaluate_array(e, p.breakpoints)
        value = _trapezoid_value(fx, p)
        count = p.n + 1
    else:
        if p.n % 2:
            raise ValueError(f"composite Simpson needs an even number of subintervals, got n={p.n}")
        fx = evaluate_array(e, p.breakpoints)
        even = pairwise_sum(fx[2:-1:2])
        odd = pairwise_sum(fx[1::2])
        value = float(L * (fx[0] + 2 * even + 4 * odd + fx[-1]) / (3 * p.n))
        count = p.n + 1
    return QuadratureEstimate(value, _bound(rule, p, norm), rule, kernels.ORDER[rule], norm,
                              n=p.n, evaluations=count)


def _correction(L: float, n: int, dfa: float, dfb: float) -> float:
    return 3 * L * L * (dfa - dfb) / (32 * n * n)


def composite_corrected_trapezoid(f: Integrand, partition, norm: float) -> QuadratureEstimate:
    """Composite trapezoid plus 3(b - a)^2 [f'(a) - f'(b)] / (32 n^2).

    Interior derivative terms telescope, so f' is only needed at a and b.
    """
    e = as_expression(f)
    p = _partition(partition)
    norm = _check_norm(norm)
    de = differentiate(e, 1)
    fx = evaluate_array(e, p.breakpoints)
    value = _trapezoid_value(fx, p) + _correction(p.b - p.a, p.n, evaluate(de, p.a), evaluate(de, p.b))
    return QuadratureEstimate(value, _bound("corrected_trapezoid", p, norm), "corrected_trapezoid",
                              2, norm, n=p.n, evaluations=p.n + 1, derivative_evaluations=2)


def composite_corrected_trapezoid_fd(f: Integrand, partition, norm: float,
                                     h_fd: float) -> QuadratureEstimate:
    """Composite corrected trapezoid with one-sided difference quotients at the ends.

    f'(a) ~ [f(a + h) - f(a)]/h and f'(b) ~ [f(b) - f(b - h)]/h, each off by
    at most ||f''|| h / 2, which adds 3(b - a)^2 ||f''|| h / (32 n^2) to the bound.
    """
    e = as_expression(f)
    p = _partition(partition)
    norm = _check_norm(norm)
    h = float(h_fd)
    if not (h > 0.0 and p.a + h < p.b):
        raise ValueError(f"finite-difference step must satisfy 0 < h < b - a, got {h_fd!r}")
    fx = evaluate_array(e, p.breakpoints)
    dfa = (evaluate(e, p.a + h) - float(fx[0])) / h
    dfb = (float(fx[-1]) - evaluate(e, p.b - h)) / h
    L = p.b - p.a
    value = _trapezoid_value(fx, p) + _correction(L, p.n, dfa, dfb)
    bound = _bound("corrected_trapezoid", p, norm) + 3 * L * L * norm * h / (32 * p.n * p.n)
    return QuadratureEstimate(value, bound, "corrected_trapezoid", 2, norm, n=p.n,
                              evaluations=p.n + 3)


def composite_first_order_bound(rule: str, partition, f1_norm: float) -> float:
    """Error bound in terms of ||f'||_inf only, for integrands that are merely C^1.

    Trapezoid and midpoint: (b - a)^2 ||f'|| / (4n) per the linear kernels.
    Corrected trapezoid adds |endpoint correction| <= 3(b - a)^2 ||f'|| / (16 n^2).
    Simpson is (2 M + T)/3 on the n/2 pairs, giving (b - a)^2 ||f'|| / (2n).
    """
    p = _partition(partition)
    f1 = _check_norm(f1_norm)
    L = p.b - p.a
    if rule in ("trapezoid", "midpoint"):
        return L * L * f1 / (4 * p.n)
    if rule == "corrected_trapezoid":
        return L * L * f1 / (4 * p.n) + 3 * L * L * f1 / (16 * p.n * p.n)
    if rule == "simpson":
        return L * L * f1 / (2 * p.n)
    raise ValueError(f"unknown rule {rule!r}")


def composite_rule_first_order(rule: str, f: Integrand, partition, f1_norm: float) -> QuadratureEstimate:
    """Composite value of `rule` with the C^1 bound of :func:`composite_first_order_bound`."""
    est = composite_rule(rule, f, partition, 0.0)
    bound = composite_first_order_bound(rule, partition, f1_norm)
    return dataclasses.replace(est, error_bound=bound, order=1, derivative_norm=float(f1_norm))


def composite_kernel_for(rule: str, partition) -> kernels.KernelSpec:
    """The piecewise kernel P of the composite rule (simpson: one cell per pair)."""
    p = _partition(partition)
    if rule == "simpson" and p.n % 2:
        raise ValueError("composite Simpson needs even n")
    return kernels.composite_kernel(rule, p.cells(2 if rule == "simpson" else 1))

