"""Greedy bound-driven refinement on non-uniform partitions.

Each subinterval carries its own sampled derivative norm, so the bound is
spent where |f^(m)| is large.  The loop bisects the subinterval with the
largest local bound (leftmost on ties) until the summed bound meets the
tolerance or the evaluation budget runs out.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from . import kernels
from .composite import pairwise_sum
from .expr import Expression, differentiate, evaluate
from .rules import RULES, Integrand, QuadratureEstimate, as_expression, rule_value
from .sampling import sampled_sup

__all__ = ["Partition", "LocalEstimate", "AdaptiveResult", "local_norm", "local_bound",
           "adaptive_integrate", "LOCAL_SAMPLES"]

LOCAL_SAMPLES = 129

# simple-rule bound is width^(m+1) * norm / D
_DIVISOR = {rule: int(math.factorial(kernels.ORDER[rule]) / kernels._L1[rule]) for rule in RULES}

# new integrand points (and derivative points) created by one bisection
_NEW_POINTS = {"midpoint": 2, "trapezoid": 1, "corrected_trapezoid": 2, "simpson": 2}


@dataclass(frozen=True)
class Partition:
    """Strictly increasing breakpoints t_0 = a < ... < t_k = b."""

    breakpoints: tuple[float, ...]

    def __post_init__(self):
        t = tuple(float(x) for x in self.breakpoints)
        if len(t) < 2:
            raise ValueError("a partition needs at least two breakpoints")
        if not all(math.isfinite(x) for x in t):
            raise ValueError("breakpoints must be finite")
        if any(u >= v for u, v in zip(t, t[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", t)

    @property
    def a(self) -> float:
        return self.breakpoints[0]

    @property
    def b(self) -> float:
        return self.breakpoints[-1]

    def __len__(self) -> int:
        return len(self.breakpoints) - 1

    def cells(self) -> list[tuple[float, float]]:
        t = self.breakpoints
        return list(zip(t, t[1:]))

    def widths(self) -> list[float]:
        return [v - u for u, v in self.cells()]

    def to_csv(self) -> str:
        """One breakpoint per line, 17 significant digits."""
        return "".join("%.17g\n" % x for x in self.breakpoints)


@dataclass(frozen=True)
class LocalEstimate:
    lo: float
    hi: float
    value: float
    norm: float       # sampled ||f^(m)||_inf on [lo, hi]
    bound: float


@dataclass(frozen=True)
class AdaptiveResult:
    estimate: QuadratureEstimate
    partition: Partition
    locals: tuple[LocalEstimate, ...]
    converged: bool   # False when max_evals stopped the loop first
    iterations: int


def local_norm(fm: Expression, subinterval: Sequence[float], samples: int = LOCAL_SAMPLES) -> float:
    """Sampled sup of |fm| on the subinterval, inflated by 1e-6 relative."""
    lo, hi = subinterval
    return sampled_sup(fm, float(lo), float(hi), samples)


def local_bound(rule: str, width: float, norm: float) -> float:
    m = kernels.ORDER[rule]
    if norm == 0.0:
        return 0.0
    return width ** (m + 1) * norm / _DIVISOR[rule]


def adaptive_integrate(rule: str, f: Integrand, interval: Sequence[float], tol: float,
                       max_evals: int = 10 ** 6,
                       on_step: Callable[[int, float, float, Partition], None] | None = None,
                       ) -> AdaptiveResult:
    """Integrate by bisecting the subinterval with the largest local bound.

    Parameters
    ----------
    rule : one of ``midpoint``, ``trapezoid``, ``corrected_trapezoid``, ``simpson``
    f : expression or its text
    interval : (a, b) with a < b
    tol : target for the summed local bounds, > 0
    max_evals : budget of distinct integrand evaluations
    on_step : called as ``on_step(iteration, value, bound, partition)`` after
        the initial estimate and after every bisection

    Returns
    -------
    AdaptiveResult
        ``converged`` is False if the budget ran out first; the partial
        estimate, partition and local estimates are still returned.

    Evaluations are cached by abscissa, so shared breakpoints count once.
    Derivative evaluations (corrected trapezoid) and norm samples are not
    part of the budget; the former are reported separately.
    """
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}; expected one of {', '.join(RULES)}")
    tol = float(tol)
    if not (tol > 0.0 and math.isfinite(tol)):
        raise ValueError(f"tol must be finite and > 0, got {tol!r}")
    if int(max_evals) != max_evals or max_evals < 1:
        raise ValueError(f"max_evals must be a positive integer, got {max_evals!r}")
    e = as_expression(f)
    a, b = kernels._check_interval(*interval)
    m = kernels.ORDER[rule]
    fm = differentiate(e, m)
    f_cache: dict[float, float] = {}
    df_cache: dict[float, float] = {}

    def f_at(x: float) -> float:
        if x not in f_cache:
            f_cache[x] = evaluate(e, x)
        return f_cache[x]

    df_at = None
    if rule == "corrected_trapezoid":
        de = differentiate(e, 1)

        def df_at(x: float) -> float:
            if x not in df_cache:
                df_cache[x] = evaluate(de, x)
            return df_cache[x]

    def estimate(lo: float, hi: float) -> LocalEstimate:
        norm = local_norm(fm, (lo, hi))
        return LocalEstimate(lo, hi, rule_value(rule, lo, hi, f_at, df_at), norm,
                             local_bound(rule, hi - lo, norm))

    cells: dict[float, LocalEstimate] = {a: estimate(a, b)}
    heap = [(-cells[a].bound, a)]

    def totals() -> tuple[float, float]:
        ordered = [cells[k] for k in sorted(cells)]
        return (pairwise_sum([c.value for c in ordered]),
                pairwise_sum([c.bound for c in ordered]))

    def partition() -> Partition:
        return Partition(tuple(sorted(cells)) + (b,))

    iteration = 0
    value, bound = totals()
    if on_step is not None:
        on_step(iteration, value, bound, partition())
    running = bound
    converged = bound <= tol
    while not converged:
        if len(f_cache) + _NEW_POINTS[rule] > max_evals:
            break
        neg, lo = heapq.heappop(heap)
        cell = cells[lo]
        mid = lo + (cell.hi - lo) / 2
        if not lo < mid < cell.hi:
            break   # cannot bisect below floating-point resolution
        left, right = estimate(lo, mid), estimate(mid, cell.hi)
        cells[lo], cells[mid] = left, right
        heapq.heappush(heap, (-left.bound, lo))
        heapq.heappush(heap, (-right.bound, mid))
        running += left.bound + right.bound + neg
        iteration += 1
        if on_step is not None or running <= tol:
            value, bound = totals()
            running = bound
            converged = bound <= tol
            if on_step is not None:
                on_step(iteration, value, bound, partition())
    value, bound = totals()
    ordered = tuple(cells[k] for k in sorted(cells))
    est = QuadratureEstimate(value, bound, rule, m, max(c.norm for c in ordered),
                             n=len(ordered), evaluations=len(f_cache),
                             derivative_evaluations=len(df_cache))
    return AdaptiveResult(est, partition(), ordered, converged, iteration)
