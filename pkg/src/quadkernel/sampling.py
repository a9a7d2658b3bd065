"""Sampled estimates of ||g||_inf on an interval.

These are heuristics: the sup is located on an equispaced grid, polished with
a golden-section search around the best sample, and inflated by 1e-6
relative.  Constant expressions skip the sampling but are inflated the same way.
"""

from __future__ import annotations

import math

import numpy as np

from .expr import DomainError, Expression, evaluate, evaluate_array, is_constant

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INFLATION = 1e-6


class DivergentNormError(ArithmeticError):
    """The sampled sup keeps growing under refinement (unbounded derivative)."""

    def __init__(self, message: str, history: list[float]):
        super().__init__(message)
        self.history = history


def golden_section_max(g, lo: float, hi: float, iterations: int = 40) -> tuple[float, float]:
    """Maximise a unimodal `g` on [lo, hi]; returns (argmax, max)."""
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    g1, g2 = g(x1), g(x2)
    for _ in range(iterations):
        if g1 >= g2:
            hi, x2, g2 = x2, x1, g1
            x1 = hi - INV_PHI * (hi - lo)
            g1 = g(x1)
        else:
            lo, x1, g1 = x1, x2, g2
            x2 = lo + INV_PHI * (hi - lo)
            g2 = g(x2)
    return (x1, g1) if g1 >= g2 else (x2, g2)


def _abs_at(fm: Expression):
    def g(x: float) -> float:
        try:
            return abs(evaluate(fm, x))
        except (DomainError, ZeroDivisionError, OverflowError):
            return -math.inf
    return g


def _grid_max(fm: Expression, a: float, b: float, samples: int) -> tuple[float, int, np.ndarray]:
    xs = a + (b - a) * np.arange(samples) / (samples - 1)
    xs[-1] = b
    vals = np.abs(evaluate_array(fm, xs, strict=False))
    if np.isnan(vals).all():
        raise DomainError(f"expression is undefined at every sample of [{a!r}, {b!r}]")
    i = int(np.nanargmax(vals))
    return float(vals[i]), i, xs


def sampled_sup(fm: Expression, a: float, b: float, samples: int,
                iterations: int = 40, inflate: bool = True) -> float:
    """Sup of |fm| on [a, b] from `samples` equispaced points plus a polish."""
    if is_constant(fm):
        value = abs(evaluate(fm, a))
        return value * (1.0 + INFLATION) if inflate else value
    best, i, xs = _grid_max(fm, a, b, samples)
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, samples - 1)]
    _, polished = golden_section_max(_abs_at(fm), lo, hi, iterations)
    best = max(best, polished)
    return best * (1.0 + INFLATION) if inflate else best


def sup_with_divergence_check(fm: Expression, a: float, b: float, samples: int = 4097,
                              doublings: int = 3, growth: float = 1.10) -> float:
    """Like :func:`sampled_sup`, but refuses to return a norm that looks unbounded.

    The sample density is doubled `doublings` times; if the running max grows
    by more than `growth` at every doubling, :class:`DivergentNormError` is raised.
    """
    if is_constant(fm):
        return sampled_sup(fm, a, b, samples)
    history = []
    n = samples
    for _ in range(doublings + 1):
        history.append(_grid_max(fm, a, b, n)[0])
        n = 2 * n - 1
    if all(h1 > growth * h0 for h0, h1 in zip(history, history[1:])):
        raise DivergentNormError(
            f"sampled sup on [{a!r}, {b!r}] grows without bound: {history}", history)
    return max(history[-1], sampled_sup(fm, a, b, n // 2 + 1))
