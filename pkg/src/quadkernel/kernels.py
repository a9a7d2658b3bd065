"""Integration-by-parts error kernels for the basic rules.

Each rule is paired with a monic (piecewise) polynomial ``p`` of degree
``m`` such that

    integral_a^b f  =  rule(f)  +  (-1)^m / m! * integral_a^b f^(m)(x) p(x) dx,

so that ``|error| <= ||f^(m)||_r * ||p||_s / m!`` for conjugate ``r, s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as npoly
from scipy import integrate

__all__ = [
    "KERNEL_RULES", "ORDER", "Piece", "KernelSpec", "kernel_for", "composite_kernel",
    "kernel_l1_norm", "kernel_s_norm", "error_bound", "conjugate_exponent",
    "quadratic_l1", "optimize_monic_quadratic", "optimize_monic_linear",
    "QuadraticMinimum", "LinearMinimum", "representation_sign",
]

KERNEL_RULES = (
    "midpoint", "trapezoid", "corrected_trapezoid", "simpson",
    "first_order_trapezoid", "first_order_midpoint",
)

ORDER = {
    "midpoint": 2, "trapezoid": 2, "corrected_trapezoid": 2, "simpson": 4,
    "first_order_trapezoid": 1, "first_order_midpoint": 1,
}

# integral |p| = _L1[rule] * width^(m+1)
_L1 = {
    "midpoint": Fraction(1, 12), "trapezoid": Fraction(1, 6),
    "corrected_trapezoid": Fraction(1, 16), "simpson": Fraction(1, 120),
    "first_order_trapezoid": Fraction(1, 4), "first_order_midpoint": Fraction(1, 4),
}

# integral p^2 = _L2SQ[rule] * width^(2m+1)
_L2SQ = {
    "midpoint": Fraction(1, 80), "trapezoid": Fraction(1, 30),
    "corrected_trapezoid": Fraction(23, 3840), "simpson": Fraction(1, 8064),
    "first_order_trapezoid": Fraction(1, 12), "first_order_midpoint": Fraction(1, 12),
}


def _check_rule(rule: str) -> None:
    if rule not in ORDER:
        raise ValueError(f"unknown rule {rule!r}; expected one of {', '.join(KERNEL_RULES)}")


def _check_interval(a: float, b: float) -> tuple[float, float]:
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise ValueError(f"degenerate interval [{a!r}, {b!r}]; need finite a < b")
    return a, b


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    coeffs: tuple[float, ...]  # monomial basis in x, ascending powers
    roots: tuple[float, ...] = ()  # as constructed, with multiplicity

    def polynomial(self, deriv: int = 0) -> np.ndarray:
        c = np.asarray(self.coeffs)
        return npoly.polyder(c, deriv) if deriv else c

    def local(self) -> Polynomial:
        """The piece as a polynomial in t = x - lo (built from the roots when known)."""
        if self.roots:
            return Polynomial.fromroots([r - self.lo for r in self.roots])
        return Polynomial(self.coeffs)(Polynomial([self.lo, 1.0]))


@dataclass(frozen=True)
class KernelSpec:
    """Piecewise monic kernel for `rule` on [a, b].

    ``cells`` are the subintervals on which the simple rule was applied
    (one cell for a simple kernel, n or n/2 cells for a composite one).
    """
    rule: str
    a: float
    b: float
    order: int
    pieces: tuple[Piece, ...]
    cells: tuple[tuple[float, float], ...]

    @property
    def divisor(self) -> int:
        return math.factorial(self.order)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([self.pieces[0].lo] + [p.hi for p in self.pieces])

    def __call__(self, x, deriv: int = 0, side: str = "right"):
        return self.evaluate(x, deriv, side)

    def evaluate(self, x, deriv: int = 0, side: str = "right"):
        """Value of the kernel (or a derivative) at `x`.

        At an interior breakpoint ``side`` picks the one-sided limit: "left"
        uses the piece ending there, "right" the piece starting there.
        """
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        xs = np.asarray(x, dtype=float)
        inner = self.breakpoints[1:-1]
        idx = np.searchsorted(inner, xs, side="left" if side == "left" else "right")
        out = np.empty_like(xs)
        for i, piece in enumerate(self.pieces):
            mask = idx == i
            if mask.any():
                out[mask] = piece.local().deriv(deriv)(xs[mask] - piece.lo)
        return out if out.ndim else float(out)


def _monic(lo: float, hi: float, roots: Sequence[float]) -> Piece:
    return Piece(lo, hi, tuple(float(v) for v in npoly.polyfromroots(roots)),
                 tuple(float(r) for r in roots))


def _pieces(rule: str, a: float, b: float) -> list[Piece]:
    c = (a + b) / 2
    if rule == "trapezoid":
        # [x - c]^2 - (b - a)^2 / 4 == (x - a)(x - b)
        return [_monic(a, b, [a, b])]
    if rule == "corrected_trapezoid":
        # [x - c]^2 - (b - a)^2 / 16, roots c -+ (b - a)/4
        return [_monic(a, b, [(3 * a + b) / 4, (a + 3 * b) / 4])]
    if rule == "midpoint":
        return [_monic(a, c, [a, a]), _monic(c, b, [b, b])]
    if rule == "simpson":
        return [_monic(a, c, [a, a, a, a / 3 + 2 * b / 3]),
                _monic(c, b, [b, b, b, 2 * a / 3 + b / 3])]
    if rule == "first_order_trapezoid":
        return [_monic(a, b, [c])]
    # first_order_midpoint
    return [_monic(a, c, [a]), _monic(c, b, [b])]


def kernel_for(rule: str, interval: Sequence[float]) -> KernelSpec:
    """The error kernel of the simple `rule` on `interval`."""
    _check_rule(rule)
    a, b = _check_interval(*interval)
    return KernelSpec(rule, a, b, ORDER[rule], tuple(_pieces(rule, a, b)), ((a, b),))


def composite_kernel(rule: str, cells: Sequence[Sequence[float]]) -> KernelSpec:
    """Concatenate simple kernels over adjacent cells ``[(t0, t1), (t1, t2), ...]``."""
    _check_rule(rule)
    cells = [_check_interval(lo, hi) for lo, hi in cells]
    if not cells:
        raise ValueError("need at least one cell")
    for (_, hi), (lo, _) in zip(cells, cells[1:]):
        if hi != lo:
            raise ValueError("cells must be adjacent")
    pieces = tuple(p for lo, hi in cells for p in _pieces(rule, lo, hi))
    return KernelSpec(rule, cells[0][0], cells[-1][1], ORDER[rule], pieces, tuple(cells))


def representation_sign(order: int) -> int:
    """s in  exact = rule + s/m! * integral f^(m) p  (m integrations by parts)."""
    return -1 if order % 2 else 1


# -- norms -----------------------------------------------------------------

def _cell_sum(k: KernelSpec, const: Fraction, power: int) -> float:
    c = float(const)
    terms = [c * (hi - lo) ** power for lo, hi in k.cells]
    return math.fsum(terms)


def kernel_l1_norm(k: KernelSpec) -> float:
    """Exact integral of |p| over [a, b] from the per-rule closed forms."""
    return _cell_sum(k, _L1[k.rule], k.order + 1)


def _sup_abs(k: KernelSpec) -> float:
    best = 0.0
    for piece in k.pieces:
        local = piece.local()
        w = piece.hi - piece.lo
        crit = local.deriv().roots() if local.degree() > 1 else np.array([])
        ts = [0.0, w] + [t.real for t in np.atleast_1d(crit)
                         if abs(t.imag) <= 1e-12 * max(1.0, w) and 0.0 < t.real < w]
        best = max(best, max(abs(local(t)) for t in ts))
    return float(best)


def _numeric_s_norm(k: KernelSpec, s: float) -> float:
    total = 0.0
    for piece in k.pieces:
        local = piece.local()
        w = piece.hi - piece.lo
        # sign changes only at the construction roots; split there
        cuts = sorted({0.0, w, *(r - piece.lo for r in piece.roots if piece.lo < r < piece.hi)})
        for lo, hi in zip(cuts, cuts[1:]):
            val, _ = integrate.quad(lambda t: abs(local(t)) ** s, lo, hi,
                                    epsabs=0.0, epsrel=1e-13, limit=200)
            total += val
    return total ** (1.0 / s)


def _check_s(s: float) -> float:
    s = float(s)
    if math.isnan(s) or s < 1.0:
        raise ValueError(f"norm exponent must satisfy s >= 1 or s = inf, got {s!r}")
    return s


def kernel_s_norm(k: KernelSpec, s: float = 1.0) -> float:
    """||p||_s on [a, b] for ``1 <= s <= inf``."""
    s = _check_s(s)
    if s == 1.0:
        return kernel_l1_norm(k)
    if s == 2.0:
        return math.sqrt(_cell_sum(k, _L2SQ[k.rule], 2 * k.order + 1))
    if math.isinf(s):
        return _sup_abs(k)
    return _numeric_s_norm(k, s)


def conjugate_exponent(s: float) -> float:
    """r with 1/r + 1/s = 1."""
    s = _check_s(s)
    if s == 1.0:
        return math.inf
    if math.isinf(s):
        return 1.0
    return s / (s - 1.0)


def error_bound(k: KernelSpec, derivative_norm: float, s: float = 1.0,
                r: float | None = None) -> float:
    """A-priori bound ``||f^(m)||_r * ||p||_s / m!``.

    `derivative_norm` is the r-norm of the m-th derivative; if `r` is given it
    must be conjugate to `s`.
    """
    s = _check_s(s)
    if r is not None:
        r = float(r)
        inv = (0.0 if math.isinf(r) else 1.0 / r) + (0.0 if math.isinf(s) else 1.0 / s)
        if r < 1.0 or abs(inv - 1.0) > 1e-12:
            raise ValueError(f"exponents r={r!r}, s={s!r} are not conjugate")
    if not derivative_norm >= 0.0:
        raise ValueError(f"derivative norm must be non-negative, got {derivative_norm!r}")
    if derivative_norm == 0.0:
        return 0.0
    return derivative_norm * kernel_s_norm(k, s) / k.divisor


# -- optimal monic kernels -------------------------------------------------

def quadratic_l1(a: float, b: float, alpha, gamma):
    """Integral over [a, b] of |(x - alpha)^2 - gamma^2|; vectorised in alpha, gamma."""
    alpha = np.asarray(alpha, dtype=float)
    gamma = np.abs(np.asarray(gamma, dtype=float))
    lo, hi = a - alpha, b - alpha
    g2 = gamma * gamma

    def anti(t):
        return t * t * t / 3.0 - g2 * t

    t1 = np.clip(-gamma, lo, hi)
    t2 = np.clip(gamma, lo, hi)
    out = (np.abs(anti(t1) - anti(lo)) + np.abs(anti(t2) - anti(t1))
           + np.abs(anti(hi) - anti(t2)))
    return out if out.ndim else float(out)


class QuadraticMinimum(NamedTuple):
    alpha: float
    gamma: float
    value: float
    grid_value: float  # smallest objective seen on the certificate grid
    certified: bool


class LinearMinimum(NamedTuple):
    c: float
    value: float


def optimize_monic_quadratic(a: float, b: float, grid: int = 400) -> QuadraticMinimum:
    """Minimise the L1 norm of (x - alpha)^2 - gamma^2 over [a, b].

    The minimiser has both roots in [a, b], so the search region is the
    triangle a <= alpha <= b, 0 <= gamma <= min(alpha - a, b - alpha).  The
    analytic optimum is returned together with a grid certificate over that
    triangle.
    """
    a, b = _check_interval(a, b)
    alpha = (a + b) / 2
    gamma = (b - a) / 4
    value = (b - a) ** 3 / 16

    al = a + (b - a) * np.arange(grid + 1) / grid
    half = np.minimum(al - a, b - al)
    ga = half[:, None] * (np.arange(grid + 1) / grid)[None, :]
    q = quadratic_l1(a, b, np.broadcast_to(al[:, None], ga.shape), ga)
    grid_value = float(q.min())
    return QuadraticMinimum(alpha, gamma, value, grid_value, grid_value >= value - 1e-9)


def optimize_monic_linear(a: float, b: float) -> LinearMinimum:
    """Minimise the integral of |x - c| over [a, b]: c is the midpoint."""
    a, b = _check_interval(a, b)
    return LinearMinimum((a + b) / 2, (b - a) ** 2 / 4)
