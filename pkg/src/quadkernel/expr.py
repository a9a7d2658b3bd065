"""Univariate expression trees: parsing, evaluation and symbolic differentiation.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'x' | NAME '(' expr ')' | '(' expr ')'

so ``-x^2`` reads as ``-(x^2)`` and ``2^-1`` as ``2^(-1)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "Expression", "Const", "Var", "Unary", "Binary",
    "ExpressionError", "ParseError", "DomainError", "NonDifferentiableError",
    "parse", "evaluate", "evaluate_array", "differentiate", "unparse",
    "is_constant", "FUNCTIONS",
]

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs")


class ExpressionError(ValueError):
    pass


class ParseError(ExpressionError):
    """Syntax error or unknown identifier; ``offset`` is the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class DomainError(ExpressionError, ArithmeticError):
    pass


class NonDifferentiableError(ExpressionError):
    pass


# -- tree ------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ExpressionError(f"non-finite constant {self.value!r}")
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or one of FUNCTIONS
    arg: "Expression"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


Expression = Union[Const, Var, Unary, Binary]

X = Var()
ZERO = Const(0.0)
ONE = Const(1.0)


def is_constant(e: Expression) -> bool:
    """True if `e` does not depend on x."""
    if isinstance(e, Const):
        return True
    if isinstance(e, Var):
        return False
    if isinstance(e, Unary):
        return is_constant(e.arg)
    return is_constant(e.left) and is_constant(e.right)


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        if not text[pos].isascii():
            raise ParseError(f"non-ASCII character {text[pos]!r}", pos)
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, text, offset = self.take()
        if text != value or kind != "op":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", offset)

    def expr(self) -> Expression:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expression:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            arg = self.unary()
            return Const(-arg.value) if isinstance(arg, Const) else Unary("neg", arg)
        if kind == "op" and text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        kind, text, offset = self.take()
        if kind == "num":
            return Const(float(text))
        if kind == "name":
            if text == "x":
                return X
            if text not in FUNCTIONS:
                raise ParseError(f"unknown identifier {text!r}", offset)
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Unary(text, arg)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {found}", offset)


def parse(text: str) -> Expression:
    """Parse infix text such as ``"exp(-x^2)/(1+x)"`` into an expression tree."""
    p = _Parser(text)
    node = p.expr()
    kind, tok, offset = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {tok!r}", offset)
    return node


# -- unparsing -------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(e: Expression) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary) and e.op == "neg":
        return _PREC["neg"]
    return 5  # atoms; negative constants are parenthesised by unparse itself


def unparse(e: Expression) -> str:
    """Text form that :func:`parse` maps back to an equivalent tree."""
    if isinstance(e, Const):
        s = repr(e.value)
        return f"({s})" if s.startswith("-") else s
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Unary):
        if e.op == "neg":
            inner = unparse(e.arg)
            return f"-({inner})" if _prec(e.arg) < _PREC["neg"] else f"-{inner}"
        return f"{e.op}({unparse(e.arg)})"
    p = _PREC[e.op]
    left, right = unparse(e.left), unparse(e.right)
    if e.op == "^":
        if _prec(e.left) <= p:
            left = f"({left})"
        if _prec(e.right) < p:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) < p or (_prec(e.right) == p and e.op in "-/"):
        right = f"({right})"
    return f"{left} {e.op} {right}"


# -- scalar evaluation -----------------------------------------------------

def _log(u: float) -> float:
    if u <= 0.0:
        raise DomainError(f"log of non-positive value {u!r}")
    return math.log(u)


def _sqrt(u: float) -> float:
    if u < 0.0:
        raise DomainError(f"sqrt of negative value {u!r}")
    return math.sqrt(u)


def _exp(u: float) -> float:
    try:
        return math.exp(u)
    except OverflowError:
        raise DomainError(f"exp overflow at {u!r}") from None


def _div(u: float, v: float) -> float:
    if v == 0.0:
        raise DomainError("division by zero")
    return u / v


def _pow(u: float, v: float) -> float:
    if u == 0.0 and v < 0.0:
        raise DomainError("zero raised to a negative power")
    if u < 0.0 and not float(v).is_integer():
        raise DomainError(f"negative base {u!r} with non-integer exponent")
    try:
        r = u ** int(v) if float(v).is_integer() else u ** v
    except OverflowError:
        raise DomainError("overflow in power") from None
    return float(r)


_SCALAR_UNARY: dict[str, Callable[[float], float]] = {
    "neg": lambda u: -u,
    "sin": math.sin,
    "cos": math.cos,
    "exp": _exp,
    "log": _log,
    "sqrt": _sqrt,
    "abs": abs,
}

_SCALAR_BINARY: dict[str, Callable[[float, float], float]] = {
    "+": lambda u, v: u + v,
    "-": lambda u, v: u - v,
    "*": lambda u, v: u * v,
    "/": _div,
    "^": _pow,
}


def _compile(e: Expression) -> Callable[[float], float]:
    # the closure is memoised on the (immutable) node; it is not a dataclass field
    fn = e.__dict__.get("_fn")
    if fn is not None:
        return fn
    if isinstance(e, Const):
        c = e.value
        fn = lambda x: c  # noqa: E731
    elif isinstance(e, Var):
        fn = lambda x: x  # noqa: E731
    elif isinstance(e, Unary):
        op, arg = _SCALAR_UNARY[e.op], _compile(e.arg)
        fn = lambda x: op(arg(x))  # noqa: E731
    else:
        op, left, right = _SCALAR_BINARY[e.op], _compile(e.left), _compile(e.right)
        fn = lambda x: op(left(x), right(x))  # noqa: E731
    object.__setattr__(e, "_fn", fn)
    return fn


def evaluate(e: Expression, x: float) -> float:
    """Evaluate `e` at `x`; domain violations raise :class:`DomainError`."""
    value = _compile(e)(float(x))
    if not math.isfinite(value):
        raise DomainError(f"non-finite value at x={x!r}")
    return value


# -- vectorised evaluation -------------------------------------------------

def _array_eval(e: Expression, xs: np.ndarray) -> np.ndarray:
    # invalid entries are carried as NaN
    if isinstance(e, Const):
        return np.full_like(xs, e.value)
    if isinstance(e, Var):
        return xs
    if isinstance(e, Unary):
        u = _array_eval(e.arg, xs)
        if e.op == "neg":
            return -u
        if e.op == "log":
            return np.where(u > 0, np.log(np.where(u > 0, u, 1.0)), np.nan)
        if e.op == "sqrt":
            return np.where(u >= 0, np.sqrt(np.where(u >= 0, u, 0.0)), np.nan)
        return getattr(np, e.op)(u)
    u = _array_eval(e.left, xs)
    v = _array_eval(e.right, xs)
    if e.op == "+":
        return u + v
    if e.op == "-":
        return u - v
    if e.op == "*":
        return u * v
    if e.op == "/":
        return np.where(v != 0, u / np.where(v != 0, v, 1.0), np.nan)
    # "^": integer exponents go through integer powers so exact cases stay exact
    if isinstance(e.right, Const) and e.right.value.is_integer():
        k = int(e.right.value)
        if k >= 0:
            return u ** k
        return np.where(u != 0, 1.0 / np.where(u != 0, u, 1.0) ** -k, np.nan)
    bad = ((u == 0) & (v < 0)) | ((u < 0) & (v != np.round(v)))
    return np.where(bad, np.nan, np.power(np.where(bad, 1.0, u), v))


def evaluate_array(e: Expression, xs, strict: bool = True) -> np.ndarray:
    """Evaluate `e` at every point of `xs`.

    With ``strict=False`` points outside the natural domain (or where the
    value overflows) come back as NaN instead of raising.
    """
    xs = np.asarray(xs, dtype=float)
    with np.errstate(all="ignore"):
        out = np.array(_array_eval(e, xs), dtype=float, copy=True)
    bad = ~np.isfinite(out)
    if bad.any():
        if strict:
            where = xs[bad].flat[0]
            raise DomainError(f"expression not defined or overflowed at x={where!r}")
        out[bad] = np.nan
    return out


# -- differentiation -------------------------------------------------------

def _fold(node: Expression) -> Expression:
    if is_constant(node) and not isinstance(node, Const):
        try:
            value = _compile(node)(0.0)
        except (DomainError, ZeroDivisionError, OverflowError, ValueError):
            return node
        if math.isfinite(value):
            return Const(value)
    return node


def _is(e: Expression, value: float) -> bool:
    return isinstance(e, Const) and e.value == value


def _neg(u: Expression) -> Expression:
    if isinstance(u, Const):
        return Const(-u.value)
    if isinstance(u, Unary) and u.op == "neg":
        return u.arg
    return Unary("neg", u)


def _add(u: Expression, v: Expression) -> Expression:
    if _is(u, 0.0):
        return v
    if _is(v, 0.0):
        return u
    return _fold(Binary("+", u, v))


def _sub(u: Expression, v: Expression) -> Expression:
    if _is(v, 0.0):
        return u
    if _is(u, 0.0):
        return _neg(v)
    return _fold(Binary("-", u, v))


def _mul(u: Expression, v: Expression) -> Expression:
    if _is(u, 0.0) or _is(v, 0.0):
        return ZERO
    if _is(u, 1.0):
        return v
    if _is(v, 1.0):
        return u
    if _is(u, -1.0):
        return _neg(v)
    if _is(v, -1.0):
        return _neg(u)
    # keep constants on the left and merge c1*(c2*e)
    if isinstance(v, Const) and not isinstance(u, Const):
        u, v = v, u
    if isinstance(u, Const) and isinstance(v, Binary) and v.op == "*" and isinstance(v.left, Const):
        return _mul(Const(u.value * v.left.value), v.right)
    return _fold(Binary("*", u, v))


def _div_e(u: Expression, v: Expression) -> Expression:
    if _is(u, 0.0):
        return ZERO
    if _is(v, 1.0):
        return u
    return _fold(Binary("/", u, v))


def _pow_e(u: Expression, k: float) -> Expression:
    if k == 0.0:
        return ONE
    if k == 1.0:
        return u
    return _fold(Binary("^", u, Const(k)))


def _d(e: Expression) -> Expression:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Unary):
        u, du = e.arg, _d(e.arg)
        if e.op == "neg":
            return _neg(du)
        if e.op == "sin":
            return _mul(Unary("cos", u), du)
        if e.op == "cos":
            return _neg(_mul(Unary("sin", u), du))
        if e.op == "exp":
            return _mul(e, du)
        if e.op == "log":
            return _div_e(du, u)
        if e.op == "sqrt":
            return _div_e(du, _mul(Const(2.0), e))
        raise NonDifferentiableError(f"cannot differentiate {e.op}()")
    u, v = e.left, e.right
    if e.op == "+":
        return _add(_d(u), _d(v))
    if e.op == "-":
        return _sub(_d(u), _d(v))
    if e.op == "*":
        return _add(_mul(_d(u), v), _mul(u, _d(v)))
    if e.op == "/":
        return _div_e(_sub(_mul(_d(u), v), _mul(u, _d(v))), _pow_e(v, 2.0))
    # "^"
    if isinstance(u, Const) and not isinstance(v, Const):
        if u.value <= 0.0:
            raise NonDifferentiableError(f"c^g(x) needs c > 0, got {u.value!r}")
        return _mul(_mul(e, Const(math.log(u.value))), _d(v))
    if not isinstance(v, Const):
        raise NonDifferentiableError(
            f"only constant exponents or constant bases can be differentiated, got {unparse(e)!r}; "
            "write general powers as exp(g(x)*log(x))")
    k = v.value
    return _mul(_mul(Const(k), _pow_e(u, k - 1.0)), _d(u))


def _simplify(e: Expression) -> Expression:
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Unary):
        arg = _simplify(e.arg)
        return _neg(arg) if e.op == "neg" else _fold(Unary(e.op, arg))
    u, v = _simplify(e.left), _simplify(e.right)
    if e.op == "^" and isinstance(v, Const):
        return _pow_e(u, v.value)
    return {"+": _add, "-": _sub, "*": _mul, "/": _div_e}.get(
        e.op, lambda a, b: _fold(Binary(e.op, a, b)))(u, v)


def differentiate(e: Expression, order: int = 1) -> Expression:
    """Symbolic derivative of the given order.

    Simplification is best effort (constant folding and the 0/1 identities);
    equivalence is by evaluation, not by tree shape.
    """
    if int(order) != order or order < 1:
        raise ValueError(f"order must be a positive integer, got {order!r}")
    out = _simplify(e)
    for _ in range(int(order)):
        out = _d(out)
    return out
