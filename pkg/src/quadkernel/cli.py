"""Command-line front end.

Exit status: 0 success, 1 usage error, 2 numeric or domain failure,
3 harness checks failed.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
import warnings
from typing import Sequence

from . import kernels
from .adaptive import adaptive_integrate
from .composite import (UniformPartition, composite_corrected_trapezoid_fd, composite_rule,
                        composite_rule_first_order)
from .expr import DomainError, Expression, ExpressionError, ParseError, differentiate, evaluate, \
    is_constant, parse
from .harness import (CorpusEntry, SmoothnessWarning, adaptive_simpson, convergence_table,
                      find_entry, rows_to_csv, run_checks, sup_norm)
from .rules import RULES, simple_rule
from .sampling import DivergentNormError

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_HARNESS = 0, 1, 2, 3

_DECIMAL = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _decimal(text: str) -> float:
    if not _DECIMAL.fullmatch(text.strip()):
        raise argparse.ArgumentTypeError(f"expected a decimal literal, got {text!r}")
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"value out of range: {text!r}")
    return value


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return n


def _n_list(text: str) -> list[int]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty n-list")
    return [_positive_int(p.strip()) for p in parts]


def _positive(text: str) -> float:
    value = _decimal(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _nonneg(text: str) -> float:
    value = _decimal(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text!r}")
    return value


def _exponent(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    value = _decimal(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"s must be >= 1 or inf, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quadkernel", description="Quadrature rules with a-priori error bounds.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def interval(sp):
        sp.add_argument("--from", dest="a", type=_decimal, required=True, metavar="A")
        sp.add_argument("--to", dest="b", type=_decimal, required=True, metavar="B")

    def integrand(sp, rules=RULES):
        sp.add_argument("--rule", required=True, choices=rules)
        sp.add_argument("--function", required=True, metavar="F")
        interval(sp)

    sp = sub.add_parser("integrate", help="apply a rule and print value and bound")
    integrand(sp)
    sp.add_argument("--n", type=_positive_int, help="number of subintervals (composite rule)")
    sp.add_argument("--fd-step", type=_positive, metavar="H",
                    help="difference quotients for f' (corrected_trapezoid only)")
    sp.add_argument("--norm", type=_nonneg, help="override ||f^(m)||_inf")
    sp.add_argument("--exact", type=_decimal, help="exact integral, for the true error")

    sp = sub.add_parser("converge", help="convergence table as CSV")
    integrand(sp)
    sp.add_argument("--n-list", type=_n_list, required=True, metavar="N1,N2,...")
    sp.add_argument("--norm", type=_nonneg, help="override ||f^(m)||_inf")
    sp.add_argument("--exact", type=_decimal, help="exact integral")
    sp.add_argument("--output", metavar="PATH", help="write the CSV here instead of stdout")

    sp = sub.add_parser("kernel", help="error kernel pieces and norm")
    sp.add_argument("--rule", required=True, choices=kernels.KERNEL_RULES)
    interval(sp)
    sp.add_argument("--s", type=_exponent, default=1.0, help="norm exponent, >= 1 or inf")

    sp = sub.add_parser("optimize", help="monic quadratic of least L1 norm")
    interval(sp)

    sp = sub.add_parser("adaptive", help="bound-driven adaptive bisection")
    integrand(sp)
    sp.add_argument("--tol", type=_positive, required=True)
    sp.add_argument("--max-evals", type=_positive_int, default=10 ** 6)
    sp.add_argument("--exact", type=_decimal, help="exact integral, for the true error")
    sp.add_argument("--output", metavar="PATH", help="write the partition CSV here")

    sub.add_parser("corpus", help="run the harness checks on the builtin corpus")
    return p


def _fmt(x: float) -> str:
    return repr(float(x))


def _function(text: str) -> Expression:
    try:
        return parse(text)
    except ParseError as exc:
        raise UsageError(f"invalid --function: {exc}") from None


def _exact(args, e: Expression) -> float | None:
    if args.exact is not None:
        return args.exact
    entry = find_entry(args.function, args.a, args.b)
    return None if entry is None else entry.exact_value


def _auto_norm(e: Expression, order: int, a: float, b: float) -> float:
    """||f^(m)||_inf: exact for constant derivatives, else sampled."""
    fm = differentiate(e, order)
    if is_constant(fm):
        return abs(evaluate(fm, a))
    return sup_norm(fm, (a, b))


def _cmd_integrate(args, out, err) -> int:
    e = _function(args.function)
    rule, a, b, n = args.rule, args.a, args.b, args.n
    if args.fd_step is not None and rule != "corrected_trapezoid":
        raise UsageError("--fd-step only applies to --rule corrected_trapezoid")
    if rule == "simpson" and n is not None and n % 2:
        raise UsageError("composite simpson needs an even --n")
    if args.fd_step is not None and not args.fd_step < b - a:
        raise UsageError("--fd-step must be smaller than the interval")
    m = kernels.ORDER[rule]
    first_order = False
    norm = args.norm
    if norm is None:
        try:
            norm = _auto_norm(e, m, a, b)
        except DivergentNormError as exc:
            print(f"warning: ||f^({m})|| looks unbounded ({exc}); using the first-order bound",
                  file=err)
            norm, first_order = _auto_norm(e, 1, a, b), True
    if first_order:
        cells = n if n is not None else (2 if rule == "simpson" else 1)
        est = composite_rule_first_order(rule, e, UniformPartition(a, b, cells), norm)
    elif args.fd_step is not None:
        est = composite_corrected_trapezoid_fd(e, UniformPartition(a, b, n or 1), norm, args.fd_step)
    elif n is None:
        est = simple_rule(rule, e, (a, b), norm)
    else:
        est = composite_rule(rule, e, UniformPartition(a, b, n), norm)
    lines = [f"value={_fmt(est.value)}", f"bound={_fmt(est.error_bound)}",
             f"order={est.order}", f"norm={_fmt(est.derivative_norm)}"]
    exact = _exact(args, e)
    if exact is not None:
        lines.append(f"true_error={_fmt(abs(est.value - exact))}")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_converge(args, out, err) -> int:
    e = _function(args.function)
    if args.rule == "simpson" and any(n % 2 for n in args.n_list):
        raise UsageError("composite simpson needs even n in --n-list")
    entry = None if args.exact is not None else find_entry(args.function, args.a, args.b)
    if entry is None:
        exact = args.exact
        if exact is None:
            exact = adaptive_simpson(lambda x: evaluate(e, x), args.a, args.b, tol=1e-13)
            print(f"note: no exact value known; using the numerical reference {exact!r}", file=err)
        entry = CorpusEntry(args.function, args.function, args.a, args.b, repr(float(exact)))
    norm = args.norm
    if norm is None:
        fm = differentiate(e, kernels.ORDER[args.rule])
        if is_constant(fm):
            norm = abs(evaluate(fm, args.a))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SmoothnessWarning)
        rows = convergence_table(args.rule, entry, args.n_list, norm)
    for w in caught:
        print(f"warning: {w.message}", file=err)
    text = rows_to_csv(rows)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def _cmd_kernel(args, out, err) -> int:
    k = kernels.kernel_for(args.rule, (args.a, args.b))
    lines = [f"rule={k.rule}", f"order={k.order}",
             "breakpoints=" + ",".join(_fmt(x) for x in k.breakpoints)]
    for piece in k.pieces:
        lines.append(f"piece=[{_fmt(piece.lo)},{_fmt(piece.hi)}] coefficients="
                     + ",".join(_fmt(c) for c in piece.coeffs))
    s = "inf" if math.isinf(args.s) else _fmt(args.s)
    lines.append(f"norm_s={s} value={_fmt(kernels.kernel_s_norm(k, args.s))}")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_optimize(args, out, err) -> int:
    res = kernels.optimize_monic_quadratic(args.a, args.b)
    out.write(f"alpha={_fmt(res.alpha)} gamma={_fmt(res.gamma)} min={_fmt(res.value)}\n")
    return EXIT_OK


def _cmd_adaptive(args, out, err) -> int:
    e = _function(args.function)
    res = adaptive_integrate(args.rule, e, (args.a, args.b), args.tol, args.max_evals)
    est = res.estimate
    lines = [f"value={_fmt(est.value)}", f"bound={_fmt(est.error_bound)}",
             f"converged={'true' if res.converged else 'false'}",
             f"evaluations={est.evaluations}", f"subintervals={len(res.partition)}"]
    exact = _exact(args, e)
    if exact is not None:
        lines.append(f"true_error={_fmt(abs(est.value - exact))}")
    csv = res.partition.to_csv()
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csv)
        out.write("\n".join(lines) + "\n")
    else:
        out.write("\n".join(lines) + "\n\n" + csv)
    if not res.converged:
        print(f"error: tolerance not reached within {args.max_evals} evaluations", file=err)
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_corpus(args, out, err) -> int:
    checks = run_checks()
    lines = [f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f" ({c.detail})" if c.detail else "")
             for c in checks]
    passed = sum(c.passed for c in checks)
    lines.append(f"{passed}/{len(checks)} checks passed")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK if passed == len(checks) else EXIT_HARNESS


_COMMANDS = {"integrate": _cmd_integrate, "converge": _cmd_converge, "kernel": _cmd_kernel,
             "optimize": _cmd_optimize, "adaptive": _cmd_adaptive, "corpus": _cmd_corpus}


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
        if hasattr(args, "a") and not args.a < args.b:
            raise UsageError(f"need --from < --to, got {args.a!r} and {args.b!r}")
        return _COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        err.write(parser.format_usage())
        print(exc, file=err)
        return EXIT_USAGE
    except (DomainError, DivergentNormError, ExpressionError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())
