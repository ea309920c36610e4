"""Command-line interface.

Exit status: 0 success, 2 usage error, 3 numerical failure (non-convergence,
failed certification, or a failing identity in ``verify``).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence, TextIO

from .cache import CacheError, ResultCache
from .constants import KINDS, METHODS, ConstantRequest, compute, constants_table
from .errors import DomainError, NumericalFailure
from .euler_maclaurin import asymptotic_polys
from .exact import (
    b_coeff,
    b_poly,
    bernoulli_number,
    faulhaber_poly,
    format_rational,
    r_hat,
    r_n,
    tilde_a,
)
from .verify import format_reports, reports_to_json, run_suite

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

MAX_DIGITS = 10000
COEFF_KINDS = ("bernoulli", "b", "r", "r_hat", "tilde_a", "A", "B", "faulhaber", "b_poly")


class UsageError(Exception):
    pass


def _fraction_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--digits", type=int, default=30, help="decimal digits (1..10000, default 30)")
    common.add_argument("--format", choices=("plain", "json"), default="plain")

    parser = argparse.ArgumentParser(
        prog="stirling-ramanujan",
        description="Stirling-Ramanujan constants as certified exponential-period integrals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constant", parents=[common], help="compute one constant")
    p.add_argument("--kind", choices=KINDS, default="S")
    p.add_argument("--n", type=int, default=None, help="index n (or m for zeta)")
    p.add_argument("--method", choices=METHODS, default="both")
    p.add_argument("--cache", metavar="PATH", default=None, help="JSON result cache")
    p.add_argument("--crossover", type=_fraction_arg, default=Fraction(1),
                   help="series/direct switch point t0 in (0, 2 pi)")
    p.add_argument("--series-terms", type=int, default=None, help="minimum series terms")

    p = sub.add_parser("table", parents=[common], help="S_n for n = -1..max_n by both methods")
    p.add_argument("--max-n", type=int, default=3)

    sub.add_parser("verify", parents=[common], help="run the identity suite")

    p = sub.add_parser("coeffs", parents=[common], help="exact rational coefficients")
    p.add_argument("--what", choices=COEFF_KINDS, required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--max-n", type=int, default=None)

    p = sub.add_parser("cache", help="inspect or clear a result cache")
    p.add_argument("action", choices=("list", "clear"))
    p.add_argument("--cache", metavar="PATH", required=True)
    p.add_argument("--format", choices=("plain", "json"), default="plain")
    return parser


def _check_digits(args) -> None:
    if not 1 <= args.digits <= MAX_DIGITS:
        raise UsageError(f"--digits must lie in [1, {MAX_DIGITS}], got {args.digits}")


def _emit_json(doc, out: TextIO) -> None:
    out.write(json.dumps(doc, indent=2) + "\n")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_constant(args, out: TextIO) -> int:
    _check_digits(args)
    n = args.n
    if n is None:
        if args.kind in ("gamma", "glaisher_log"):
            n = -1 if args.kind == "gamma" else 1
        else:
            raise UsageError(f"--n is required for --kind {args.kind}")
    try:
        req = ConstantRequest(args.kind, n, args.digits, args.method, args.crossover, args.series_terms)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    if args.series_terms is not None and args.series_terms < 1:
        raise UsageError("--series-terms must be positive")

    cache = ResultCache(args.cache) if args.cache else None
    entry = cache.get(req.key) if cache else None
    if entry is not None:
        record = {
            "kind": req.kind, "n": req.n, "digits": req.digits, "method": req.method,
            "value": entry["value"], "error_bound": entry["error_bound"],
            "nodes": None, "truncation_T": None, "cache": "hit",
        }
    else:
        try:
            result = compute(req)
        except DomainError as exc:
            raise UsageError(str(exc)) from exc
        record = result.to_record()
        em = result.provenance.get("euler_maclaurin")
        if em is not None:
            record["euler_maclaurin"] = em["value"]
            record["discrepancy"] = em["discrepancy"]
        if cache:
            cache.put(req.key, record["value"], record["error_bound"])
            record["cache"] = "miss"

    if args.format == "json":
        _emit_json(record, out)
        return EXIT_OK
    out.write(record["value"] + "\n")
    out.write(f"kind: {record['kind']}  n: {record['n']}  digits: {record['digits']}  method: {record['method']}\n")
    out.write(f"error_bound: {record['error_bound']}\n")
    if "euler_maclaurin" in record:
        out.write(f"euler_maclaurin: {record['euler_maclaurin']}\n")
        out.write(f"discrepancy: {record['discrepancy']}\n")
    if record.get("nodes") is not None:
        out.write(f"nodes: {record['nodes']}  truncation_T: {record['truncation_T']}\n")
    if "cache" in record:
        out.write(f"cache: {record['cache']}\n")
    return EXIT_OK


def cmd_table(args, out: TextIO) -> int:
    _check_digits(args)
    if args.max_n < 0:
        raise UsageError(f"--max-n must be >= 0, got {args.max_n}")
    rows = constants_table(args.max_n, args.digits)
    worst = max(r.discrepancy for r in rows)
    if args.format == "json":
        _emit_json(
            {
                "digits": args.digits,
                "rows": [r.to_record() for r in rows],
                "max_discrepancy": worst.to_sci(3),
            },
            out,
        )
        return EXIT_OK
    cells = [("n", "integral", "euler_maclaurin", "discrepancy")]
    for r in rows:
        cells.append((str(r.n), r.integral.decimal, r.euler_maclaurin.decimal, r.discrepancy.to_sci(3)))
    widths = [max(len(c[i]) for c in cells) for i in range(4)]
    for c in cells:
        out.write("  ".join(x.rjust(w) for x, w in zip(c, widths)) + "\n")
    out.write(f"max discrepancy: {worst.to_sci(3)}\n")
    return EXIT_OK


def cmd_verify(args, out: TextIO) -> int:
    _check_digits(args)
    if args.digits < 4:
        raise UsageError("verify needs --digits >= 4 (tolerance is 10^-(digits-3))")
    reports = run_suite(args.digits)
    if args.format == "json":
        out.write(reports_to_json(reports, places=args.digits) + "\n")
    else:
        out.write(format_reports(reports) + "\n")
        failed = sum(not r.passed for r in reports)
        out.write(f"{len(reports) - failed}/{len(reports)} passed\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_NUMERICAL


def _need(value: Optional[int], flag: str, what: str, lo: int = 0) -> int:
    if value is None:
        raise UsageError(f"--what {what} needs {flag}")
    if value < lo:
        raise UsageError(f"{flag} must be >= {lo} for --what {what}, got {value}")
    return value


def cmd_coeffs(args, out: TextIO) -> int:
    what = args.what
    values: Optional[list[str]] = None
    poly = None
    if what == "bernoulli":
        m = _need(args.max_n, "--max-n", what)
        values = [format_rational(bernoulli_number(k)) for k in range(m + 1)]
    elif what == "b":
        m = _need(args.max_n, "--max-n", what, -1)
        values = [format_rational(b_coeff(k)) for k in range(-1, m + 1)]
    elif what == "r":
        m = _need(args.max_n, "--max-n", what)
        values = [format_rational(r_n(k)) for k in range(m + 1)]
    elif what == "r_hat":
        m = _need(args.max_n, "--max-n", what)
        values = [format_rational(r_hat(k)) for k in range(m + 1)]
    elif what == "tilde_a":
        n = _need(args.n, "--n", what)
        values = [format_rational(tilde_a(n, j)) for j in range(n + 2)]
    elif what in ("A", "B"):
        n = _need(args.n, "--n", what)
        exp = asymptotic_polys(n)
        poly = exp.A if what == "A" else exp.B
    elif what == "faulhaber":
        poly = faulhaber_poly(_need(args.n, "--n", what))
    else:
        poly = b_poly(_need(args.n, "--n", what))

    if args.format == "json":
        doc: dict = {"what": what}
        if values is not None:
            if what == "tilde_a":
                doc["n"] = args.n
            else:
                doc["max_n"] = args.max_n
            doc["values"] = values
        else:
            doc["n"] = args.n
            doc["polynomial"] = poly.format()
            doc["coefficients"] = [format_rational(c) for c in poly.coeffs]
        _emit_json(doc, out)
    elif values is not None:
        out.write(", ".join(values) + "\n")
    else:
        out.write(poly.format() + "\n")
    return EXIT_OK


def cmd_cache(args, out: TextIO) -> int:
    cache = ResultCache(args.cache)
    if args.action == "clear":
        count = cache.clear()
        if args.format == "json":
            _emit_json({"cleared": count}, out)
        else:
            out.write(f"cleared {count} entries\n")
        return EXIT_OK
    entries = cache.entries()
    if args.format == "json":
        _emit_json(entries, out)
    else:
        for key in sorted(entries):
            e = entries[key]
            out.write(f"{key}  {e['value']}  (error {e['error_bound']}, {e['created_at']})\n")
    return EXIT_OK


COMMANDS = {
    "constant": cmd_constant,
    "table": cmd_table,
    "verify": cmd_verify,
    "coeffs": cmd_coeffs,
    "cache": cmd_cache,
}


def main(argv: Optional[Sequence[str]] = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except CacheError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except NumericalFailure as exc:
        err.write(f"numerical failure [{exc.code}]: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
