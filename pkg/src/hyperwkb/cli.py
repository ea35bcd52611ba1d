"""Command-line interface: ``hyperwkb <command> [options]``.

Every command writes one JSON object (or CSV rows) to stdout or ``--out``.
Usage errors exit with 2, numeric domain errors with 1 and a structured
error object, and ``verify`` exits 0 exactly when every check passes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import __version__
from .mzvgen import delta2, delta3, u1_at_one
from .opcore import EulerPolynomial
from .series import HyperParams, mzv, pfq_eval, pfq_series, zeta
from .suites import SUITES, run_suite
from .variations import (
    airy_u11,
    bessel_variation_u01,
    first_order_closed_form,
    first_order_perturbation,
    hypergeometric_perturbation,
    v2_variation,
    variation_recurrence,
)
from .wkb import thm3_asymptotic_eval, thm4_eval

SCHEMA = "hyperwkb/1"
MAX_ORDER = 200
MAX_TOL = 1e-2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing


def parse_scalar(text: str) -> complex | float:
    """``"re"`` or ``"re,im"``."""
    parts = [p.strip() for p in str(text).split(",")]
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"cannot parse number {text!r}") from None
    if len(vals) == 1:
        return vals[0]
    if len(vals) == 2:
        return complex(vals[0], vals[1])
    raise UsageError(f"expected 're' or 're,im', got {text!r}")


def _parse_item(text: str):
    text = text.strip().replace(" ", "")
    if not text:
        raise UsageError("empty list entry")
    try:
        return Fraction(text)
    except ValueError:
        pass
    try:
        z = complex(text)
    except ValueError:
        raise UsageError(f"cannot parse list entry {text!r}") from None
    return z.real if z.imag == 0 else z


def parse_list(text: str) -> tuple:
    """Comma-separated entries: rationals ``1/3``, reals, or complex ``0.5+0.2j``."""
    if text is None or not text.strip():
        return ()
    return tuple(_parse_item(p) for p in text.split(","))


def parse_pfq(text: str) -> HyperParams:
    """``"a1,a2;b1"``: upper parameters, a semicolon, lower parameters."""
    if text.count(";") != 1:
        raise UsageError(f"--pfq needs exactly one ';' separating upper and lower parameters, got {text!r}")
    upper, lower = text.split(";")
    return HyperParams(parse_list(upper), parse_list(lower))


def _tol(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid tolerance {text!r}") from None
    if not 0 < v <= MAX_TOL:
        raise argparse.ArgumentTypeError(f"tol must lie in (0, {MAX_TOL}]")
    return v


def _order(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid order {text!r}") from None
    if not 0 <= v <= MAX_ORDER:
        raise argparse.ArgumentTypeError(f"order must lie in [0, {MAX_ORDER}]")
    return v


def _scalar(text):
    try:
        return parse_scalar(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# ---------------------------------------------------------------------------
# JSON encoding


def encode(x):
    """Complex numbers become ``[re, im]``; Fractions keep their exact string."""
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {k: encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    if hasattr(x, "item"):
        return encode(x.item())
    return x


def _value(z):
    z = complex(z)
    return [z.real, z.imag]


# ---------------------------------------------------------------------------
# commands; each returns (payload, rows for csv, exit code)


def cmd_eval(args):
    params = parse_pfq(args.pfq)
    value, err = pfq_eval(params, args.t, tol=args.tol or 1e-14)
    payload = {"params": {"upper": params.upper, "lower": params.lower}, "t": args.t,
               "value": _value(value), "est_error": err, "route": "series"}
    return payload, [{"value_re": payload["value"][0], "value_im": payload["value"][1], "est_error": err,
                      "route": "series"}], 0


def cmd_series(args):
    params = parse_pfq(args.pfq)
    exact = all(isinstance(x, Fraction) for x in params.upper + params.lower)
    s = pfq_series(params, args.order, exact=exact)
    coeffs = list(s.coefficients)
    payload = {"params": {"upper": params.upper, "lower": params.lower}, "order": args.order, "exact": exact,
               "coefficients": coeffs}
    rows = [{"n": n, "coefficient": str(c) if exact else repr(complex(c))} for n, c in enumerate(coeffs)]
    return payload, rows, 0


def cmd_wkb(args):
    if args.pfq is not None:
        params = parse_pfq(args.pfq)
        value = thm3_asymptotic_eval(params, args.t, args.terms)
        payload = {"mode": "confluent", "t": args.t, "terms": args.terms, "value": _value(value),
                   "route": "asymptotic"}
        if args.compare:
            ref, _ = pfq_eval(params, args.t, tol=args.tol or 1e-14)
            payload["series_value"] = _value(ref)
            payload["rel_error"] = abs(value / ref - 1)
    else:
        if args.nus is None or args.A is None:
            raise UsageError("wkb needs --pfq, or --nus with --A (and optionally --betas)")
        nus = parse_list(args.nus)
        q = len(nus) - 1
        betas = parse_list(args.betas) if args.betas else (1,) * q
        if len(betas) != q:
            raise UsageError(f"--betas needs {q} entries")
        value = thm4_eval([complex(x) for x in nus], [float(b) for b in betas], args.A, args.t)
        payload = {"mode": "large_parameter", "t": args.t, "A": args.A, "value": _value(value),
                   "route": "asymptotic"}
    rows = [{"mode": payload["mode"], "value_re": payload["value"][0], "value_im": payload["value"][1]}]
    return payload, rows, 0


def _terms(series):
    return [[x, c] for x, c in series.terms()]


def cmd_variation(args):
    ex = args.example
    if ex == "pfq":
        if args.pfq is None or args.R is None:
            raise UsageError("variation --example pfq needs --pfq and --R")
        params = parse_pfq(args.pfq)
        R = EulerPolynomial(parse_list(args.R))
        s = variation_recurrence(hypergeometric_perturbation(params.upper, params.lower, R), args.k, args.order)[args.k]
    elif ex == "first_order":
        alpha, gamma = Fraction(args.alpha), Fraction(args.gamma)
        s = variation_recurrence(first_order_perturbation(alpha, gamma), 1, args.order)[1]
    elif ex == "airy":
        s = airy_u11(args.order)
    elif ex == "bessel":
        s = bessel_variation_u01(args.order)
    else:
        s = v2_variation(args.order, args.k)
    payload = {"example": ex, "order": args.order, "variable": s.variable, "terms": _terms(s)}
    if args.t is not None:
        payload["t"] = args.t
        payload["value"] = _value(s(args.t))
        if ex == "first_order":
            payload["closed_form"] = first_order_closed_form(args.t, float(alpha), float(gamma))
    rows = [{"exponent": str(x), "coefficient": str(c)} for x, c in s.terms()]
    return payload, rows, 0


def cmd_mzv(args):
    if args.index is not None:
        index = tuple(int(x) for x in parse_list(args.index))
        value = zeta(index[0]) if len(index) == 1 else mzv(index, tol=args.tol or 1e-12)
        payload = {"index": list(index), "value": value, "route": "nested_sum"}
    elif args.delta is not None:
        if args.lam is None:
            raise UsageError("--delta needs --lam")
        fn = delta2 if args.delta == 2 else delta3
        value = fn(args.lam)
        payload = {"delta": args.delta, "lam": args.lam, "value": _value(value), "route": "gamma"}
    elif args.u1 is not None:
        value = u1_at_one(args.u1)
        payload = {"u1_at_one": args.u1, "value": _value(value), "route": "psi"}
    else:
        raise UsageError("mzv needs --index, --delta with --lam, or --u1")
    v = payload["value"]
    rows = [{"value_re": v[0] if isinstance(v, list) else v, "value_im": v[1] if isinstance(v, list) else 0.0}]
    return payload, rows, 0


def _threads():
    try:
        return max(1, int(os.environ.get("HYPERWKB_THREADS", "1")))
    except ValueError:
        return 1


def cmd_verify(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    run = lambda n: run_suite(n, seed=args.seed, qmax=args.qmax)
    workers = min(_threads(), len(names))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            reports = list(pool.map(run, names))
    else:
        reports = [run(n) for n in names]
    reports.sort(key=lambda r: list(SUITES).index(r.suite))
    suites, rows = [], []
    for r in reports:
        checks = []
        for c in r.checks:
            timing = c.name == "budget_seconds"
            measured = c.measured if (args.timings or not timing) else None
            checks.append({"name": c.name, "passed": c.passed, "measured": measured, "op": c.op,
                           "limit": c.limit, "detail": c.detail})
            rows.append({"suite": r.suite, "check": c.name, "passed": c.passed, "measured": measured,
                         "op": c.op, "limit": c.limit})
        suites.append({"suite": r.suite, "passed": r.passed, "checks": checks})
    ok = all(r.passed for r in reports)
    payload = {"seed": args.seed, "qmax": args.qmax, "passed": ok, "suites": suites}
    return payload, rows, 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hyperwkb", description="Hypergeometric series, WKB asymptotics and MZV checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--tol", type=_tol, default=None, help="in (0, 1e-2]; default 1e-14 (mzv: 1e-12)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks, echoed in output")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="evaluate pFq by series")
    e.add_argument("--pfq", required=True, help='"a1,a2;b1" (entries: 1/3, 0.5, 0.5+0.2j)')
    e.add_argument("--t", type=_scalar, required=True, help='"re" or "re,im"')

    s = sub.add_parser("series", parents=[common], help="Taylor coefficients of pFq")
    s.add_argument("--pfq", required=True)
    s.add_argument("--order", type=_order, default=10)

    w = sub.add_parser("wkb", parents=[common], help="WKB asymptotics")
    w.add_argument("--pfq", help="confluent parameters for large-t asymptotics")
    w.add_argument("--t", type=_scalar, required=True)
    w.add_argument("--terms", type=int, default=1, help="amplitude terms")
    w.add_argument("--compare", action="store_true", help="also report the series value")
    w.add_argument("--nus", help="large-parameter nu_j, e.g. \"1,-1\"")
    w.add_argument("--betas", help="large-parameter beta_j")
    w.add_argument("--A", type=float, help="large parameter")

    v = sub.add_parser("variation", parents=[common], help="variations of hypergeometric functions")
    v.add_argument("--example", choices=("pfq", "first_order", "airy", "bessel", "v2"), default="pfq")
    v.add_argument("--pfq")
    v.add_argument("--R", help="coefficients of R(x), lowest degree first")
    v.add_argument("--k", type=int, default=1)
    v.add_argument("--order", type=_order, default=12)
    v.add_argument("--alpha", default="1/2")
    v.add_argument("--gamma", default="1/4")
    v.add_argument("--t", type=_scalar)

    m = sub.add_parser("mzv", parents=[common], help="zeta and multiple zeta values, Delta generating functions")
    m.add_argument("--index", help='"2" or "2,3"')
    m.add_argument("--delta", type=int, choices=(2, 3))
    m.add_argument("--lam", type=_scalar)
    m.add_argument("--u1", type=_scalar, help="lam for the logarithmic solution at t = 1")

    ver = sub.add_parser("verify", parents=[common], help="run verification suites")
    ver.add_argument("--suite", choices=("all", *SUITES), default="all")
    ver.add_argument("--qmax", type=int, default=7, choices=range(1, 8), metavar="{1..7}")
    ver.add_argument("--timings", action="store_true", help="include wall-clock measurements")
    return p


COMMANDS = {
    "eval": cmd_eval,
    "series": cmd_series,
    "wkb": cmd_wkb,
    "variation": cmd_variation,
    "mzv": cmd_mzv,
    "verify": cmd_verify,
}


def _render(fmt, payload, rows) -> str:
    if fmt == "json":
        return json.dumps(encode(payload), sort_keys=False) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: json.dumps(encode(v)) if isinstance(v, (list, tuple, complex)) else v
                             for k, v in r.items()})
    return buf.getvalue()


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    header = {"schema": SCHEMA, "command": args.command, "seed": args.seed}
    try:
        payload, rows, code = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, ArithmeticError, ZeroDivisionError) as exc:
        err = {**header, "error": {"type": type(exc).__name__, "message": str(exc)}}
        _emit(json.dumps(err) + "\n", args.out)
        return 1
    _emit(_render(args.format, {**header, **payload}, rows), args.out)
    return code


def main(argv=None):
    sys.exit(run(argv))
