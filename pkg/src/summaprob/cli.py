"""Command-line front end.

    summaprob eval    --corpus ex-2.2 --method ps --alpha 1 --eps 1/2 --delta 1/2 --grid 100:10:3
    summaprob verdict --corpus ex-2.1 --method ps --alpha 0.6 --eps 1/2 --delta 1/2
    summaprob check   --id thm-2.4
    summaprob liminf  --theta pow2 --window 1:20
    summaprob parse   --scenario file.sumprob --canonical

Exit codes: 0 ok / converges, 2 usage or parse error, 3 fails to converge,
4 inconclusive, 5 check failed, 6 evaluator error.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from fractions import Fraction

from . import corpus as cp
from . import diagnostics as dg
from . import harness
from .dsl import ParseError, ValidationError, parse_scenario, format_scenario
from .errors import EnumerationCapExceeded, InsufficientData, SummaError, UnknownCheckId
from .evaluators import MethodParams
from .expr import format_rational
from .lacunary import theta_from_spec

EXIT_OK, EXIT_USAGE, EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_CHECK, EXIT_EVAL = 0, 2, 3, 4, 5, 6
CSV_COLUMNS = ("abscissa", "value", "method", "alpha", "eps", "delta", "p", "scenario")
METHODS = {"ps": "PS", "pw": "PW", "stheta": "STHETA", "ntheta": "NTHETA"}


class UsageError(Exception):
    pass


def rational(text: str) -> Fraction:
    """num/den or a decimal, read exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _pair(text: str, what: str) -> tuple:
    try:
        a, b = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must look like a:b, got {text!r}") from None
    return a, b


def _grid(text):
    try:
        return dg.GridSpec.parse(text)
    except SummaError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _theta(text):
    try:
        return theta_from_spec(text)
    except SummaError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _param(text):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"--param takes key=value, got {text!r}")
    return key.strip(), value.strip()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="summaprob", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def evaluation(name, help_text):
        p = sub.add_parser(name, help=help_text)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--scenario", metavar="FILE", help=".sumprob scenario file")
        src.add_argument("--corpus", metavar="NAME", choices=cp.NAMES, help="built-in corpus entry")
        p.add_argument("--param", action="append", type=_param, default=[], metavar="KEY=VALUE",
                       help="corpus generator parameter override (repeatable)")
        p.add_argument("--method", required=True, choices=sorted(METHODS))
        p.add_argument("--alpha", type=rational)
        p.add_argument("--p", type=rational)
        p.add_argument("--eps", type=rational)
        p.add_argument("--delta", type=rational)
        p.add_argument("--theta", type=_theta, metavar="SPEC",
                       help="pow2, pow:B, fact_even, fact_odd, ratio:JMAX, list:1,2,4")
        where = p.add_mutually_exclusive_group()
        where.add_argument("--grid", type=_grid, metavar="N0:RATIO:POINTS")
        where.add_argument("--blocks", type=lambda t: _pair(t, "--blocks"), metavar="R0:R1")
        p.add_argument("--out", metavar="PATH")
        return p

    evaluation("eval", "write a profile as CSV")
    v = evaluation("verdict", "classify a profile")
    v.add_argument("--tol", type=float, default=1e-3)
    v.add_argument("--slope-min", type=float, default=0.05)

    c = sub.add_parser("check", help="run theorem checks")
    which = c.add_mutually_exclusive_group(required=True)
    which.add_argument("--id", metavar="CHECKID")
    which.add_argument("--all", action="store_true")

    lim = sub.add_parser("liminf", help="minimum of q_r over a window")
    lim.add_argument("--theta", type=_theta, required=True, metavar="SPEC")
    lim.add_argument("--window", type=lambda t: _pair(t, "--window"), required=True, metavar="R0:R1")

    ps = sub.add_parser("parse", help="validate a scenario file")
    ps.add_argument("--scenario", required=True, metavar="FILE")
    ps.add_argument("--canonical", action="store_true", help="print the canonical form")
    return parser


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(args):
    """(target for sampling, Scenario)."""
    if args.scenario:
        if args.param:
            raise UsageError("--param applies to --corpus entries only")
        scenario = parse_scenario(_read(args.scenario))
        return scenario, scenario
    entry = cp.get_entry(args.corpus, dict(args.param))
    return entry, entry.scenario


def _method_params(args, scenario) -> MethodParams:
    def pick(name, default):
        value = getattr(args, name)
        if value is None:
            value = scenario.param(name, default)
        return value

    return MethodParams(pick("alpha", Fraction(1)), pick("eps", Fraction(1, 2)),
                        pick("delta", Fraction(1, 2)), pick("p", Fraction(1)))


def _profile(args):
    target, scenario = _load(args)
    method = METHODS[args.method]
    params = _method_params(args, scenario)
    if method in dg.LACUNARY_METHODS and args.grid is not None:
        raise UsageError("lacunary methods take --blocks, not --grid")
    if method not in dg.LACUNARY_METHODS and args.blocks is not None:
        raise UsageError("--blocks applies to stheta/ntheta only")
    return dg.sample_profile(target, method, params, args.grid, args.blocks, args.theta), params


def _write(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def profile_csv(profile, method_name, params) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    fixed = [method_name] + [format_rational(getattr(params, k)) for k in ("alpha", "eps", "delta", "p")]
    for x, v in profile.rows():
        writer.writerow([x, format(v, ".17g")] + fixed + [profile.scenario])
    return buf.getvalue()


def cmd_eval(args):
    profile, params = _profile(args)
    for x, reason in profile.gaps:
        print(f"skipped {profile.abscissa_kind}={x}: {reason}", file=sys.stderr)
    _write(profile_csv(profile, args.method, params), args.out)
    return EXIT_OK


def cmd_verdict(args):
    profile, _ = _profile(args)
    try:
        v = dg.classify(profile, args.tol, args.slope_min)
    except InsufficientData as exc:
        print(f"Inconclusive: {exc}")
        return EXIT_INCONCLUSIVE
    _write(f"{v.cls} slope={v.slope:.17g} last={v.last_value:.17g} points={len(profile.values)}"
           f" ({v.evidence})\n", args.out)
    return {dg.CONVERGES: EXIT_OK, dg.FAILS: EXIT_FAILS}.get(v.cls, EXIT_INCONCLUSIVE)


def cmd_check(args):
    ids = sorted(harness.CHECKS) if args.all else [args.id]
    if not args.all and args.id not in harness.CHECKS:
        raise UnknownCheckId(args.id)
    failed = False
    for cid in ids:
        report = harness.run_check(cid)
        print(report.line())
        for d in report.details:
            print(f"  note: {d}")
        for w in report.witnesses:
            print(f"  witness: {w.describe()}")
        print(f"{cid}: {report.runtime:.2f}s", file=sys.stderr)
        failed |= report.outcome == "fail"
    return EXIT_CHECK if failed else EXIT_OK


def cmd_liminf(args):
    r0, r1 = args.window
    print(format_rational(dg.liminf_q(args.theta, r0, r1)))
    return EXIT_OK


def cmd_parse(args):
    scenario = parse_scenario(_read(args.scenario))
    if args.canonical:
        print(format_scenario(scenario))
    else:
        print(f"ok: scenario {scenario.name!r}")
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "verdict": cmd_verdict, "check": cmd_check, "liminf": cmd_liminf,
            "parse": cmd_parse}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        return COMMANDS[args.command](args)
    except (ParseError, ValidationError) as exc:
        where = getattr(args, "scenario", None) or "<input>"
        print(f"{where}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, UnknownCheckId) as exc:
        print(f"summaprob: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SummaError, EnumerationCapExceeded, KeyError, ValueError) as exc:
        print(f"summaprob: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_EVAL
    finally:
        print(f"elapsed {time.perf_counter() - started:.3f}s", file=sys.stderr)


run_cli = main
