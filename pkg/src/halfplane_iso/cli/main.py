"""halfplane-iso: classify rational self-maps of the upper half-plane and
run the numerical oracles from the command line.

Every command writes one JSON report to stdout; diagnostics go to stderr.
Exit codes: 0 verdict produced, 2 invalid symbol, 3 input or parse error,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
import time
from typing import Callable, Sequence

import numpy as np

from .. import __version__
from ..classify import (
    ClassificationInconsistency,
    NagyBound,
    Verdict,
    WitnessSearchError,
    classify,
    is_self_map,
)
from ..conformal import (
    OuterQuadratureError,
    boundary_unimodular_measure,
    conjugate_symbol,
    is_finite_blaschke,
    is_inner_halfplane,
    maps_disc_into_disc,
    weight,
)
from ..config import DEFAULT, ConfigError, Tolerances, load_config
from ..oracle import (
    SEED_ENV,
    battery,
    equivalence_check,
    measure_preservation_check,
    nagy_probe,
)
from ..ratfunc import (
    DegreeOverflowError,
    PartialFractionError,
    RationalMap,
    RootFindingError,
    evaluate,
)
from .expr import ExprSyntaxError, LoweringError, coefficients, format_map, parse_map
from .report import dumps

EXIT_OK = 0
EXIT_INVALID_SYMBOL = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4

TOOL = "halfplane-iso"

NUMERICAL_ERRORS = (
    RootFindingError,
    PartialFractionError,
    WitnessSearchError,
    ClassificationInconsistency,
    OuterQuadratureError,
    FloatingPointError,
    ArithmeticError,
)


class InvalidSymbol(Exception):
    """The command needs a self-map (or inner map) and the input is not one."""

    def __init__(self, message: str, evidence: dict):
        super().__init__(message)
        self.evidence = evidence


@dataclasses.dataclass
class Outcome:
    result: dict
    code: int = EXIT_OK


# ------------------------------------------------------------------ commands


def _positive(x: float, name: str) -> float:
    if not (x > 0 and math.isfinite(x)):
        raise ValueError(f"{name} must be a positive finite number")
    return x


def _p(x: float) -> float:
    if not (x >= 1 and math.isfinite(x)):
        raise ValueError("p must lie in [1, inf)")
    return x


def cmd_classify(r: RationalMap, args, tol: Tolerances) -> Outcome:
    rep = classify(r, _p(args.p), tol)
    code = EXIT_INVALID_SYMBOL if rep.verdict is Verdict.INVALID_SYMBOL else EXIT_OK
    result: dict = {"report": rep}
    if rep.witness is not None:
        result["witness_value"] = evaluate(r, rep.witness, tol)
    return Outcome(result, code)


def _require_self_map(r: RationalMap, tol: Tolerances) -> None:
    sm = is_self_map(r, tol)
    if not sm.self_map:
        raise InvalidSymbol(
            "symbol is not a self-map of the upper half-plane",
            {"witness": sm.witness, "reason": sm.reason},
        )


def cmd_measure(r: RationalMap, args, tol: Tolerances) -> Outcome:
    test = is_inner_halfplane(r, tol)
    if not test.inner:
        raise InvalidSymbol(
            "measure preservation needs an inner symbol",
            {"x": test.evidence, "r(x)": test.evidence_value},
        )
    rep = measure_preservation_check(r, battery(args.battery), threshold=args.threshold, tol=tol)
    return Outcome({"report": rep})


def cmd_nagy(r: RationalMap, args, tol: Tolerances) -> Outcome:
    if args.n < 0:
        raise ValueError("--n must be non-negative")
    _require_self_map(r, tol)
    rep = nagy_probe(r, _p(args.p), battery(args.battery), args.n, NagyBound(args.k), tol=tol)
    return Outcome({"report": rep})


def cmd_equiv(r: RationalMap, args, tol: Tolerances) -> Outcome:
    _require_self_map(r, tol)
    rep = equivalence_check(r, _p(args.p), battery(args.battery), threshold=args.threshold, tol=tol)
    return Outcome({"report": rep})


def _sample_points(n: int) -> np.ndarray:
    theta = 2 * np.pi * np.arange(n) / n
    u = np.exp(1j * theta)
    # exact roots of unity where they are representable (z = -1 is the weight's pole)
    u = np.where(np.abs(u.real) < 1e-15, 0, u.real) + 1j * np.where(np.abs(u.imag) < 1e-15, 0, u.imag)
    return np.concatenate([u, 0.5 * u])


def cmd_transfer(r: RationalMap, args, tol: Tolerances) -> Outcome:
    if args.samples < 1:
        raise ValueError("--samples must be positive")
    p = _p(args.p)
    Phi = conjugate_symbol(r, tol)
    rows = []
    for z in _sample_points(args.samples):
        z = complex(z)
        rows.append({"z": z, "Phi": evaluate(Phi, z, tol), "weight": weight(Phi, p, z)})
    result = {
        "Phi": Phi,
        "Phi_text": format_map(Phi),
        "maps_disc_into_disc": maps_disc_into_disc(Phi, tol=tol),
        "samples": rows,
    }
    return Outcome(result)


def cmd_blaschke(r: RationalMap, args, tol: Tolerances) -> Outcome:
    Phi = conjugate_symbol(r, tol) if args.from_halfplane else r
    test = is_finite_blaschke(Phi, tol)
    measure = boundary_unimodular_measure(Phi, args.samples, tol)
    return Outcome({"Phi": Phi, "test": test, "unimodular_measure": measure, "samples": args.samples})


COMMANDS: dict[str, Callable] = {
    "classify": cmd_classify,
    "oracle-measure": cmd_measure,
    "oracle-nagy": cmd_nagy,
    "oracle-equiv": cmd_equiv,
    "transfer": cmd_transfer,
    "blaschke": cmd_blaschke,
}


# ------------------------------------------------------------------ argparse


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; the contract reserves 2 for invalid symbols."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _global_flags(default) -> argparse.ArgumentParser:
    # the subcommands repeat the global flags; SUPPRESS keeps their defaults
    # from overwriting a value given before the subcommand
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="FILE", default=default(None), help="key = value tolerance overrides")
    common.add_argument("--deterministic", action="store_true", default=default(False), help="omit the wall-clock time")
    common.add_argument("--json", action="store_true", default=default(False),
                        help="accepted for compatibility; output is always JSON")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=TOOL, description=__doc__.split("\n\n")[0], parents=[_global_flags(lambda v: v)])
    common = _global_flags(lambda v: argparse.SUPPRESS)
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text, parents=[common])
        sp.add_argument("expr", help="rational map in z, e.g. 'z - 1/z'")
        return sp

    sp = add("classify", "isometry / similarity verdict with certificate or witness")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--tol", type=float, help="decision tolerance for realness, slope and innerness")

    sp = add("oracle-measure", "integral of f o r against the integral of f")
    sp.add_argument("--battery", default="standard")
    sp.add_argument("--threshold", type=float, default=1e-6)

    sp = add("oracle-nagy", "norms of C_r^n f against a two-sided power bound k")
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--k", type=float, default=10.0)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--battery", default="standard")

    sp = add("oracle-equiv", "half-plane norms against the weighted disc operator")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--battery", default="standard")
    sp.add_argument("--threshold", type=float, default=1e-6)

    sp = add("transfer", "disc symbol Phi and the weight at sample points")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--samples", type=int, default=8, help="points per circle (|z| = 1 and 1/2)")

    sp = add("blaschke", "finite Blaschke test for a disc symbol")
    sp.add_argument("--from-halfplane", action="store_true", help="conjugate a half-plane map first")
    sp.add_argument("--samples", type=int, default=4096)
    return parser


def _tolerances(args) -> Tolerances:
    tol = load_config(args.config) if args.config else DEFAULT
    if getattr(args, "tol", None) is not None:
        t = _positive(args.tol, "--tol")
        tol = tol.replace(real=t, slope=t, inner=t)
    return tol


def _settings(args, tol: Tolerances) -> dict:
    skip = {"expr", "command", "config", "deterministic", "json", "tol"}
    out = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    if out.get("battery") == "random":
        out["seed"] = int(os.environ.get(SEED_ENV, "0"))
    out["tolerances"] = tol
    return out


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    envelope: dict = {"tool": TOOL, "version": __version__, "command": args.command, "input": args.expr}

    def finish(code: int) -> int:
        envelope["wall_time"] = None if args.deterministic else time.perf_counter() - start
        stdout.write(dumps(envelope))
        return code

    def fail(code: int, kind: str, message: str, **extra) -> int:
        print(f"{TOOL}: {message}", file=stderr)
        envelope["error"] = {"kind": kind, "message": message, **extra}
        return finish(code)

    try:
        tol = _tolerances(args)
    except (ConfigError, OSError, ValueError) as exc:
        return fail(EXIT_INPUT, "config", str(exc))
    try:
        r = parse_map(args.expr, tol)
    except ExprSyntaxError as exc:
        print(exc.pretty(), file=stderr)
        return fail(EXIT_INPUT, type(exc).__name__, exc.message, position=exc.position)
    except (LoweringError, DegreeOverflowError, ZeroDivisionError) as exc:
        return fail(EXIT_INPUT, type(exc).__name__, str(exc))

    envelope["coefficients"] = coefficients(r)
    envelope["settings"] = _settings(args, tol)
    try:
        with np.errstate(all="ignore"):
            outcome = COMMANDS[args.command](r, args, tol)
    except InvalidSymbol as exc:
        envelope["result"] = None
        return fail(EXIT_INVALID_SYMBOL, "invalid_symbol", str(exc), evidence=exc.evidence)
    except NUMERICAL_ERRORS as exc:
        return fail(EXIT_NUMERICAL, type(exc).__name__, str(exc))
    except ValueError as exc:
        return fail(EXIT_INPUT, type(exc).__name__, str(exc))
    envelope["result"] = outcome.result
    if outcome.code == EXIT_INVALID_SYMBOL:
        print(f"{TOOL}: invalid symbol (witness in report)", file=stderr)
    return finish(outcome.code)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        return run(argv)
    except SystemExit as exc:  # argparse usage errors, --help, --version
        return int(exc.code or 0)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
