"""Command-line interface.

Exit codes: 0 success, 1 numerical failure, 2 usage error or malformed
input, 3 input that parses but fails validation (non-convex, too coarse).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, elastica_solver, geom_kernel, optimal_arc, verification
from . import quadrature as quad
from .geom_kernel import sig9

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE, EXIT_INVALID = 0, 1, 2, 3

HALF_PI = 0.5 * math.pi
# CLI angles within this distance of pi/2 are taken to mean pi/2 exactly
SNAP = 5e-5


class UsageError(Exception):
    pass


def _angle(text):
    t = text.strip().lower().replace(" ", "")
    named = {"pi/2": HALF_PI, "pi/4": 0.25 * math.pi, "pi/3": math.pi / 3, "pi/6": math.pi / 6}
    if t in named:
        return named[t]
    try:
        v = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None
    if abs(v - HALF_PI) <= SNAP:
        v = HALF_PI
    if not (0.0 < v <= HALF_PI):
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, pi/2], got {text}")
    return v


def _positive_int(lo):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be at least {lo}, got {v}")
        return v

    return parse


def _nonneg_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v >= 0.0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be a finite number >= 0, got {text}")
    return v


def _emit(obj):
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


# -- subcommands --------------------------------------------------------------------


def cmd_omega_star(args):
    dom = optimal_arc.build_omega_star(args.n, args.h)
    fmt = args.format
    out = Path(args.out) if args.out else Path(f"omega_star.{fmt}")
    if fmt == "svg":
        optimal_arc.write_svg(dom, out)
    else:
        geom_kernel.write_body(dom.body, out, fmt)
    if args.svg:
        optimal_arc.write_svg(dom, args.svg)
    rep = geom_kernel.functionals(dom.body)
    _emit(rep.to_dict())
    print(f"wrote {out}", file=sys.stderr)
    return EXIT_OK


def cmd_functionals(args):
    fmt = args.format or geom_kernel.format_for_path(args.input)
    try:
        text = Path(args.input).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    body = geom_kernel.parse_body(text, fmt)
    rep = analysis.inequality_suite(body, args.tol)
    out = rep.functionals.to_dict()
    out["inequalities"] = {c.name: c.to_dict() for c in rep.checks}
    out["all_passed"] = rep.passed
    _emit(out)
    return EXIT_OK


def cmd_table_ealpha(args):
    table = analysis.ealpha_table(args.grid)
    out = Path(args.out) if args.out else Path("ealpha.csv")
    out.write_text(table.to_csv())
    sub = analysis.subadditivity_scan(max(args.grid, 2))
    concave = table.concavity_defect()
    failures = table.invariant_failures()
    if concave > 1e-12:
        failures.append(f"concavity (defect {concave:.3e})")
    if not sub.passed:
        failures.append("sub-additivity")
    summary = {
        "rows": int(table.alpha.size),
        "csv": str(out),
        "min_subadditivity_gap": sub.min_gap,
        "min_gap_at": list(sub.argmin),
        "concavity_defect": concave,
        "h_monotone": not table.notes,
        "failures": failures,
    }
    _emit(summary)
    if failures:
        print("invariant failures: " + "; ".join(failures), file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_solve(args):
    alpha = args.alpha
    closed = optimal_arc.energy_closed_form(alpha)
    if args.mode == "direct":
        sol = elastica_solver.solve_free_length(alpha, n=args.n, enforce_convexity=not args.no_convexity)
        hist = [sig9(e) for _, e in sol.evaluations]
        _emit(
            {
                "mode": "direct",
                "alpha": sig9(alpha),
                "convexity": not args.no_convexity,
                "L": sig9(sol.L),
                "energy": sig9(sol.energy),
                "closed_form": sig9(closed),
                "relative_difference": sig9(sol.energy / closed - 1.0),
                "kkt_residual": sig9(sol.kkt_residual),
                "multiplier_fit": [sig9(c) for c in sol.multiplier_fit],
                "constraint_residuals": [sig9(c) for c in sol.constraint_residuals],
                "length_evaluations": len(hist),
            }
        )
        return EXIT_OK
    if alpha != HALF_PI:
        raise UsageError("--mode shoot needs alpha = pi/2")
    top = elastica_solver.family_limit_length()
    Ls = np.linspace(math.pi + 0.05, top - 1e-3, args.grid)
    sols = [elastica_solver.solve_bvp_via_shooting(float(L)) for L in Ls]
    rows = [
        {"L": sig9(s.L), "c": sig9(s.c), "a0": sig9(s.a0), "energy": sig9(s.energy), "energy_direct": sig9(s.energy_direct)}
        for s in sols
    ]
    best = min(sols, key=lambda s: s.energy)
    _emit(
        {
            "mode": "shoot",
            "alpha": sig9(alpha),
            "closed_form": sig9(closed),
            "energy": sig9(best.energy),
            "relative_difference": sig9(best.energy / closed - 1.0),
            "best_L": sig9(best.L),
            "grid": rows,
        }
    )
    return EXIT_OK


def cmd_verify(args):
    only = set(args.only) if args.only else None

    def show(res):
        print(res.line(), file=sys.stderr, flush=True)

    results = verification.run(args.level, only=only, fault=args.inject_fault, progress=show, seed=args.seed)
    verdict = {
        "level": args.level,
        "seed": args.seed,
        "passed": all(r.passed for r in results),
        "failed": [r.name for r in results if not r.passed],
        "criteria": [r.to_dict() for r in results],
    }
    if args.json:
        Path(args.json).write_text(json.dumps(verdict, indent=2) + "\n")
    _emit(verdict)
    return EXIT_OK if verdict["passed"] else EXIT_NUMERIC


# -- parser ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="inradius-elastica", description="Optimal convex domains for elastic energy at fixed inradius.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("omega-star", help="build the optimal domain and print its functionals")
    s.add_argument("--n", type=_positive_int(64), default=4000, help="samples per half boundary (default 4000)")
    s.add_argument("--h", type=_nonneg_float, default=0.0, help="half length of the inserted horizontal segments")
    s.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    s.add_argument("--out", help="output file (default omega_star.<format>)")
    s.add_argument("--svg", help="also write an SVG drawing here")
    s.set_defaults(func=cmd_omega_star)

    s = sub.add_parser("functionals", help="functionals and inequality checks for a body file")
    s.add_argument("input")
    s.add_argument("--format", choices=("csv", "json"), help="default: from the file extension")
    s.add_argument("--tol", type=_nonneg_float, default=1e-3, help="relative tolerance of the inequality checks")
    s.set_defaults(func=cmd_functionals)

    s = sub.add_parser("table-ealpha", help="tabulate E(alpha) and its derivatives")
    s.add_argument("--grid", type=_positive_int(3), default=200)
    s.add_argument("--out", help="CSV path (default ealpha.csv)")
    s.set_defaults(func=cmd_table_ealpha)

    s = sub.add_parser("solve", help="solve the arc problem numerically")
    s.add_argument("--alpha", type=_angle, required=True, help="half contact angle in (0, pi/2]; 'pi/2' is accepted")
    s.add_argument("--mode", choices=("direct", "shoot"), default="direct")
    s.add_argument("--n", type=_positive_int(32), default=800, help="grid size for --mode direct")
    s.add_argument("--grid", type=_positive_int(2), default=12, help="number of lengths for --mode shoot")
    s.add_argument("--no-convexity", action="store_true", help="drop the monotonicity constraint on theta")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("verify", help="run the acceptance criteria")
    s.add_argument("--level", choices=("quick", "full"), default="quick")
    s.add_argument("--only", type=int, nargs="+", metavar="ID", help="run only these criterion ids")
    s.add_argument("--seed", type=_positive_int(0), default=0, help="first seed of the random bodies in the fuzz check")
    s.add_argument("--json", help="also write the verdict to this file")
    s.add_argument("--inject-fault", choices=("quadrature",), help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except geom_kernel.MalformedInputError as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except geom_kernel.NonConvexError as exc:
        where = f" (vertex {exc.vertex})" if exc.vertex is not None else ""
        print(f"error: invalid body{where}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except analysis.CoarseSamplingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (elastica_solver.SolverError, quad.QuadratureError, ArithmeticError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        if isinstance(exc, elastica_solver.ConvergenceError) and exc.best is not None:
            b = exc.best
            print(f"  best iterate: energy={b.energy:.9g}, residuals={b.constraint_residuals}", file=sys.stderr)
        return EXIT_NUMERIC
    except quad.DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
