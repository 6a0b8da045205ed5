"""Command-line front end.

Exit codes: 0 success, 1 error, 2 collision during ``run``, 3 overlap
reported by ``overlap``.
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import replace
import sys

from ._csv import fmt
from .errors import NumericalError
from .geometry import from_semi_axes
from .overlap import kappa_star, write_curve_csv
from .scenario import ScenarioError, load
from .simulation import perturbed_run, run
from .verify import SUITES, run_suites

EXIT_OK, EXIT_ERROR, EXIT_COLLISION, EXIT_OVERLAP = 0, 1, 2, 3
TOUCH_TOL = 1e-9


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _ellipse(text: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number list: {text!r}") from None
    if len(vals) != 5:
        raise argparse.ArgumentTypeError("expected sx,sy,rot,cx,cy")
    sx, sy, rot, cx, cy = vals
    try:
        return from_semi_axes(sx, sy, rot, (cx, cy))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _write_trace(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "outer", "inner", "cost", "violation", "step_len"])
        for step, rows in enumerate(trace):
            for outer, inner, cost, viol, slen in rows:
                w.writerow([step, outer, inner, fmt(cost), fmt(viol), fmt(slen)])


def cmd_run(args) -> int:
    try:
        scenario = load(args.scenario)
    except ScenarioError as exc:
        print(f"{args.scenario}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.trace:
        scenario = replace(scenario,
                           settings=replace(scenario.settings, trace=True))
    if args.perturb is not None and args.perturb < 0:
        print("--perturb must be nonnegative", file=sys.stderr)
        return EXIT_ERROR
    try:
        log = (perturbed_run(scenario, args.perturb) if args.perturb
               else run(scenario))
        log.write_csv(args.out)
        if args.trace:
            _write_trace(args.trace, log.trace)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if log.error is not None:
        print(f"solver error at t={log.t[-1]:g}: {log.error}", file=sys.stderr)
        return EXIT_ERROR
    if log.collided:
        first = int((log.kappa_r >= 0).any(axis=1).argmax())
        print(f"collision: raw-footprint overlap at t={log.t[first]:g}",
              file=sys.stderr)
        return EXIT_COLLISION
    return EXIT_OK


def cmd_overlap(args) -> int:
    res = kappa_star(args.a, args.b)
    if abs(res.kappa_star) <= TOUCH_TOL:
        verdict = "touching"
    else:
        verdict = "disjoint" if res.disjoint else "overlap"
    print(f"lambda_star {fmt(res.lambda_star)}")
    print(f"kappa_star {fmt(res.kappa_star)}")
    print(f"branch {res.branch}")
    print(f"verdict {verdict}")
    return EXIT_OK if verdict == "disjoint" else EXIT_OVERLAP


def cmd_curve(args) -> int:
    if args.samples < 2:
        print("--samples must be at least 2", file=sys.stderr)
        return EXIT_ERROR
    try:
        write_curve_csv(args.out, args.a, args.b, args.samples)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.pairs < 0:
        print("--pairs must be nonnegative", file=sys.stderr)
        return EXIT_ERROR
    names = SUITES if args.suite == "all" else (args.suite,)
    reports = run_suites(names, args.pairs, args.seed)
    for rep in reports:
        print("\n".join(rep.lines()))
    return EXIT_OK if all(r.ok for r in reports) else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ellipmpc",
                description="Ellipse-overlap MPC: simulation and diagnostics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run a closed-loop scenario")
    r.add_argument("scenario", help="scenario JSON file")
    r.add_argument("out", help="CSV log destination")
    r.add_argument("--perturb", type=float, metavar="STD",
                   help="pose measurement noise standard deviation")
    r.add_argument("--trace", metavar="PATH",
                   help="write per-iteration solver trace CSV")
    r.set_defaults(func=cmd_run)

    for name, fn, text in (("overlap", cmd_overlap, "overlap metric of two ellipses"),
                           ("curve", cmd_curve, "dump K and Kq over lambda")):
        c = sub.add_parser(name, help=text)
        c.add_argument("--a", type=_ellipse, required=True, metavar="SX,SY,ROT,CX,CY")
        c.add_argument("--b", type=_ellipse, required=True, metavar="SX,SY,ROT,CX,CY")
        if name == "curve":
            c.add_argument("--samples", type=int, default=101)
            c.add_argument("out", help="CSV destination")
        c.set_defaults(func=fn)

    v = sub.add_parser("verify", help="run randomized property suites")
    v.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    v.add_argument("--pairs", type=int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
