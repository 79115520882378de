"""Command line: ``fomip {check,ground,export,solve,enum} MODEL.fomip``.

Exit codes: 0 success or optimal, 1 infeasible, 2 input error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import os
import sys

from .bpc import EnumSizeExceeded, IterationLimit, SolveOptions, Status, solve_bpc, solve_enum, solve_ground
from .grounder import GroundAtomNotDeclared, GroundSizeExceeded, ground
from .lpformat import write_lp
from .model import FomipError
from .parser import ERROR, SourceModel, check_source
from .report import dumps, ground_json, report_json, summary

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fomip", description="First-order mixed-integer programming.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("model", help="input .fomip file")
        sp.add_argument("-o", "--output", help="write the result here instead of stdout")
        sp.add_argument("-v", "--verbose", action="count", default=0)
        sp.add_argument("--max-atoms", type=int, default=100_000, help="ground size limit")
        sp.add_argument("--max-constraints", type=int, default=100_000, help="ground size limit")

    common(sub.add_parser("check", help="parse and validate; print diagnostics"))
    common(sub.add_parser("ground", help="write the ground problem as JSON"))
    common(sub.add_parser("export", help="write the ground problem in LP format"))
    sp = sub.add_parser("solve", help="solve and write a JSON report")
    common(sp)
    sp.add_argument("--mode", choices=["ground", "bpc"], default="bpc")
    sp.add_argument("--separator", choices=["naive", "guided"], default=None)
    sp.add_argument("--pricer", choices=["naive", "guided", "off"], default=None)
    sp.add_argument("--max-nodes", type=int, default=10_000)
    sp.add_argument("--max-cut-rounds", type=int, default=1_000)
    sp.add_argument("--max-cuts-per-round", type=int, default=None)
    sp.add_argument("--threshold", type=float, default=1e-6, help="violation and pricing threshold")
    sp.add_argument("--threads", type=int, default=1, help="accepted; nodes are processed sequentially")
    common(sub.add_parser("enum", help="exhaustive enumeration oracle"))
    return p


def _emit(text: str, path, stdout):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _load(args, stderr):
    try:
        with open(args.model, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        stderr.write(f"{args.model}: error: {exc.strerror or exc}\n")
        return None, [], True
    model, diags = check_source(SourceModel(data, args.model))
    return model, diags, model is None


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    seed = os.environ.get("FOMIP_SEED")
    if seed is not None and not seed.lstrip("-").isdigit():
        stderr.write(f"error: FOMIP_SEED must be an integer, got {seed!r}\n")
        return EXIT_INPUT

    if args.command == "solve":
        if args.mode == "ground" and args.pricer not in (None, "off"):
            stderr.write("error: --pricer only applies to --mode=bpc\n")
            return EXIT_INPUT
        if args.threads < 1 or args.max_nodes < 1 or args.max_cut_rounds < 1:
            stderr.write("error: limits and --threads must be positive\n")
            return EXIT_INPUT

    model, diags, failed = _load(args, stderr)
    out = stderr if args.command != "check" else stdout
    for d in diags:
        out.write(d.format(args.model) + "\n")
    if args.command == "check":
        return EXIT_INPUT if failed or any(d.severity == ERROR for d in diags) else EXIT_OK
    if failed:
        return EXIT_INPUT

    try:
        if args.command == "ground":
            gp = ground(model, args.max_atoms, args.max_constraints)
            _emit(dumps(ground_json(gp)), args.output, stdout)
            return EXIT_OK
        if args.command == "export":
            gp = ground(model, args.max_atoms, args.max_constraints)
            _emit(write_lp(gp, os.path.basename(args.model)), args.output, stdout)
            return EXIT_OK
        if args.command == "enum":
            rep = solve_enum(model)
            extra = {"mode": "enum"}
        else:
            opts = SolveOptions(
                separator=args.separator or "guided",
                pricer=(args.pricer or "guided") if args.mode == "bpc" else "off",
                max_nodes=args.max_nodes,
                max_cut_rounds=args.max_cut_rounds,
                max_cuts_per_round=args.max_cuts_per_round,
                violation_threshold=args.threshold,
                pricing_threshold=args.threshold,
                max_ground_atoms=args.max_atoms,
                max_ground_constraints=args.max_constraints,
                trace=args.verbose >= 2,
            )
            extra = {"mode": args.mode, "separator": opts.separator, "pricer": opts.pricer}
            rep = (solve_bpc if args.mode == "bpc" else solve_ground)(model, opts)
    except IterationLimit as exc:
        stderr.write(f"{args.model}: error: {exc}\n")
        if exc.report is not None:
            _emit(dumps(report_json(exc.report, args.verbose, extra)), args.output, stdout)
            stderr.write(summary(exc.report))
        return EXIT_LIMIT
    except (GroundSizeExceeded, EnumSizeExceeded) as exc:
        stderr.write(f"{args.model}: error: {exc}\n")
        return EXIT_LIMIT
    except (GroundAtomNotDeclared, FomipError) as exc:
        stderr.write(f"{args.model}: error: {exc}\n")
        return EXIT_INPUT

    _emit(dumps(report_json(rep, args.verbose, extra)), args.output, stdout)
    (stdout if args.output else stderr).write(summary(rep))
    return EXIT_OK if rep.status is Status.OPTIMAL else EXIT_INFEASIBLE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
