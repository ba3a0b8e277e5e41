"""Command-line front end.

Subcommands: solve (decide a formula file), oracle (decide by brute-force
enumeration), gen (emit a random formula), bench (run a generated suite
against several solver modes and append a CSV).

Exit codes: 0 sat, 1 unsat, 2 unknown or timeout, 3 usage or parse
errors. The verdict goes to stdout as one line, a model (integers only)
as a second line; traces go to the file named by --trace, never stdout.
"""
from __future__ import annotations

import argparse
import os
import sys

from .bench import CLASSES, GenConfig, generate, run_suite
from .oracle import GroundModel, oracle_solve
from .parser import ParseError, parse
from .supervisor import Config, solve

EXIT = {"sat": 0, "unsat": 1, "unknown": 2}
USAGE_ERROR = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):          # argparse default exits 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _env_seed() -> int:
    try:
        return int(os.environ.get("FDCC_SEED", ""))
    except ValueError:
        return 0


def _model_line(m: GroundModel) -> str:
    parts = [f"({name} {val})" for name, val in m.ints.items()
             if "%" not in name]
    return "(model " + " ".join(parts) + ")"


def _dump(res_model: GroundModel | None, stats) -> str:
    import json
    body = {"stats": {k: v for k, v in vars(stats).items()}}
    if res_model is not None:
        body["ints"] = res_model.ints
        body["arrays"] = res_model.arrays
        body["grow"] = {n: {"size": s, "cells": c}
                        for n, (s, c) in res_model.grow.items()}
    return json.dumps(body, sort_keys=True, indent=2)


def _cmd_solve(args) -> int:
    try:
        with open(args.file) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read {args.file}: {exc}", file=sys.stderr)
        return USAGE_ERROR
    cfg = Config(solver=args.solver, timeout=args.timeout,
                 max_decisions=args.max_decisions, probe=args.probe,
                 diff_array=args.diff_array, alldiff=args.alldiff,
                 trace_path=args.trace)
    try:
        f = parse(text)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    res = solve(f, cfg)
    print(res.verdict)
    if res.verdict == "sat" and res.model is not None:
        print(_model_line(res.model))
    if res.verdict == "unknown" and res.reason:
        print(res.reason, file=sys.stderr)
    if args.dump:
        print(_dump(res.model, res.stats), file=sys.stderr)
    return EXIT[res.verdict]


def _cmd_oracle(args) -> int:
    try:
        with open(args.file) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read {args.file}: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        f = parse(text)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    verdict, model = oracle_solve(f, cap=args.cap)
    print(verdict)
    if verdict == "sat" and model is not None:
        print(_model_line(model))
    return EXIT[verdict]


def _cmd_gen(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    cfg = GenConfig(args.cls, args.length, seed, args.num_vars,
                    args.array_size, args.dom_hi)
    text = generate(cfg)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _parse_lengths(spec: str) -> list[int]:
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in spec.split(",")]


def _cmd_bench(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    lengths = _parse_lengths(args.lengths)
    cfgs = []
    for i in range(args.count):
        ln = lengths[round(i * (len(lengths) - 1) / max(args.count - 1, 1))]
        cfgs.append(GenConfig(args.cls, ln, seed + i, args.num_vars,
                              args.array_size, args.dom_hi))
    solvers = tuple(args.solvers.split(","))
    _, summary = run_suite(cfgs, solvers, args.timeout, args.out)
    print(summary.table())
    if summary.bound_violations or summary.exchange_cap_hits:
        print(f"WARNING: {summary.bound_violations} message-bound violations, "
              f"{summary.exchange_cap_hits} exchange-cap hits",
              file=sys.stderr)
    return 0


def _add_gen_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--class", dest="cls", choices=CLASSES, default="AEUF-II",
                   help="instance family")
    p.add_argument("--seed", type=int, default=None,
                   help="base seed (default: FDCC_SEED or 0)")
    p.add_argument("--num-vars", type=int, default=40)
    p.add_argument("--array-size", type=int, default=20)
    p.add_argument("--dom-hi", type=int, default=1000,
                   help="largest value in every declared domain")


def main(argv: list[str] | None = None) -> int:
    top = _Parser(prog="fdcc", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="cmd", required=True)

    ps = sub.add_parser("solve", help="decide a formula file")
    ps.add_argument("file")
    ps.add_argument("--solver", choices=("fdcc", "cc", "fd"), default="fdcc")
    ps.add_argument("--timeout", type=float, default=None, help="seconds")
    ps.add_argument("--max-decisions", type=int, default=None)
    ps.add_argument("--probe", action="store_true",
                    help="detect disequalities by refutation probes")
    ps.add_argument("--diff-array", choices=("witness", "propagator"),
                    default="witness")
    ps.add_argument("--alldiff", choices=("basic", "matching"),
                    default="basic")
    ps.add_argument("--trace", default=None, metavar="FILE",
                    help="write a JSONL event trace")
    ps.add_argument("--dump", action="store_true",
                    help="print stats and full model to stderr as JSON")
    ps.set_defaults(fn=_cmd_solve)

    po = sub.add_parser("oracle", help="decide by exhaustive enumeration")
    po.add_argument("file")
    po.add_argument("--cap", type=int, default=10_000_000,
                    help="give up above this many candidate models")
    po.set_defaults(fn=_cmd_oracle)

    pg = sub.add_parser("gen", help="emit one random formula")
    _add_gen_flags(pg)
    pg.add_argument("--length", type=int, default=20, help="atom count")
    pg.add_argument("-o", "--out", default=None, help="output file")
    pg.set_defaults(fn=_cmd_gen)

    pb = sub.add_parser("bench", help="run a generated suite, append CSV")
    _add_gen_flags(pb)
    pb.add_argument("--lengths", default="10..60",
                    help="LO..HI range or comma list of atom counts")
    pb.add_argument("--count", type=int, default=50,
                    help="number of formulas")
    pb.add_argument("--timeout", type=float, default=5.0)
    pb.add_argument("--solvers", default="fdcc,cc,fd")
    pb.add_argument("--out", default=None, help="CSV path (resumable)")
    pb.set_defaults(fn=_cmd_bench)

    args = top.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
