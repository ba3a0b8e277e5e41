"""Random-instance generator and multi-solver benchmark runner.

Four instance families, all conjunctions over same-size arrays:

- AEUF-I: three arrays, two used as declared and one through a chain of
  two stores.
- AEUF-II: six arrays with store chains of random length up to eight,
  at least one of length three or more.
- AEUF+LIA-I / AEUF+LIA-II: the same structure with linear inequalities
  and products mixed into the atom pool.

The distribution is documented here rather than inherited from anywhere:
atom kinds are drawn uniformly among the kinds admissible for the class,
and every variable position draws a fresh variable with probability 0.2
(capped at num_vars) or an existing one otherwise.

run_suite() replays a list of configurations against any subset of the
three solver modes, appends rows to a CSV keyed by a config checksum so
interrupted runs resume where they stopped, and reports the portfolio
witnesses BEST (better of cc/fd per formula) and HYBRID (parallel race
of cc and fd, charged the faster time) next to the combined solver.
"""
from __future__ import annotations

import hashlib
import os
import random
from dataclasses import dataclass, field, replace

from .parser import parse
from .supervisor import Config, solve

CLASSES = ("AEUF-I", "AEUF-II", "AEUF+LIA-I", "AEUF+LIA-II")


@dataclass(frozen=True)
class GenConfig:
    cls: str
    length: int                # number of non-declaration atoms
    seed: int
    num_vars: int = 40
    array_size: int = 20
    dom_hi: int = 1000

    def formula_id(self) -> str:
        return f"{self.cls}/L{self.length}/s{self.seed}"


@dataclass
class RunRecord:
    formula_id: str
    cls: str
    length: int
    seed: int
    solver: str
    verdict: str               # S | U | TO
    time_ms: int
    decisions: int
    messages: int

    def row(self) -> list[str]:
        return [self.formula_id, self.cls, str(self.length), str(self.seed),
                self.solver, self.verdict, str(self.time_ms),
                str(self.decisions), str(self.messages)]


CSV_HEADER = ("formula_id,class,length,seed,solver,verdict,"
              "time_ms,decisions,messages")


class _Gen:
    def __init__(self, cfg: GenConfig) -> None:
        assert cfg.cls in CLASSES, f"unknown class {cfg.cls}"
        key = (f"{cfg.cls}|{cfg.length}|{cfg.seed}|{cfg.num_vars}"
               f"|{cfg.array_size}|{cfg.dom_hi}")
        self.cfg = cfg
        self.rng = random.Random(key)
        self.nvars = 0
        self.lines: list[str] = []

    def var(self) -> str:
        fresh = self.nvars == 0 or (self.nvars < self.cfg.num_vars
                                    and self.rng.random() < 0.2)
        if fresh:
            self.nvars += 1
        return f"v{self.rng.randrange(self.nvars)}" if not fresh \
            else f"v{self.nvars - 1}"

    def index(self) -> str:
        if self.rng.random() < 0.6:
            return self.var()
        return str(self.rng.randrange(self.cfg.array_size))

    def elem(self) -> str:
        if self.rng.random() < 0.6:
            return self.var()
        return str(self.rng.randint(0, self.cfg.dom_hi))

    def build(self) -> str:
        cfg = self.cfg
        two = cfg.cls in ("AEUF-II", "AEUF+LIA-II")
        lia = cfg.cls in ("AEUF+LIA-I", "AEUF+LIA-II")
        if two:
            chain_len = [self.rng.randint(0, 8) for _ in range(6)]
            forced = self.rng.randrange(6)
            chain_len[forced] = max(chain_len[forced], 3)
        else:
            chain_len = [0, 0, 2]
        names = [f"A{k}" for k in range(len(chain_len))]

        # chains are fixed formula structure: build them up front
        chains: list[list[str]] = []
        for name, ln in zip(names, chain_len):
            steps = [name]
            for _ in range(ln):
                steps.append(f"(store {steps[-1]} {self.index()} {self.elem()})")
            chains.append(steps)

        kinds = ["sel-eq", "sel-diff", "var-eq", "var-diff",
                 "arr-eq", "arr-diff"]
        if lia:
            kinds += ["leq", "mul"]

        atoms: list[str] = []
        while len(atoms) < cfg.length:
            atoms.append(self.atom(self.rng.choice(kinds), names, chains))

        decls = [f"(declare-int v{k} 0 {cfg.dom_hi})" for k in range(self.nvars)]
        decls += [f"(declare-array {n} {cfg.array_size} 0 {cfg.dom_hi})"
                  for n in names]
        return "\n".join(decls + atoms) + "\n"

    def view(self, chains: list[list[str]]) -> str:
        """An array as seen by an atom: any prefix of one of the chains."""
        steps = self.rng.choice(chains)
        return self.rng.choice(steps)

    def select(self, chains: list[list[str]]) -> str:
        return f"(select {self.view(chains)} {self.index()})"

    def int_term(self, chains: list[list[str]]) -> str:
        r = self.rng.random()
        if r < 0.5:
            return self.var()
        if r < 0.75:
            return self.select(chains)
        return str(self.rng.randint(0, self.cfg.dom_hi))

    def atom(self, kind: str, names: list[str],
             chains: list[list[str]]) -> str:
        rng = self.rng
        if kind == "sel-eq":
            return f"(= {self.select(chains)} {self.int_term(chains)})"
        if kind == "sel-diff":
            return f"(distinct {self.select(chains)} {self.int_term(chains)})"
        if kind == "var-eq":
            return f"(= {self.var()} {self.int_term(chains)})"
        if kind == "var-diff":
            return f"(distinct {self.var()} {self.int_term(chains)})"
        if kind in ("arr-eq", "arr-diff"):
            a = rng.choice(names)
            b = rng.choice([n for n in names if n != a])
            op = "=a" if kind == "arr-eq" else "distinct-a"
            return f"({op} {a} {b})"
        if kind == "leq":
            n = rng.randint(2, 3)
            terms = " ".join(
                f"(* {rng.choice([c for c in range(-5, 6) if c])} {self.var()})"
                for _ in range(n))
            bound = rng.randint(-2 * self.cfg.dom_hi, 3 * self.cfg.dom_hi)
            return f"(leq (+ {terms}) {bound})"
        if kind == "mul":
            return f"(mul {self.var()} {self.var()} {self.var()})"
        raise AssertionError(kind)


def generate(cfg: GenConfig) -> str:
    """The formula text for a configuration; same cfg, same bytes."""
    return _Gen(cfg).build()


# ----- suite running ---------------------------------------------------------


def _suite_checksum(cfgs, solvers, timeout: float) -> str:
    desc = ";".join(c.formula_id() + f"|{c.num_vars}|{c.array_size}|{c.dom_hi}"
                    for c in cfgs)
    desc += f"//{','.join(solvers)}//{timeout}//{CSV_HEADER}"
    return hashlib.sha256(desc.encode()).hexdigest()


def _read_done(path: str, checksum: str) -> set[tuple[str, str]]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2 or lines[0] != CSV_HEADER:
        raise ValueError(f"{path} is not a suite CSV")
    if lines[1] != f"# sha256={checksum}":
        raise ValueError(f"{path} belongs to a different suite configuration")
    done = set()
    for line in lines[2:]:
        if not line:
            continue
        parts = line.split(",")
        done.add((parts[0], parts[4]))
    return done


@dataclass
class Summary:
    per_solver: dict[str, dict[str, float]] = field(default_factory=dict)
    gain: int = 0
    miracle: int = 0
    bound_violations: int = 0
    exchange_cap_hits: int = 0

    def table(self) -> str:
        out = [f"{'solver':8} {'S':>5} {'U':>5} {'TO':>5} {'time_s':>9}"]
        for name, row in self.per_solver.items():
            out.append(f"{name:8} {row['S']:>5.0f} {row['U']:>5.0f} "
                       f"{row['TO']:>5.0f} {row['time_ms'] / 1000:>9.1f}")
        out.append(f"Gain {self.gain:+d}   Miracle {self.miracle}")
        return "\n".join(out)


def run_suite(cfgs: list[GenConfig],
              solvers: tuple[str, ...] = ("fdcc", "cc", "fd"),
              timeout: float = 5.0,
              csv_path: str | None = None,
              base_cfg: Config | None = None,
              ) -> tuple[list[RunRecord], Summary]:
    """Run every configuration against every solver, sequentially.

    With csv_path, rows already recorded for this exact suite are not
    rerun; new rows are appended and flushed one by one.
    """
    checksum = _suite_checksum(cfgs, solvers, timeout)
    done: set[tuple[str, str]] = set()
    fh = None
    if csv_path:
        if os.path.exists(csv_path):
            done = _read_done(csv_path, checksum)
            fh = open(csv_path, "a")
        else:
            fh = open(csv_path, "w")
            fh.write(CSV_HEADER + "\n")
            fh.write(f"# sha256={checksum}\n")
            fh.flush()

    records: list[RunRecord] = []
    summary = Summary()
    try:
        for gcfg in cfgs:
            text = generate(gcfg)
            f = parse(text)
            for solver in solvers:
                if (gcfg.formula_id(), solver) in done:
                    continue
                scfg = replace(base_cfg or Config(),
                               solver=solver, timeout=timeout)
                try:
                    res = solve(f, scfg)
                except RuntimeError:
                    summary.exchange_cap_hits += 1
                    res = None
                if res is None:
                    verdict, time_ms, dec, msgs = "TO", int(timeout * 1000), 0, 0
                else:
                    verdict = {"sat": "S", "unsat": "U"}.get(res.verdict, "TO")
                    time_ms = int(res.stats.wall_ms)
                    dec = res.stats.decisions
                    msgs = (res.stats.fd_to_cc + res.stats.cc_to_fd
                            + res.stats.cc_to_fd_cliques)
                    if solver == "fdcc" and not _bounds_ok(res.stats):
                        summary.bound_violations += 1
                rec = RunRecord(gcfg.formula_id(), gcfg.cls, gcfg.length,
                                gcfg.seed, solver, verdict, time_ms, dec, msgs)
                records.append(rec)
                if fh:
                    fh.write(",".join(rec.row()) + "\n")
                    fh.flush()
    finally:
        if fh:
            fh.close()

    _summarise(records, summary, timeout)
    return records, summary


def _bounds_ok(stats) -> bool:
    return (stats.max_branch_fd_to_cc <= stats.pairs_total
            and stats.max_branch_cc_to_fd <= stats.eqdiff_bound)


def _solved(verdict: str) -> bool:
    return verdict in ("S", "U")


def _summarise(records: list[RunRecord], summary: Summary,
               timeout: float) -> None:
    by_formula: dict[str, dict[str, RunRecord]] = {}
    for rec in records:
        by_formula.setdefault(rec.formula_id, {})[rec.solver] = rec

    solvers_seen: list[str] = []
    for rec in records:
        if rec.solver not in solvers_seen:
            solvers_seen.append(rec.solver)

    def bump(name: str, verdict: str, time_ms: float) -> None:
        row = summary.per_solver.setdefault(
            name, {"S": 0, "U": 0, "TO": 0, "time_ms": 0.0})
        row[verdict] += 1
        row["time_ms"] += time_ms

    for solver in solvers_seen:
        for runs in by_formula.values():
            if solver in runs:
                bump(solver, runs[solver].verdict, runs[solver].time_ms)

    # portfolio witnesses need both standalone solvers
    if {"cc", "fd"} <= set(solvers_seen):
        for runs in by_formula.values():
            cc, fd = runs.get("cc"), runs.get("fd")
            if cc is None or fd is None:
                continue
            solving = [r for r in (cc, fd) if _solved(r.verdict)]
            if solving:
                best = min(solving, key=lambda r: r.time_ms)
                bump("BEST", best.verdict, best.time_ms)
                bump("HYBRID", best.verdict, min(cc.time_ms, fd.time_ms))
            else:
                t = min(cc.time_ms, fd.time_ms)
                bump("BEST", "TO", t)
                bump("HYBRID", "TO", t)

    if {"fdcc", "cc", "fd"} <= set(solvers_seen):
        summary.gain, summary.miracle = gain_miracle(records)


def gain_miracle(records: list[RunRecord]) -> tuple[int, int]:
    """Reward fdcc for answers the standalone engines miss and penalise
    it for answers it misses: +2 when it alone solves, +1 when it solves
    and exactly one of cc/fd does, -1/-2 mirrored when it fails. Miracle
    counts the +2 cases."""
    by_formula: dict[str, dict[str, str]] = {}
    for rec in records:
        by_formula.setdefault(rec.formula_id, {})[rec.solver] = rec.verdict
    gain = 0
    miracle = 0
    for runs in by_formula.values():
        if not {"fdcc", "cc", "fd"} <= set(runs):
            continue
        us = _solved(runs["fdcc"])
        others = sum(1 for s in ("cc", "fd") if _solved(runs[s]))
        if us and others == 0:
            gain += 2
            miracle += 1
        elif us and others == 1:
            gain += 1
        elif not us and others == 1:
            gain -= 1
        elif not us and others == 2:
            gain -= 2
    return gain, miracle
