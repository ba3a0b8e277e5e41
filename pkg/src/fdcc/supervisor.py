"""Cooperation of the equality engine and the finite-domain store.

solve() preprocesses (maps lowered onto array pairs, whole-array atoms
desugared, atoms dispatched) and then runs one of three drivers:

- "fdcc": both engines. The finite-domain side owns search; around every
  propagation fixpoint the supervisor answers critical pairs the
  equality engine is watching (index/index, value/element and
  read/read pairs of every select-over-store) from domain knowledge,
  asserts them into the closure, and feeds everything the closure
  derives back as propagators. Closure state is snapshotted at each
  decision and restored on backtrack, so both engines always agree on
  the branch.
- "fd": the store and its propagators alone; still complete because
  labelling binds every variable and each propagator decides its own
  constraint exactly on singletons.
- "cc": the closure alone prunes a plain enumeration of the integers
  and read values; a leaf assignment is completed into a ground model
  (cells pinned through the write chains, the rest defaulted) and
  checked by ground evaluation.

Satisfying assignments are always re-checked by structural evaluation
before being reported.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from . import formula as F
from .cc import (DIFF, EQ, UNKNOWN, Clique3, CongruenceClosure, NewDiff,
                 NewEq, UnsatFound)
from .ext import (decode_map_model, encode_maps, uniform_read_equalities,
                  uniform_select_hook)
from .fd import (Budget, BudgetExceeded, ClosedCells, DiffProp, EqProp,
                 FdModel, SearchStats, Store, search)
from .oracle import GroundModel, oracle_eval
from .terms import SELECT, STORE, UNIFORM, VAR, Sort, Term, subterms


@dataclass
class Config:
    solver: str = "fdcc"              # fdcc | fd | cc
    timeout: float | None = None      # wall seconds
    max_decisions: int | None = None
    probe: bool = False               # detect disequality by refutation
    diff_array: str = "witness"       # witness | propagator
    alldiff: str = "basic"            # basic | matching
    trace_path: str | None = None
    max_rounds: int = 10_000          # exchange rounds per fixpoint, safety


@dataclass
class Stats:
    decisions: int = 0
    exchange_rounds: int = 0
    propagator_runs: int = 0
    fd_to_cc: int = 0                 # pair answers sent, whole run
    cc_to_fd: int = 0                 # equality/disequality messages, whole run
    cc_to_fd_cliques: int = 0
    cc_created_selects: int = 0
    pairs_total: int = 0
    max_branch_fd_to_cc: int = 0      # along a single search path
    max_branch_cc_to_fd: int = 0
    n_store: int = 0
    n_select: int = 0
    verdict_source: str = ""
    wall_ms: float = 0.0

    @property
    def eqdiff_bound(self) -> int:
        return self.n_store + self.n_select * self.n_select


@dataclass
class SolveResult:
    verdict: str                      # sat | unsat | unknown
    model: GroundModel | None
    stats: Stats
    reason: str = ""

    # the model is stated over the preprocessed formula: encoded maps
    # appear as their NAME%E / NAME%K arrays, desugared witnesses as
    # %w variables


class Tracer:
    def __init__(self, path: str | None) -> None:
        self.fh = open(path, "w") if path else None

    def emit(self, **event) -> None:
        if self.fh:
            self.fh.write(json.dumps(event, sort_keys=True) + "\n")

    def close(self) -> None:
        if self.fh:
            self.fh.close()
            self.fh = None


def _fmt(t: Term) -> str:
    from .terms import format_term
    return format_term(t)


def _walk_atom_terms(atom):
    for fname in atom.__dataclass_fields__:
        v = getattr(atom, fname)
        if isinstance(v, Term):
            yield v
        elif fname == "coeffs":
            for _, t in v:
                yield t


def _all_selects(f: F.Formula) -> list[Term]:
    seen: dict[int, Term] = {}
    for atom in f.atoms:
        for t in _walk_atom_terms(atom):
            for s in subterms(t):
                if s.kind == SELECT:
                    seen[s.id] = s
    return [seen[k] for k in sorted(seen)]


def _count_terms(f: F.Formula) -> tuple[int, int]:
    stores: set[int] = set()
    selects: set[int] = set()
    for atom in f.atoms:
        for t in _walk_atom_terms(atom):
            for s in subterms(t):
                if s.kind == STORE:
                    stores.add(s.id)
                elif s.kind == SELECT:
                    selects.add(s.id)
    return len(stores), len(selects)


class _Cooperation:
    """Shared state of the fdcc driver for one solve call."""

    def __init__(self, f: F.Formula, disp: F.DispatchResult, cfg: Config,
                 stats: Stats, tracer: Tracer, budget: Budget) -> None:
        self.f = f
        self.cfg = cfg
        self.stats = stats
        self.tracer = tracer
        self.budget = budget
        self.cc = CongruenceClosure(f.table, uniform_select_hook(f.table))
        self.store = Store()
        self.model = FdModel(self.store, f, cfg.alldiff)
        if cfg.diff_array == "propagator":
            self.model.cc_prover = self._prove_cells_equal
        self.inbox: list = []
        self.pairs: list[tuple[Term, Term]] = []
        self.pair_keys: set[tuple[int, int]] = set()
        self.known_selects: list[Term] = []
        self.answered: set[int] = set()
        # per-path message counters, snapshotted with the closure
        self.cur_fd_to_cc = 0
        self.cur_cc_to_fd = 0
        self.snaps: list = []

        for sel, elem in uniform_read_equalities(f):
            self.inbox.extend(self.cc.assert_eq(sel, elem))
        for atom in disp.cc_atoms:
            match atom:
                case F.Eq(a=a, b=b) | F.ArrayEq(a=a, b=b):
                    self.tracer.emit(ev="cc_in", lit="eq", a=_fmt(a), b=_fmt(b))
                    self.inbox.extend(self.cc.assert_eq(a, b))
                case F.Diff(a=a, b=b):
                    self.tracer.emit(ev="cc_in", lit="diff", a=_fmt(a), b=_fmt(b))
                    self.inbox.extend(self.cc.assert_diff(a, b))
                case _:
                    raise AssertionError(f"cc got unexpected atom {atom}")
        self.model.post_atoms(disp.fd_atoms)
        self._note_selects(_all_selects(f))
        self._integrate_created()

    # ----- critical pairs ---------------------------------------------------

    def _note_selects(self, sels: list[Term]) -> None:
        # the closure must know every read, including those appearing
        # only in arithmetic atoms, or it cannot watch their pairs
        for t in sels:
            if not self.cc.registered(t):
                self.inbox.extend(self.cc.register(t))
        self.known_selects.extend(sels)
        self._extract_pairs()

    def _extract_pairs(self) -> None:
        for t in self.known_selects:
            arr, j = t.args
            if arr.kind != STORE:
                continue
            _, wi, we = arr.args
            cands = [(wi, j), (t, we)]
            prior = self.f.table.lookup_select(arr.args[0], j)
            if prior is not None and self.cc.registered(prior):
                cands.append((t, prior))
            for a, b in cands:
                if a.id == b.id:
                    continue
                key = (min(a.id, b.id), max(a.id, b.id))
                if key not in self.pair_keys:
                    self.pair_keys.add(key)
                    self.pairs.append((a, b))
        self.stats.pairs_total = len(self.pairs)

    # ----- exchange ----------------------------------------------------------

    def _prove_cells_equal(self, a: Term, b: Term, k: int) -> bool:
        kt = self.f.table.const(k)
        sa = self.f.table.select(a, kt)
        sb = self.f.table.select(b, kt)
        for s in (sa, sb):
            if not self.cc.registered(s):
                self.inbox.extend(self.cc.register(s))
        return self.cc.equal(sa, sb)

    def _integrate_created(self) -> bool:
        created = self.cc.drain_created_selects()
        if not created:
            return False
        for t in created:
            self.stats.cc_created_selects += 1
            self.model.int_vid(t)
        self._note_selects(created)
        return True

    def _answer_pairs(self) -> bool:
        progress = False
        for idx, (a, b) in enumerate(self.pairs):
            if idx in self.answered:
                continue
            if not (self.cc.registered(a) and self.cc.registered(b)):
                continue    # registration was undone by a backtrack
            if self.cc.partial_eval(EQ, a, b) != UNKNOWN:
                self.answered.add(idx)       # nothing new to tell it
                continue
            va, vb = self.model.vid(a), self.model.vid(b)
            if va is None or vb is None:
                continue
            if self.store.is_eq(va, vb):
                ans = EQ
            elif self.store.is_diff(va, vb, probe=self.cfg.probe):
                ans = DIFF
            else:
                continue
            self.answered.add(idx)
            self.stats.fd_to_cc += 1
            self.cur_fd_to_cc += 1
            self.stats.max_branch_fd_to_cc = max(self.stats.max_branch_fd_to_cc,
                                                 self.cur_fd_to_cc)
            self.tracer.emit(ev="pair", a=_fmt(a), b=_fmt(b), ans=ans)
            deds = (self.cc.assert_eq(a, b) if ans == EQ
                    else self.cc.assert_diff(a, b))
            self.inbox.extend(deds)
            progress = True
        return progress

    def _apply_inbox(self) -> bool:
        progress = False
        while self.inbox:
            ded = self.inbox.pop(0)
            match ded:
                case NewEq(a=a, b=b):
                    self.tracer.emit(ev="ded", kind="eq", a=_fmt(a), b=_fmt(b))
                    self._count_cc_msg()
                    self.store.post(EqProp(self.model.int_vid(a),
                                           self.model.int_vid(b)))
                    progress = True
                case NewDiff(a=a, b=b):
                    self.tracer.emit(ev="ded", kind="diff", a=_fmt(a), b=_fmt(b))
                    self._count_cc_msg()
                    self.store.post(DiffProp(self.model.int_vid(a),
                                             self.model.int_vid(b)))
                    progress = True
                case Clique3(members=members):
                    self.tracer.emit(ev="ded", kind="clique",
                                     members=[_fmt(m) for m in members])
                    self.stats.cc_to_fd_cliques += 1
                    self.model.post_alldiff(list(members))
                    progress = True
                case UnsatFound():
                    # the closure is already flagged; the fixpoint sees it
                    progress = True
                case _:
                    raise AssertionError(f"unknown deduction {ded}")
        return progress

    def _count_cc_msg(self) -> None:
        self.stats.cc_to_fd += 1
        self.cur_cc_to_fd += 1
        self.stats.max_branch_cc_to_fd = max(self.stats.max_branch_cc_to_fd,
                                             self.cur_cc_to_fd)

    def fixpoint(self) -> bool:
        rounds = 0
        while True:
            rounds += 1
            self.stats.exchange_rounds += 1
            if rounds > self.cfg.max_rounds:
                raise RuntimeError("engine exchange failed to stabilise")
            self.budget.check(self.stats.decisions)
            if not self.store.propagate():
                self.stats.verdict_source = "fd"
                return False
            if self.cc.unsat:
                self.stats.verdict_source = "cc"
                return False
            progress = self._integrate_created()
            self._extract_pairs()   # priors may have been registered late
            if self._answer_pairs():
                progress = True
            if self._apply_inbox():
                progress = True
            if self.cc.unsat:
                self.stats.verdict_source = "cc"
                return False
            if not progress and not self.store.queue:
                return True

    # ----- search hooks ----------------------------------------------------------

    def on_push(self, vid: int, val: int) -> None:
        self.snaps.append((self.cc.snapshot(), set(self.answered),
                           self.cur_fd_to_cc, self.cur_cc_to_fd))
        self.tracer.emit(ev="dec", var=self.store.names[vid], val=val)

    def on_pop(self) -> None:
        snap, answered, fd2cc, cc2fd = self.snaps.pop()
        self.cc.restore(snap)
        self.answered = answered
        self.cur_fd_to_cc = fd2cc
        self.cur_cc_to_fd = cc2fd
        self.tracer.emit(ev="back")

    def verify(self, vals: dict[int, int]) -> bool:
        return (not self.cc.unsat
                and self.model.check_model(self.f.atoms, vals))


# ----- the cc-only driver ----------------------------------------------------


def _select_hull(f: F.Formula, t: Term) -> tuple[int, int]:
    """Bounds on the value a read can take, from the declarations."""

    def int_hull(u: Term) -> tuple[int, int]:
        if u.is_const:
            return (u.value, u.value)
        if u.is_var:
            lo, hi = f.int_domains[u.id]
            return (lo, hi)
        if u.kind == SELECT:
            return _select_hull(f, u)
        raise AssertionError(f"integer term of kind {u.kind}")

    arr = t.args[0]
    lo, hi = None, None

    def widen(pair) -> None:
        nonlocal lo, hi
        lo = pair[0] if lo is None else min(lo, pair[0])
        hi = pair[1] if hi is None else max(hi, pair[1])

    while arr.kind == STORE:
        widen(int_hull(arr.args[2]))
        arr = arr.args[0]
    if arr.kind == UNIFORM:
        widen(int_hull(arr.args[0]))
    else:
        info = f.array_info_for(arr)
        assert info is not None
        widen((info.elem_lo, info.elem_hi))
    return (lo, hi)


def _index_caps(f: F.Formula) -> tuple[dict[int, int], bool]:
    """Tightest fixed-array size each non-constant index term reaches,
    plus whether some constant index is out of bounds outright."""
    caps: dict[int, int] = {}
    const_oob = False
    for atom in f.atoms:
        for t in _walk_atom_terms(atom):
            for s in subterms(t):
                if s.kind not in (SELECT, STORE):
                    continue
                base = f.base_array(s.args[0])
                if base.kind == UNIFORM:
                    continue
                info = f.array_info_for(base)
                if info is None or not info.fixed:
                    continue
                idx = s.args[1]
                if idx.is_const:
                    if not 0 <= idx.value < info.size:
                        const_oob = True
                else:
                    caps[idx.id] = min(caps.get(idx.id, info.size), info.size)
    return caps, const_oob


class _CcOnly:
    """Plain enumeration of integers and read values, pruned by the
    closure; a surviving leaf is completed to a ground model and checked
    by direct evaluation."""

    def __init__(self, f: F.Formula, disp: F.DispatchResult, cfg: Config,
                 stats: Stats, tracer: Tracer, budget: Budget) -> None:
        self.f = f
        self.stats = stats
        self.tracer = tracer
        self.budget = budget
        self.cc = CongruenceClosure(f.table, uniform_select_hook(f.table))
        self.consts: dict[int, Term] = {}
        for name, info in f.arrays.items():
            if not info.fixed and info.uniform_elem is None:
                raise ValueError("the cc-only solver handles fixed-size "
                                 f"arrays only, '{name}' is growable")
        for sel, elem in uniform_read_equalities(f):
            self.cc.assert_eq(sel, elem)
        for atom in disp.cc_atoms:
            match atom:
                case F.Eq(a=a, b=b) | F.ArrayEq(a=a, b=b):
                    self.cc.assert_eq(a, b)
                case F.Diff(a=a, b=b):
                    self.cc.assert_diff(a, b)
        for atom in disp.cc_atoms:
            for t in _walk_atom_terms(atom):
                for s in subterms(t):
                    if s.is_const:
                        self.consts[s.value] = s

        self.items: list[tuple[Term, list[int]]] = []
        for atom in f.atoms:
            if isinstance(atom, F.DomainDecl):
                self.items.append((atom.var, list(range(atom.lo, atom.hi + 1))))
        for t in _all_selects(f):
            if t.args[0].kind == UNIFORM:
                continue
            lo, hi = _select_hull(f, t)
            self.items.append((t, list(range(lo, hi + 1))))
        # an out-of-bounds access falsifies its atom, hence the whole
        # conjunction: clip index positions up front instead of failing
        # leaf by leaf
        caps, self.const_oob = _index_caps(f)
        self.items = [(t, [v for v in dom if 0 <= v < caps[t.id]]
                       if t.id in caps else dom)
                      for t, dom in self.items]
        self.assign: dict[int, int] = {}

    def _const(self, v: int) -> Term:
        t = self.consts.get(v)
        if t is None:
            t = self.f.table.const(v)
            for w in sorted(self.consts):
                self.cc.assert_diff(t, self.consts[w])
            self.consts[v] = t
        return t

    def run(self) -> tuple[str, GroundModel | None]:
        if self.cc.unsat:
            self.stats.verdict_source = "cc"
            return ("unsat", None)
        if self.const_oob:
            self.stats.verdict_source = "preprocess"
            return ("unsat", None)
        model = self._go(0)
        if model is not None:
            return ("sat", model)
        self.stats.verdict_source = "cc" if not self.items else "search"
        return ("unsat", None)

    def _go(self, d: int) -> GroundModel | None:
        if d == len(self.items):
            return self._leaf()
        term, dom = self.items[d]
        for v in dom:
            self.budget.check(self.stats.decisions)
            self.stats.decisions += 1
            ct = self._const(v)
            snap = self.cc.snapshot()
            self.cc.assert_eq(term, ct)
            self.cc.drain_created_selects()
            if not self.cc.unsat:
                self.assign[term.id] = v
                self.tracer.emit(ev="dec", var=_fmt(term), val=v)
                found = self._go(d + 1)
                if found is not None:
                    return found
                del self.assign[term.id]
            self.cc.restore(snap)
        return None

    def _ground(self, t: Term) -> int:
        if t.is_const:
            return t.value
        return self.assign[t.id]

    def _leaf(self) -> GroundModel | None:
        """Complete the assignment to a full ground model, or give up."""
        # arrays joined by =a share one cell table
        group: dict[str, str] = {name: name for name, info in
                                 self.f.arrays.items() if info.fixed}

        def rep(n: str) -> str:
            while group[n] != n:
                n = group[n]
            return n

        for atom in self.f.atoms:
            if isinstance(atom, F.ArrayEq):
                ra, rb = rep(atom.a.name), rep(atom.b.name)
                if ra != rb:
                    group[ra] = rb
        cells: dict[str, dict[int, int]] = {rep(n): {} for n in group}

        for term, _ in self.items:
            if term.kind != SELECT:
                continue
            v = self.assign[term.id]
            arr = term.args[0]
            j = self._ground(term.args[1])
            hit = False
            while arr.kind == STORE:
                base = self.f.base_array(arr)
                wj = self._ground(arr.args[1])
                if base.kind != UNIFORM:
                    info = self.f.array_info_for(base)
                    if not 0 <= wj < info.size:
                        return None
                if wj == j:
                    if self._ground(arr.args[2]) != v:
                        return None
                    hit = True
                    break
                arr = arr.args[0]
            if hit:
                continue
            if arr.kind == UNIFORM:
                if self._ground(arr.args[0]) != v:
                    return None
                continue
            info = self.f.array_info_for(arr)
            if not 0 <= j < info.size:
                return None
            table = cells[rep(arr.name)]
            if table.setdefault(j, v) != v:
                return None

        gm = GroundModel()
        for term, _ in self.items:
            if term.is_var:
                gm.ints[term.name] = self.assign[term.id]
        for name, info in self.f.arrays.items():
            if not info.fixed:
                continue
            members = [n for n in group if rep(n) == rep(name)]
            glo = max(self.f.arrays[n].elem_lo for n in members)
            ghi = min(self.f.arrays[n].elem_hi for n in members)
            out = []
            for k in range(info.size):
                pinned = cells[rep(name)].get(k)
                if pinned is None:
                    if glo > ghi:
                        return None
                    pinned = glo
                out.append(pinned)
            gm.arrays[name] = out
        if not oracle_eval(self.f, gm):
            return None
        return gm


# ----- drivers -----------------------------------------------------------------


def solve(f: F.Formula, cfg: Config | None = None) -> SolveResult:
    """Decide a parsed formula; the single entry point behind the CLI."""
    cfg = cfg or Config()
    stats = Stats()
    tracer = Tracer(cfg.trace_path)
    t0 = time.perf_counter()
    try:
        return _solve(f, cfg, stats, tracer)
    finally:
        stats.wall_ms = (time.perf_counter() - t0) * 1000.0
        tracer.close()


def _solve(f: F.Formula, cfg: Config, stats: Stats, tracer: Tracer) -> SolveResult:
    if cfg.solver not in ("fdcc", "fd", "cc"):
        raise ValueError(f"unknown solver '{cfg.solver}'")
    budget = Budget.from_timeout(cfg.timeout, cfg.max_decisions)
    declared_maps = f
    f = encode_maps(f)
    diff_array = cfg.diff_array if cfg.solver != "cc" else "witness"
    f = F.desugar_extensionality(f, diff_array)
    stats.n_store, stats.n_select = _count_terms(f)
    if f.unsat_reason is not None:
        stats.verdict_source = "preprocess"
        tracer.emit(ev="verdict", verdict="unsat", source="preprocess",
                    reason=f.unsat_reason)
        return SolveResult("unsat", None, stats, f.unsat_reason)
    disp = F.dispatch(f)

    try:
        if cfg.solver == "cc":
            try:
                driver = _CcOnly(f, disp, cfg, stats, tracer, budget)
            except ValueError as exc:
                stats.verdict_source = "cc"
                return SolveResult("unknown", None, stats, str(exc))
            verdict, gm = driver.run()
            if verdict == "sat":
                stats.verdict_source = "search"
            if gm is not None:
                decode_map_model(declared_maps, gm)
            tracer.emit(ev="verdict", verdict=verdict,
                        decisions=stats.decisions)
            return SolveResult(verdict, gm, stats)

        if cfg.solver == "fd":
            store = Store()
            model = FdModel(store, f, cfg.alldiff)
            model.post_atoms(disp.fd_atoms)
            sstats = SearchStats()
            verdict, vals = search(
                store, store.propagate, budget, sstats,
                on_push=lambda vid, val: tracer.emit(
                    ev="dec", var=store.names[vid], val=val),
                verify=lambda vv: model.check_model(f.atoms, vv))
            stats.decisions = sstats.decisions
            stats.propagator_runs = store.runs
            if not stats.verdict_source:
                stats.verdict_source = "fd" if verdict == "unsat" else "search"
            gm = _ground_model(f, model, vals) if vals is not None else None
            if gm is not None:
                decode_map_model(declared_maps, gm)
            tracer.emit(ev="verdict", verdict=verdict, decisions=stats.decisions)
            return SolveResult(verdict, gm, stats)

        coop = _Cooperation(f, disp, cfg, stats, tracer, budget)
        if coop.cc.unsat:
            stats.verdict_source = "cc"
            tracer.emit(ev="verdict", verdict="unsat", source="cc",
                        reason=coop.cc.unsat_reason)
            return SolveResult("unsat", None, stats, coop.cc.unsat_reason)
        sstats = SearchStats()
        verdict, vals = search(coop.store, coop.fixpoint, budget, sstats,
                               on_push=coop.on_push, on_pop=coop.on_pop,
                               verify=coop.verify)
        stats.decisions = sstats.decisions
        stats.propagator_runs = coop.store.runs
        if verdict == "sat":
            stats.verdict_source = "search"
        elif not stats.verdict_source:
            stats.verdict_source = "search"
        gm = _ground_model(f, coop.model, vals) if vals is not None else None
        if gm is not None:
            decode_map_model(declared_maps, gm)
        tracer.emit(ev="verdict", verdict=verdict, decisions=stats.decisions)
        return SolveResult(verdict, gm, stats)

    except BudgetExceeded as exc:
        tracer.emit(ev="verdict", verdict="unknown", reason=str(exc))
        stats.verdict_source = "budget"
        return SolveResult("unknown", None, stats, str(exc))


def _ground_model(f: F.Formula, model: FdModel,
                  vals: dict[int, int]) -> GroundModel:
    gm = GroundModel()
    for name, t in f.symbols.items():
        if t.sort is Sort.INT and t.kind == VAR:
            vid = model.vid(t)
            if vid is not None:
                gm.ints[name] = vals[vid]
    for name, info in f.arrays.items():
        if info.uniform_elem is not None:
            continue
        rep = model.arrays.get(info.term.id)
        if rep is None:
            continue
        if isinstance(rep, ClosedCells):
            gm.arrays[name] = [vals[c] for c in rep.cells]
        else:
            # cells nothing ever touched stay implicit; default them
            s = vals[rep.size_vid]
            gm.grow[name] = (s, [vals[rep.entries[k]] if k in rep.entries
                                 else min(rep.top) for k in range(s)])
    return gm


def solve_text(text: str, cfg: Config | None = None) -> SolveResult:
    from .parser import parse
    return solve(parse(text), cfg)
