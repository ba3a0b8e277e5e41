"""Congruence closure over select/store terms with delayed rewrite rules.

Union-find with three per-class sets (disequalities, covering selects,
covered selects) plus a watch list that implements the read-over-write
rules lazily: every select-over-store installs guarded consequences that
fire when the guard becomes decidable. The engine is a sound
semi-procedure: every deduction it emits is entailed, a contradiction is
definitive, but silence proves nothing, so it never answers SAT.

The closure runs a work queue of literals. Processing an equality merges
two classes and rescans the merged class for newly congruent selects
(covering rule) and newly matching disequality pairs (covered rule);
processing a disequality records the edge, runs the covered rule across
it, and reports any 3-clique it completes. After every change the watch
pairs homed at touched classes are partially evaluated: a true guard
fires its consequence into the queue, a false guard retires the pair.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .terms import SELECT, STORE, Sort, Term, TermTable, format_term

EQ = "eq"
DIFF = "diff"

TRUE = "true"
FALSE = "false"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class NewEq:
    a: Term
    b: Term


@dataclass(frozen=True)
class NewDiff:
    a: Term
    b: Term


@dataclass(frozen=True)
class Clique3:
    members: tuple[Term, Term, Term]


@dataclass(frozen=True)
class UnsatFound:
    reason: str


Deduction = NewEq | NewDiff | Clique3 | UnsatFound


@dataclass
class _WatchPair:
    pid: int
    guard: tuple[str, int, int]           # (polarity, term id, term id)
    # consequence: a literal, or a select to build and equate with target
    lit: tuple[str, int, int] | None = None
    make_select: tuple[int, int, int] | None = None  # (target, array, index)


@dataclass
class _Node:
    parent: int
    rank: int = 0
    diff: set[int] = field(default_factory=set)          # representative ids
    super_: set[tuple[int, int]] = field(default_factory=set)  # (array, select)
    sub: set[tuple[int, int]] = field(default_factory=set)     # (index, array)
    watches: list[int] = field(default_factory=list)     # pair ids homed here

    def copy(self) -> "_Node":
        return _Node(self.parent, self.rank, set(self.diff), set(self.super_),
                     set(self.sub), list(self.watches))


class CongruenceClosure:
    """One closure session over a shared term table."""

    def __init__(self, table: TermTable,
                 make_select: Callable[[Term, Term], Term] | None = None) -> None:
        self.table = table
        # make_select builds the consequence term of the covered-write
        # rule; the extension layer substitutes a version that rewrites
        # reads of constant arrays down to their element
        self._make_select = make_select or (lambda a, i: table.select(a, i))
        self.nodes: dict[int, _Node] = {}
        self.pairs: list[_WatchPair] = []
        self.alive: set[int] = set()
        self.emitted: set[tuple[str, int, int]] = set()
        self.cliques_seen: set[tuple[int, int, int]] = set()
        # (array id, index id) -> select-over-store term ids with that target
        self.by_target: dict[tuple[int, int], list[int]] = {}
        self.created_selects: list[Term] = []
        self.unsat = False
        self.unsat_reason = ""

    # ----- union-find ------------------------------------------------------

    def registered(self, t: Term) -> bool:
        return t.id in self.nodes

    def find(self, tid: int) -> int:
        root = tid
        while self.nodes[root].parent != root:
            root = self.nodes[root].parent
        while self.nodes[tid].parent != tid:
            self.nodes[tid].parent, tid = root, self.nodes[tid].parent
        return root

    def equal(self, a: Term, b: Term) -> bool:
        return self.find(a.id) == self.find(b.id)

    def are_diff(self, a: Term, b: Term) -> bool:
        ra, rb = self.find(a.id), self.find(b.id)
        return rb in self.nodes[ra].diff

    def partial_eval(self, pol: str, a: Term, b: Term) -> str:
        """Decide a literal from current knowledge, if possible."""
        if self.equal(a, b):
            return TRUE if pol == EQ else FALSE
        if self.are_diff(a, b):
            return FALSE if pol == EQ else TRUE
        return UNKNOWN

    # ----- registration ----------------------------------------------------

    def register(self, t: Term) -> list[Deduction]:
        """Make a term (and its subterms) known; may already fire rules."""
        if self.unsat:
            return []
        queue: deque = deque()
        deds: list[Deduction] = []
        self._register(t, queue, deds)
        self._drain(queue, deds)
        return deds

    def _register(self, t: Term, queue: deque, deds: list[Deduction]) -> None:
        if t.id in self.nodes:
            return
        if t.sort is Sort.MAP:
            raise ValueError("maps must be encoded away before closure")
        for a in t.args:
            self._register(a, queue, deds)
        self.nodes[t.id] = _Node(parent=t.id)
        if t.kind != SELECT:
            return

        arr, idx = t.args
        # covering/covered bookkeeping lives on both ends of the select
        entry = (arr.id, t.id)
        self.nodes[self.find(arr.id)].super_.add(entry)
        self.nodes[self.find(idx.id)].super_.add(entry)
        self.nodes[self.find(t.id)].sub.add((idx.id, arr.id))
        touched = [self.find(arr.id), self.find(idx.id), self.find(t.id)]

        # a fresh read may be congruent to an existing one right away
        self._close_eq_scan(self.find(arr.id), queue)
        self._close_eq_scan(self.find(idx.id), queue)

        if arr.kind == STORE:
            base, wi, we = arr.args
            self._install((EQ, wi.id, idx.id), lit=(EQ, t.id, we.id))
            self._install((DIFF, t.id, we.id), lit=(DIFF, wi.id, idx.id))
            self._install((DIFF, wi.id, idx.id),
                          make_select=(t.id, base.id, idx.id))
            self.by_target.setdefault((base.id, idx.id), []).append(t.id)
            prior = self.table.lookup_select(base, idx)
            if prior is not None and prior.id in self.nodes:
                self._install((DIFF, t.id, prior.id), lit=(EQ, wi.id, idx.id))
        # this select may be the missing read some covered-write watch needs
        for other_id in self.by_target.get((arr.id, idx.id), []):
            if other_id != t.id:
                other = self.table.by_id(other_id)
                wi = other.args[0].args[1]
                self._install((DIFF, other_id, t.id), lit=(EQ, wi.id, idx.id))

        self._check_watches(touched, queue)

    def _install(self, guard: tuple[str, int, int], lit=None, make_select=None) -> None:
        pair = _WatchPair(len(self.pairs), guard, lit, make_select)
        self.pairs.append(pair)
        self.alive.add(pair.pid)
        self.nodes[self.find(guard[1])].watches.append(pair.pid)
        self.nodes[self.find(guard[2])].watches.append(pair.pid)

    # ----- assertion -------------------------------------------------------

    def assert_literal(self, pol: str, a: Term, b: Term) -> list[Deduction]:
        """Assert an input (dis-)equality; returns everything newly derived."""
        if self.unsat:
            return []
        queue: deque = deque()
        deds: list[Deduction] = []
        self._register(a, queue, deds)
        self._register(b, queue, deds)
        queue.append((pol, a.id, b.id, False))
        self._drain(queue, deds)
        return deds

    def assert_eq(self, a: Term, b: Term) -> list[Deduction]:
        return self.assert_literal(EQ, a, b)

    def assert_diff(self, a: Term, b: Term) -> list[Deduction]:
        return self.assert_literal(DIFF, a, b)

    # ----- the work loop ---------------------------------------------------

    def _drain(self, queue: deque, deds: list[Deduction]) -> None:
        while queue and not self.unsat:
            pol, aid, bid, derived = queue.popleft()
            if pol == EQ:
                self._process_eq(aid, bid, derived, queue, deds)
            else:
                self._process_diff(aid, bid, derived, queue, deds)
        if self.unsat and (not deds or not isinstance(deds[-1], UnsatFound)):
            deds.append(UnsatFound(self.unsat_reason))

    def _emit(self, pol: str, aid: int, bid: int, derived: bool,
              deds: list[Deduction]) -> None:
        if not derived:
            return
        key = (pol, min(aid, bid), max(aid, bid))
        if key in self.emitted:
            return
        self.emitted.add(key)
        a, b = self.table.by_id(aid), self.table.by_id(bid)
        deds.append(NewEq(a, b) if pol == EQ else NewDiff(a, b))

    def _process_eq(self, aid: int, bid: int, derived: bool,
                    queue: deque, deds: list[Deduction]) -> None:
        ra, rb = self.find(aid), self.find(bid)
        if ra == rb:
            return
        if rb in self.nodes[ra].diff:
            self._emit(EQ, aid, bid, derived, deds)
            self._fail(f"{format_term(self.table.by_id(aid))} and "
                       f"{format_term(self.table.by_id(bid))} are both "
                       "equal and different")
            return
        self._emit(EQ, aid, bid, derived, deds)
        r = self._union(ra, rb, queue)
        self._check_watches([r], queue)

    def _process_diff(self, aid: int, bid: int, derived: bool,
                      queue: deque, deds: list[Deduction]) -> None:
        ra, rb = self.find(aid), self.find(bid)
        if ra == rb:
            self._emit(DIFF, aid, bid, derived, deds)
            self._fail(f"{format_term(self.table.by_id(aid))} differs "
                       "from itself")
            return
        if rb in self.nodes[ra].diff:
            return
        self._emit(DIFF, aid, bid, derived, deds)
        self.nodes[ra].diff.add(rb)
        self.nodes[rb].diff.add(ra)
        # a new edge may close triangles: report each once
        common = self.nodes[ra].diff & self.nodes[rb].diff
        for w in sorted(common):
            key = tuple(sorted((ra, rb, w)))
            if key not in self.cliques_seen:
                self.cliques_seen.add(key)
                deds.append(Clique3(tuple(self.table.by_id(i) for i in key)))
        self._close_diff_pair(ra, rb, queue)
        self._check_watches([ra, rb], queue)

    def _fail(self, reason: str) -> None:
        self.unsat = True
        self.unsat_reason = reason

    def _union(self, ra: int, rb: int, queue: deque) -> int:
        na, nb = self.nodes[ra], self.nodes[rb]
        if na.rank < nb.rank:
            ra, rb, na, nb = rb, ra, nb, na
        # rb is absorbed into ra
        nb.parent = ra
        if na.rank == nb.rank:
            na.rank += 1
        # disequality edges must keep pointing at live representatives
        for d in sorted(nb.diff):
            self.nodes[d].diff.discard(rb)
            self.nodes[d].diff.add(ra)
        na.diff |= nb.diff
        na.super_ |= nb.super_
        na.sub |= nb.sub
        na.watches.extend(nb.watches)
        nb.diff, nb.super_, nb.sub, nb.watches = set(), set(), set(), []

        self._close_eq_scan(ra, queue)
        # growing a class can complete covered-rule matches with every
        # disequality neighbour, and array merges do the same for selects
        # over the merged arrays; rescan both
        for d in sorted(self.nodes[ra].diff):
            self._close_diff_pair(ra, d, queue)
        for arr_id, sel_id in sorted(self.nodes[ra].super_):
            if self.find(arr_id) == ra:
                rs = self.find(sel_id)
                for d in sorted(self.nodes[rs].diff):
                    self._close_diff_pair(rs, d, queue)
        return ra

    def _close_eq_scan(self, rep: int, queue: deque) -> None:
        """Covering rule: congruent selects inside one class's super set."""
        entries = sorted(self.nodes[rep].super_)
        for i, (a1, s1) in enumerate(entries):
            for a2, s2 in entries[i + 1:]:
                if s1 == s2 or self.find(s1) == self.find(s2):
                    continue
                t1, t2 = self.table.by_id(s1), self.table.by_id(s2)
                if (self.find(a1) == self.find(a2)
                        and self.find(t1.args[1].id) == self.find(t2.args[1].id)):
                    queue.append((EQ, s1, s2, True))

    def _close_diff_pair(self, r1: int, r2: int, queue: deque) -> None:
        """Covered rule: reads of one array forced apart force indexes apart."""
        for i1, a1 in sorted(self.nodes[r1].sub):
            for i2, a2 in sorted(self.nodes[r2].sub):
                if self.find(a1) != self.find(a2):
                    continue
                ri1, ri2 = self.find(i1), self.find(i2)
                if ri1 != ri2 and ri2 not in self.nodes[ri1].diff:
                    queue.append((DIFF, i1, i2, True))

    def _check_watches(self, reps: list[int], queue: deque) -> None:
        for rep in reps:
            rep = self.find(rep)
            node = self.nodes[rep]
            # detach: a fired watch can register a new select, which
            # installs fresh pairs on this very class mid-scan
            pending = node.watches
            node.watches = []
            for pid in pending:
                if pid not in self.alive:
                    continue
                pair = self.pairs[pid]
                pol, g1, g2 = pair.guard
                v = self.partial_eval(pol, self.table.by_id(g1),
                                      self.table.by_id(g2))
                if v == UNKNOWN:
                    node.watches.append(pid)
                    continue
                self.alive.discard(pid)
                if v == FALSE:
                    continue
                if pair.lit is not None:
                    queue.append((*pair.lit, True))
                else:
                    tgt, arr_id, idx_id = pair.make_select
                    arr = self.table.by_id(arr_id)
                    idx = self.table.by_id(idx_id)
                    res = self._make_select(arr, idx)
                    if res.id not in self.nodes:
                        self._register(res, queue, [])
                        if res.kind == SELECT:
                            self.created_selects.append(res)
                    queue.append((EQ, tgt, res.id, True))

    def drain_created_selects(self) -> list[Term]:
        out = self.created_selects
        self.created_selects = []
        return out

    # ----- snapshot / restore ----------------------------------------------

    def snapshot(self) -> dict:
        return {
            "nodes": {tid: n.copy() for tid, n in self.nodes.items()},
            "n_pairs": len(self.pairs),
            "alive": set(self.alive),
            "emitted": set(self.emitted),
            "cliques": set(self.cliques_seen),
            "by_target": {k: list(v) for k, v in self.by_target.items()},
            "created": list(self.created_selects),
            "unsat": self.unsat,
            "reason": self.unsat_reason,
        }

    def restore(self, snap: dict) -> None:
        self.nodes = {tid: n.copy() for tid, n in snap["nodes"].items()}
        del self.pairs[snap["n_pairs"]:]
        self.alive = set(snap["alive"])
        self.emitted = set(snap["emitted"])
        self.cliques_seen = set(snap["cliques"])
        self.by_target = {k: list(v) for k, v in snap["by_target"].items()}
        self.created_selects = list(snap["created"])
        self.unsat = snap["unsat"]
        self.unsat_reason = snap["reason"]

    # ----- debug -----------------------------------------------------------

    def dump(self) -> dict:
        classes: dict[int, list[str]] = {}
        for tid in self.nodes:
            classes.setdefault(self.find(tid), []).append(
                format_term(self.table.by_id(tid)))
        diffs = []
        for rep in sorted(classes):
            for d in sorted(self.nodes[rep].diff):
                if rep < d:
                    diffs.append([format_term(self.table.by_id(rep)),
                                  format_term(self.table.by_id(d))])
        watches = []
        for pid in sorted(self.alive):
            pair = self.pairs[pid]
            pol, g1, g2 = pair.guard
            watches.append({
                "guard": [pol, format_term(self.table.by_id(g1)),
                          format_term(self.table.by_id(g2))],
                "fires": ([pair.lit[0], format_term(self.table.by_id(pair.lit[1])),
                           format_term(self.table.by_id(pair.lit[2]))]
                          if pair.lit else "new-read"),
            })
        return {
            "classes": sorted(sorted(m) for m in classes.values()),
            "diffs": diffs,
            "watches": watches,
            "unsat": self.unsat,
        }
