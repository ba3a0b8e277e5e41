"""Finite-domain store, propagators and backtracking search.

Domains are plain frozensets of ints held in a trailed store: every
domain write records the old set, so popping a decision level restores
state bit-exactly. Propagators are objects with a propagate() method
run to fixpoint through a FIFO queue; each returns False to signal a
wiped domain. The search is binary labelling (X = k, then X != k on
failure) with pluggable hooks so the supervisor can interleave its own
exchange with the equality engine at every fixpoint and keep that
engine's state in sync across push/pop.
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

TIER_SIZE = 0      # size variables of growable arrays
TIER_INDEX = 1     # variables used in select/store index position
TIER_ELEM = 2      # array cells, read values, stored elements
TIER_REST = 3


class BudgetExceeded(Exception):
    pass


@dataclass
class Budget:
    deadline: float | None = None        # absolute time.perf_counter() limit
    max_decisions: int | None = None

    @staticmethod
    def from_timeout(timeout_s: float | None,
                     max_decisions: int | None = None) -> "Budget":
        deadline = (time.perf_counter() + timeout_s) if timeout_s else None
        return Budget(deadline, max_decisions)

    def check(self, decisions: int) -> None:
        if self.max_decisions is not None and decisions > self.max_decisions:
            raise BudgetExceeded("decision limit")
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise BudgetExceeded("timeout")


class Propagator:
    """Base class; subclasses override propagate() and watched()."""

    pid: int = -1

    def watched(self) -> Iterable[int]:
        raise NotImplementedError

    def propagate(self, store: "Store") -> bool:
        raise NotImplementedError


class Store:
    def __init__(self) -> None:
        self.domains: list[frozenset[int]] = []
        self.names: list[str] = []
        self.tiers: list[int] = []
        self.watchers: list[list[Propagator]] = []
        self.props: list[Propagator] = []
        self.queue: deque[Propagator] = deque()
        self.queued: set[int] = set()
        self.trail: list[tuple] = []
        self.marks: list[int] = []
        self.failed = False
        self.runs = 0              # propagator executions, for tests

    # ----- variables -------------------------------------------------------

    def new_var(self, name: str, dom: Iterable[int], tier: int = TIER_REST) -> int:
        d = frozenset(dom)
        assert d, f"empty initial domain for {name}"
        vid = len(self.domains)
        self.domains.append(d)
        self.names.append(name)
        self.tiers.append(tier)
        self.watchers.append([])
        if self.marks:
            self.trail.append(("var", vid))
        return vid

    def dom(self, vid: int) -> frozenset[int]:
        return self.domains[vid]

    def bound(self, vid: int) -> bool:
        return len(self.domains[vid]) == 1

    def value(self, vid: int) -> int:
        d = self.domains[vid]
        assert len(d) == 1
        return next(iter(d))

    # ----- domain updates ----------------------------------------------------

    def restrict(self, vid: int, allowed: Iterable[int],
                 src: Propagator | None = None) -> bool:
        """Intersect a domain; schedules watchers, fails on empty."""
        old = self.domains[vid]
        new = old & (allowed if isinstance(allowed, frozenset)
                     else frozenset(allowed))
        if new == old:
            return True
        self.trail.append(("dom", vid, old))
        self.domains[vid] = new
        if not new:
            self.failed = True
            self.queue.clear()
            self.queued.clear()
            return False
        for p in self.watchers[vid]:
            if p is not src:
                self._schedule(p)
        return True

    def assign(self, vid: int, val: int) -> bool:
        return self.restrict(vid, frozenset((val,)))

    def exclude(self, vid: int, val: int) -> bool:
        return self.restrict(vid, self.domains[vid] - {val})

    # ----- propagation --------------------------------------------------------

    def _schedule(self, p: Propagator) -> None:
        if p.pid not in self.queued:
            self.queued.add(p.pid)
            self.queue.append(p)

    def post(self, p: Propagator) -> bool:
        """Register a propagator and run the queue on it."""
        p.pid = len(self.props)
        self.props.append(p)
        watched = sorted(set(p.watched()))
        for vid in watched:
            self.watchers[vid].append(p)
        if self.marks:
            self.trail.append(("prop", p, tuple(watched)))
        self._schedule(p)
        return True

    def propagate(self) -> bool:
        if self.failed:
            return False
        while self.queue:
            p = self.queue.popleft()
            self.queued.discard(p.pid)
            self.runs += 1
            if not p.propagate(self):
                self.failed = True
                self.queue.clear()
                self.queued.clear()
                return False
        return True

    # ----- trail ----------------------------------------------------------------

    def on_undo(self, fn: Callable[[], None]) -> None:
        """Record an arbitrary state-restoring callback (extension state)."""
        if self.marks:
            self.trail.append(("undo", fn))

    def watch_late(self, vid: int, p: Propagator) -> None:
        """Add a watcher after posting (growable-array cells)."""
        self.watchers[vid].append(p)
        if self.marks:
            self.trail.append(("watch", vid, p))

    def push(self) -> None:
        self.marks.append(len(self.trail))

    def pop(self) -> None:
        mark = self.marks.pop()
        while len(self.trail) > mark:
            entry = self.trail.pop()
            tag = entry[0]
            if tag == "dom":
                self.domains[entry[1]] = entry[2]
            elif tag == "var":
                vid = entry[1]
                assert vid == len(self.domains) - 1
                self.domains.pop()
                self.names.pop()
                self.tiers.pop()
                self.watchers.pop()
            elif tag == "prop":
                p, watched = entry[1], entry[2]
                assert self.props and self.props[-1] is p
                self.props.pop()
                for vid in watched:
                    self.watchers[vid].remove(p)
            elif tag == "watch":
                self.watchers[entry[1]].remove(entry[2])
            else:
                entry[1]()
        self.failed = False
        self.queue.clear()
        self.queued.clear()

    # ----- entailment queries -----------------------------------------------------

    def is_eq(self, x: int, y: int) -> bool:
        """Known equal: both bound to the same value."""
        dx, dy = self.domains[x], self.domains[y]
        return len(dx) == 1 and dx == dy

    def is_diff(self, x: int, y: int, probe: bool = False) -> bool:
        """Known different: disjoint domains, or (probe) x=y refutes."""
        if not (self.domains[x] & self.domains[y]):
            return True
        if not probe or x == y:
            return False
        self.push()
        ok = self.post(EqProp(x, y)) and self.propagate()
        self.pop()
        return not ok

    # ----- labelling ---------------------------------------------------------------

    def pick_unbound(self) -> int | None:
        best: int | None = None
        best_key = None
        for vid, d in enumerate(self.domains):
            if len(d) <= 1:
                continue
            key = (self.tiers[vid], len(d), vid)
            if best_key is None or key < best_key:
                best, best_key = vid, key
        return best

    def model(self) -> dict[int, int]:
        assert all(len(d) == 1 for d in self.domains)
        return {vid: next(iter(d)) for vid, d in enumerate(self.domains)}


@dataclass
class SearchStats:
    decisions: int = 0


def search(store: Store,
           fixpoint: Callable[[], bool],
           budget: Budget,
           stats: SearchStats,
           on_push: Callable[[int, int], None] = lambda vid, val: None,
           on_pop: Callable[[], None] = lambda: None,
           verify: Callable[[dict[int, int]], bool] | None = None,
           ) -> tuple[str, dict[int, int] | None]:
    """Depth-first binary labelling over the store's unbound variables.

    fixpoint() must propagate (and may exchange facts with other engines);
    it reports False on conflict. Returns ("sat", model) or ("unsat", None);
    raises BudgetExceeded when the budget runs out.
    """
    if not fixpoint():
        return ("unsat", None)
    frames: list[tuple[int, int]] = []
    while True:
        vid = store.pick_unbound()
        if vid is None:
            model = store.model()
            if verify is not None and not verify(model):
                raise AssertionError("labelling produced a non-model")
            return ("sat", model)
        budget.check(stats.decisions)
        val = min(store.domains[vid])
        stats.decisions += 1
        store.push()
        on_push(vid, val)
        frames.append((vid, val))
        ok = store.assign(vid, val) and fixpoint()
        while not ok:
            if not frames:
                return ("unsat", None)
            f_vid, f_val = frames.pop()
            store.pop()
            on_pop()
            # refute the branch where it was decided; no fresh level
            ok = store.exclude(f_vid, f_val) and fixpoint()


# ----- core propagators ------------------------------------------------------


class EqProp(Propagator):
    def __init__(self, x: int, y: int) -> None:
        self.x, self.y = x, y

    def watched(self):
        return (self.x, self.y)

    def propagate(self, store: Store) -> bool:
        both = store.dom(self.x) & store.dom(self.y)
        return (store.restrict(self.x, both, self)
                and store.restrict(self.y, both, self))


class DiffProp(Propagator):
    def __init__(self, x: int, y: int) -> None:
        self.x, self.y = x, y

    def watched(self):
        return (self.x, self.y)

    def propagate(self, store: Store) -> bool:
        if self.x == self.y:
            return False
        dx, dy = store.dom(self.x), store.dom(self.y)
        if len(dx) == 1 and not store.restrict(self.y, dy - dx, self):
            return False
        dy = store.dom(self.y)
        if len(dy) == 1 and not store.restrict(self.x, store.dom(self.x) - dy,
                                               self):
            return False
        return True


class AccessProp(Propagator):
    """value = array[index] over explicit cells."""

    def __init__(self, cells: list[int], ivid: int, evid: int) -> None:
        self.cells = cells
        self.i = ivid
        self.e = evid

    def watched(self):
        return (*self.cells, self.i, self.e)

    def propagate(self, store: Store) -> bool:
        n = len(self.cells)
        while True:
            changed = False
            di = store.dom(self.i)
            de = store.dom(self.e)
            # keep only indexes whose cell can still hold the value
            live = frozenset(i for i in di
                             if 0 <= i < n and de & store.dom(self.cells[i]))
            if live != di:
                if not store.restrict(self.i, live, self):
                    return False
                changed = True
                di = live
            if not di:
                return False
            # the value must be readable from some live cell
            acc: set[int] = set()
            for i in sorted(di):
                acc |= store.dom(self.cells[i])
                if de <= acc:
                    break
            if not de <= acc:
                if not store.restrict(self.e, acc, self):
                    return False
                changed = True
            if len(di) == 1:
                c = self.cells[next(iter(di))]
                both = store.dom(c) & store.dom(self.e)
                if both != store.dom(c) or both != store.dom(self.e):
                    if not (store.restrict(c, both, self)
                            and store.restrict(self.e, both, self)):
                        return False
                    changed = True
            if not changed:
                return True


class UpdateProp(Propagator):
    """after = store(before, index, elem) over explicit cells."""

    def __init__(self, a_cells: list[int], ivid: int, evid: int,
                 b_cells: list[int]) -> None:
        assert len(a_cells) == len(b_cells)
        self.a = a_cells
        self.b = b_cells
        self.i = ivid
        self.e = evid

    def watched(self):
        return (*self.a, *self.b, self.i, self.e)

    def propagate(self, store: Store) -> bool:
        n = len(self.a)
        while True:
            changed = False

            def tighten(vid: int, allowed: frozenset[int]) -> bool:
                nonlocal changed
                if store.dom(vid) <= allowed:
                    return True
                changed = True
                return store.restrict(vid, allowed, self)

            di = store.dom(self.i)
            de = store.dom(self.e)
            live = frozenset(i for i in di
                             if 0 <= i < n and de & store.dom(self.b[i]))
            if live != di:
                if not store.restrict(self.i, live, self):
                    return False
                changed = True
                di = live
            if not di:
                return False
            acc: set[int] = set()
            for i in sorted(di):
                acc |= store.dom(self.b[i])
                if de <= acc:
                    break
            if not tighten(self.e, frozenset(acc)):
                return False
            de = store.dom(self.e)
            if len(di) == 1:
                i = next(iter(di))
                both = store.dom(self.b[i]) & de
                if not (tighten(self.b[i], both) and tighten(self.e, both)):
                    return False
                de = store.dom(self.e)
            for k in range(n):
                if k in di:
                    # the write may land here: old value or the element
                    if not tighten(self.b[k], store.dom(self.a[k]) | de):
                        return False
                    if di != frozenset((k,)) and \
                            not store.dom(self.a[k]) & store.dom(self.b[k]):
                        # changed cell: the write certainly landed here
                        if not store.restrict(self.i, frozenset((k,)), self):
                            return False
                        changed = True
                        di = store.dom(self.i)
                else:
                    both = store.dom(self.a[k]) & store.dom(self.b[k])
                    if not (tighten(self.a[k], both) and tighten(self.b[k], both)):
                        return False
            if not changed:
                return True


class AllDiffProp(Propagator):
    def __init__(self, vids: list[int], strength: str = "basic") -> None:
        self.vids = list(dict.fromkeys(vids))
        self.strength = strength

    def watched(self):
        return tuple(self.vids)

    def propagate(self, store: Store) -> bool:
        vids = self.vids
        if len(vids) <= 1:
            return True
        # pairwise: bound values leave the other domains
        while True:
            changed = False
            taken: dict[int, int] = {}
            for v in vids:
                d = store.dom(v)
                if len(d) == 1:
                    val = next(iter(d))
                    if val in taken and taken[val] != v:
                        return False
                    taken[val] = v
            for v in vids:
                d = store.dom(v)
                if len(d) == 1:
                    continue
                allowed = d - {val for val, owner in taken.items() if owner != v}
                if allowed != d:
                    if not store.restrict(v, allowed, self):
                        return False
                    changed = True
            if not changed:
                break
        union: set[int] = set()
        for v in vids:
            union |= store.dom(v)
        if len(union) < len(vids):
            return False
        if self.strength == "matching":
            return self._matching_filter(store, sorted(union))
        return True

    def _matching_filter(self, store: Store, values: list[int]) -> bool:
        """Fail without a perfect matching; drop values no matching uses."""
        vids = self.vids
        vindex = {v: k for k, v in enumerate(values)}
        adj = [sorted(vindex[val] for val in store.dom(v)) for v in vids]
        match_of_val: list[int] = [-1] * len(values)

        def kuhn(x: int, seen: list[bool]) -> bool:
            for v in adj[x]:
                if not seen[v]:
                    seen[v] = True
                    if match_of_val[v] < 0 or kuhn(match_of_val[v], seen):
                        match_of_val[v] = x
                        return True
            return False

        for x in range(len(vids)):
            if not kuhn(x, [False] * len(values)):
                return False
        match_of_var = [-1] * len(vids)
        for v, x in enumerate(match_of_val):
            if x >= 0:
                match_of_var[x] = v

        # free values reach edges usable by an alternating path
        reach_val = [False] * len(values)
        reach_var = [False] * len(vids)
        stack = [v for v in range(len(values)) if match_of_val[v] < 0]
        for v in stack:
            reach_val[v] = True
        var_adj_rev: list[list[int]] = [[] for _ in range(len(values))]
        for x in range(len(vids)):
            for v in adj[x]:
                var_adj_rev[v].append(x)
        while stack:
            v = stack.pop()
            for x in var_adj_rev[v]:
                if match_of_var[x] != v and not reach_var[x]:
                    reach_var[x] = True
                    mv = match_of_var[x]
                    if mv >= 0 and not reach_val[mv]:
                        reach_val[mv] = True
                        stack.append(mv)

        sccs = self._scc(len(vids), len(values), adj, match_of_var)
        for x, v in enumerate(vids):
            keep = set()
            for val in store.dom(v):
                j = vindex[val]
                if match_of_var[x] == j or reach_val[j] \
                        or sccs[x] == sccs[len(vids) + j]:
                    keep.add(val)
            if not store.restrict(v, keep, self):
                return False
        return True

    @staticmethod
    def _scc(nx: int, nv: int, adj: list[list[int]],
             match_of_var: list[int]) -> list[int]:
        """Tarjan over vars (0..nx-1) and values (nx..nx+nv-1).

        Matched edges point value -> var, free edges var -> value.
        """
        n = nx + nv

        def succ(u: int):
            if u < nx:
                for v in adj[u]:
                    if match_of_var[u] != v:
                        yield nx + v
            else:
                x = -1
                v = u - nx
                for cand in range(nx):
                    if match_of_var[cand] == v:
                        x = cand
                        break
                if x >= 0:
                    yield x

        index = [0] * n
        low = [0] * n
        comp = [-1] * n
        on_stack = [False] * n
        stack: list[int] = []
        counter = [1]
        ncomp = [0]

        def strongconnect(root: int) -> None:
            work = [(root, iter(succ(root)))]
            index[root] = low[root] = counter[0]
            counter[0] += 1
            stack.append(root)
            on_stack[root] = True
            while work:
                u, it = work[-1]
                advanced = False
                for w in it:
                    if index[w] == 0:
                        index[w] = low[w] = counter[0]
                        counter[0] += 1
                        stack.append(w)
                        on_stack[w] = True
                        work.append((w, iter(succ(w))))
                        advanced = True
                        break
                    if on_stack[w]:
                        low[u] = min(low[u], index[w])
                if advanced:
                    continue
                work.pop()
                if work:
                    pu = work[-1][0]
                    low[pu] = min(low[pu], low[u])
                if low[u] == index[u]:
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp[w] = ncomp[0]
                        if w == u:
                            break
                    ncomp[0] += 1

        for u in range(n):
            if index[u] == 0:
                strongconnect(u)
        return comp


class LinearLeqProp(Propagator):
    """sum(c_j * x_j) <= bound, set-exact filtering off computed slack."""

    def __init__(self, coeffs: list[tuple[int, int]], bound: int) -> None:
        self.coeffs = coeffs            # (coefficient, vid)
        self.bound = bound

    def watched(self):
        return tuple(vid for _, vid in self.coeffs)

    def propagate(self, store: Store) -> bool:
        mins = []
        for c, vid in self.coeffs:
            d = store.dom(vid)
            mins.append(c * min(d) if c > 0 else c * max(d))
        slack = self.bound - sum(mins)
        if slack < 0:
            return False
        for (c, vid), m in zip(self.coeffs, mins):
            allowance = slack + m
            d = store.dom(vid)
            keep = frozenset(v for v in d if c * v <= allowance)
            if keep != d and not store.restrict(vid, keep, self):
                return False
        return True


class MulProp(Propagator):
    """z = x * y; exact on small domains, interval hull on z otherwise."""

    EXACT_LIMIT = 4096

    def __init__(self, x: int, y: int, z: int) -> None:
        self.x, self.y, self.z = x, y, z

    def watched(self):
        return (self.x, self.y, self.z)

    def propagate(self, store: Store) -> bool:
        dx, dy, dz = store.dom(self.x), store.dom(self.y), store.dom(self.z)
        if len(dx) * len(dy) <= self.EXACT_LIMIT:
            prods = frozenset(a * b for a in dx for b in dy)
            if not store.restrict(self.z, prods, self):
                return False
            dz = store.dom(self.z)
            keep_x = frozenset(a for a in dx if any(a * b in dz for b in dy))
            if not store.restrict(self.x, keep_x, self):
                return False
            dx = store.dom(self.x)
            keep_y = frozenset(b for b in dy if any(a * b in dz for a in dx))
            return store.restrict(self.y, keep_y, self)
        corners = [a * b for a in (min(dx), max(dx)) for b in (min(dy), max(dy))]
        lo, hi = min(corners), max(corners)
        return store.restrict(self.z, frozenset(v for v in dz if lo <= v <= hi),
                              self)


# ----- compiling formulas into the store ----------------------------------


@dataclass
class ClosedCells:
    """Fixed-size array image: one variable per cell."""
    cells: list[int]


class FdModel:
    """Turns dispatched atoms into variables and propagators.

    Terms compile on demand and are memoised: integer terms to a
    variable id, array terms to either explicit cells or a growable
    image. Reads of uniform arrays fold straight onto the element
    variable; a store on one materialises a cell view sharing that
    single variable, sized to cover every index the formula can denote.
    """

    def __init__(self, store: Store, f, alldiff: str = "basic") -> None:
        from .formula import index_positions, uniform_unfold_size
        self.store = store
        self.f = f
        self.table = f.table
        self.alldiff = alldiff
        self.var_of: dict[int, int] = {}
        self.arrays: dict[int, object] = {}
        self.grow_arrays: list = []
        self.idx_ids, self.elem_ids, _ = index_positions(f)
        self.unfold_n = uniform_unfold_size(f)
        # set by the supervisor: (a_term, b_term, k) -> provably equal cells
        self.cc_prover = None

    # ----- term compilation -------------------------------------------------

    def _tier(self, t) -> int:
        if t.id in self.idx_ids:
            return TIER_INDEX
        if t.id in self.elem_ids:
            return TIER_ELEM
        return TIER_REST

    def vid(self, t) -> int | None:
        """The compiled variable for a term, if it exists yet."""
        return self.var_of.get(t.id)

    def int_vid(self, t) -> int:
        from .terms import CONST, SELECT, SIZE_OF, UNIFORM, VAR
        hit = self.var_of.get(t.id)
        if hit is not None:
            return hit
        if t.kind == CONST:
            vid = self.store.new_var(str(t.value), (t.value,), TIER_REST)
        elif t.kind == VAR:
            raise ValueError(f"undeclared integer '{t.name}'")
        elif t.kind == SELECT:
            arr, idx = t.args
            if arr.kind == UNIFORM:
                vid = self.int_vid(arr.args[0])
            else:
                rep = self.array_repr(arr)
                ivid = self.int_vid(idx)
                if isinstance(rep, ClosedCells):
                    hull: set[int] = set()
                    for c in rep.cells:
                        hull |= self.store.dom(c)
                    vid = self.store.new_var(f"%sel{t.id}", hull, TIER_ELEM)
                    self.store.post(AccessProp(rep.cells, ivid, vid))
                else:
                    from .ext import AccessGrowProp
                    vid = self.store.new_var(f"%sel{t.id}", rep.top, TIER_ELEM)
                    p = AccessGrowProp(rep, ivid, vid)
                    self.store.post(p)
                    p.bind(self.store)
        elif t.kind == SIZE_OF:
            rep = self.array_repr(t.args[0])
            vid = rep.size_vid
        else:
            raise AssertionError(f"integer term of kind {t.kind}")
        self.var_of[t.id] = vid
        # compilations inside a decision level vanish with it
        self.store.on_undo(lambda tid=t.id: self.var_of.pop(tid, None))
        return vid

    def array_repr(self, t):
        from .ext import GrowArray, UpdateGrowProp
        from .terms import STORE, UNIFORM
        hit = self.arrays.get(t.id)
        if hit is not None:
            return hit
        if t.is_var:
            info = self.f.array_info_for(t)
            if info is None:
                raise ValueError(f"undeclared array '{t.name}'")
            dom = range(info.elem_lo, info.elem_hi + 1)
            if info.fixed:
                cells = [self.store.new_var(f"{info.name}[{k}]", dom, TIER_ELEM)
                         for k in range(info.size)]
                rep = ClosedCells(cells)
            else:
                size_vid = self.store.new_var(f"%size.{info.name}",
                                              range(1, info.size_bound + 1),
                                              TIER_SIZE)
                rep = GrowArray(info.name, size_vid, frozenset(dom))
                self.grow_arrays.append(rep)
        elif t.kind == UNIFORM:
            evid = self.int_vid(t.args[0])
            rep = ClosedCells([evid] * self.unfold_n)
        elif t.kind == STORE:
            base = self.array_repr(t.args[0])
            ivid = self.int_vid(t.args[1])
            evid = self.int_vid(t.args[2])
            extra = self.store.dom(evid)
            if isinstance(base, ClosedCells):
                cells = [self.store.new_var(f"%t{t.id}[{k}]",
                                            self.store.dom(c) | extra,
                                            TIER_ELEM)
                         for k, c in enumerate(base.cells)]
                rep = ClosedCells(cells)
                self.store.post(UpdateProp(base.cells, ivid, evid, cells))
            else:
                rep = GrowArray(f"%t{t.id}", base.size_vid, base.top | extra)
                self.grow_arrays.append(rep)
                p = UpdateGrowProp(base, ivid, evid, rep)
                self.store.post(p)
                p.bind(self.store)
        else:
            raise AssertionError(f"array term of kind {t.kind}")
        self.arrays[t.id] = rep
        self.store.on_undo(lambda tid=t.id: self.arrays.pop(tid, None))
        return rep

    # ----- posting atoms --------------------------------------------------------

    def post_atom(self, atom) -> None:
        from . import formula as F
        from .ext import DiffArrayProp
        match atom:
            case F.DomainDecl(var=v, lo=lo, hi=hi):
                if v.id not in self.var_of:
                    self.var_of[v.id] = self.store.new_var(
                        v.name, range(lo, hi + 1), self._tier(v))
            case F.ArrayDecl(arr=a):
                self.array_repr(a)
            case F.UniformDecl(elem=e):
                self.int_vid(e)
            case F.Eq(a=a, b=b):
                self.store.post(EqProp(self.int_vid(a), self.int_vid(b)))
            case F.Diff(a=a, b=b):
                self.store.post(DiffProp(self.int_vid(a), self.int_vid(b)))
            case F.ArrayEq(a=a, b=b):
                ra, rb = self.array_repr(a), self.array_repr(b)
                assert isinstance(ra, ClosedCells) and isinstance(rb, ClosedCells)
                for ca, cb in zip(ra.cells, rb.cells):
                    self.store.post(EqProp(ca, cb))
            case F.LinearLeq(coeffs=coeffs, bound=bound):
                # merge repeated variables; slack filtering is only a
                # self-fixpoint when every vid occurs once
                acc: dict[int, int] = {}
                for c, t in coeffs:
                    vid = self.int_vid(t)
                    acc[vid] = acc.get(vid, 0) + c
                pairs = [(c, vid) for vid, c in acc.items() if c != 0]
                if pairs:
                    self.store.post(LinearLeqProp(pairs, bound))
                elif bound < 0:
                    self.store.failed = True
            case F.Mul(x=x, y=y, z=z):
                self.store.post(MulProp(self.int_vid(x), self.int_vid(y),
                                        self.int_vid(z)))
            case F.DiffArrayAtom(a=a, witness=w, b=b):
                ra, rb = self.array_repr(a), self.array_repr(b)
                assert isinstance(ra, ClosedCells) and isinstance(rb, ClosedCells)
                wvid = self.int_vid(w)
                prover = self.cc_prover
                prove = (None if prover is None
                         else (lambda k, a=a, b=b: prover(a, b, k)))
                self.store.post(DiffArrayProp(ra.cells, wvid, rb.cells, prove))
            case _:
                raise AssertionError(f"fd got unexpected atom {atom}")

    def post_atoms(self, atoms) -> None:
        for atom in atoms:
            self.post_atom(atom)

    def post_alldiff(self, terms) -> None:
        vids = [self.int_vid(t) for t in terms]
        self.store.post(AllDiffProp(vids, self.alldiff))

    # ----- ground re-evaluation ------------------------------------------------

    def eval_int(self, t, vals: dict[int, int]) -> int:
        """Evaluate an integer term structurally under a total assignment.

        Raises ValueError on an out-of-bounds access; the caller treats
        that as the containing atom being false.
        """
        from .terms import CONST, SELECT, SIZE_OF, VAR
        if t.kind == CONST:
            return t.value
        if t.kind == VAR:
            return vals[self.var_of[t.id]]
        if t.kind == SELECT:
            return self._eval_select(t.args[0], self.eval_int(t.args[1], vals),
                                     vals)
        if t.kind == SIZE_OF:
            return vals[self.array_repr(t.args[0]).size_vid]
        raise AssertionError(f"integer term of kind {t.kind}")

    def _eval_select(self, arr, i: int, vals: dict[int, int]) -> int:
        from .ext import GrowArray
        from .terms import STORE, UNIFORM
        if arr.kind == UNIFORM:
            return self.eval_int(arr.args[0], vals)
        if arr.kind == STORE:
            j = self.eval_int(arr.args[1], vals)
            if not self._in_bounds(arr.args[0], j, vals):
                raise ValueError("store index out of bounds")
            if i == j:
                if not self._in_bounds(arr.args[0], i, vals):
                    raise ValueError("select index out of bounds")
                return self.eval_int(arr.args[2], vals)
            return self._eval_select(arr.args[0], i, vals)
        rep = self.array_repr(arr)
        if isinstance(rep, ClosedCells):
            if not 0 <= i < len(rep.cells):
                raise ValueError("select index out of bounds")
            return vals[rep.cells[i]]
        assert isinstance(rep, GrowArray)
        if not 0 <= i < vals[rep.size_vid]:
            raise ValueError("select index out of bounds")
        return vals[rep.entries[i]]

    def _in_bounds(self, arr, i: int, vals: dict[int, int]) -> bool:
        from .ext import GrowArray
        from .terms import STORE, UNIFORM
        while arr.kind == STORE:
            arr = arr.args[0]
        if arr.kind == UNIFORM:
            return True
        rep = self.array_repr(arr)
        if isinstance(rep, ClosedCells):
            return 0 <= i < len(rep.cells)
        assert isinstance(rep, GrowArray)
        return 0 <= i < vals[rep.size_vid]

    def check_atom(self, atom, vals: dict[int, int]) -> bool:
        from . import formula as F
        try:
            match atom:
                case F.DomainDecl(var=v, lo=lo, hi=hi):
                    return lo <= self.eval_int(v, vals) <= hi
                case F.ArrayDecl() | F.UniformDecl():
                    return True
                case F.Eq(a=a, b=b):
                    return self.eval_int(a, vals) == self.eval_int(b, vals)
                case F.Diff(a=a, b=b):
                    return self.eval_int(a, vals) != self.eval_int(b, vals)
                case F.ArrayEq(a=a, b=b):
                    ra = self.array_repr(a)
                    assert isinstance(ra, ClosedCells)
                    return all(self._eval_select(a, k, vals)
                               == self._eval_select(b, k, vals)
                               for k in range(len(ra.cells)))
                case F.LinearLeq(coeffs=coeffs, bound=bound):
                    total = sum(c * self.eval_int(t, vals) for c, t in coeffs)
                    return total <= bound
                case F.Mul(x=x, y=y, z=z):
                    return (self.eval_int(x, vals) * self.eval_int(y, vals)
                            == self.eval_int(z, vals))
                case F.DiffArrayAtom(a=a, witness=w, b=b):
                    k = self.eval_int(w, vals)
                    return (self._eval_select(a, k, vals)
                            != self._eval_select(b, k, vals))
                case _:
                    raise AssertionError(f"unknown atom {atom}")
        except ValueError:
            return False

    def check_model(self, atoms, vals: dict[int, int]) -> bool:
        return all(self.check_atom(a, vals) for a in atoms)
