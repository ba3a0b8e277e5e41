"""Extensions layered on the two core engines.

Four independent features live here: constant (uniform) arrays that fold
reads away instead of materialising cells, a dedicated propagator for
whole-array disequality that prunes the witness index directly, arrays
whose size is a search variable (cells spring into existence on demand
and the whole prefix fills in once the size becomes known), and the
translation of finite maps onto a pair of plain arrays (element table
plus 0/1 membership table).
"""
from __future__ import annotations

from typing import Callable

from . import formula as F
from .fd import TIER_ELEM, Propagator, Store
from .terms import (CONST, DELETE, SELECT, SIZE_OF, STORE, UNIFORM, VAR,
                    Sort, Term, TermTable, subterms)

# ----- uniform (constant) arrays ------------------------------------------


def uniform_select_hook(table: TermTable) -> Callable[[Term, Term], Term]:
    """Read constructor for the closure: reads of a uniform array are its
    element, so the covered-write rule never builds a select over one."""
    def build(arr: Term, idx: Term) -> Term:
        if arr.kind == UNIFORM:
            return arr.args[0]
        return table.select(arr, idx)
    return build


def uniform_read_equalities(f: F.Formula) -> list[tuple[Term, Term]]:
    """Reads of uniform arrays present in the input, paired with their
    element; the closure gets these as definitional equalities."""
    out: dict[int, tuple[Term, Term]] = {}
    for atom in f.atoms:
        for fname in atom.__dataclass_fields__:
            v = getattr(atom, fname)
            terms = [v] if isinstance(v, Term) else \
                [t for _, t in v] if fname == "coeffs" else []
            for t in terms:
                for s in subterms(t):
                    if s.kind == SELECT and s.args[0].kind == UNIFORM:
                        out[s.id] = (s, s.args[0].args[0])
    return [out[k] for k in sorted(out)]


# ----- whole-array disequality --------------------------------------------


class DiffArrayProp(Propagator):
    """Arrays differ at the witness index: prune witness positions where
    the cells are provably equal; once the witness is pinned the two
    cells there behave like an ordinary disequality.

    prove_eq(k) may consult the equality engine; None means only the
    local evidence (shared variable, equal singletons) counts.
    """

    def __init__(self, a_cells: list[int], ivid: int, b_cells: list[int],
                 prove_eq: Callable[[int], bool] | None = None) -> None:
        assert len(a_cells) == len(b_cells)
        self.a = a_cells
        self.b = b_cells
        self.i = ivid
        self.prove_eq = prove_eq

    def watched(self):
        return (*self.a, *self.b, self.i)

    def propagate(self, store: Store) -> bool:
        n = len(self.a)
        keep = set()
        for k in sorted(store.dom(self.i)):
            if not 0 <= k < n:
                continue
            va, vb = self.a[k], self.b[k]
            if va == vb:
                continue
            da, db = store.dom(va), store.dom(vb)
            if len(da) == 1 and da == db:
                continue
            if self.prove_eq is not None and self.prove_eq(k):
                continue
            keep.add(k)
        if not store.restrict(self.i, keep, self):
            return False
        di = store.dom(self.i)
        if len(di) == 1:
            k = next(iter(di))
            va, vb = self.a[k], self.b[k]
            da = store.dom(va)
            if len(da) == 1 and not store.restrict(vb, store.dom(vb) - da,
                                                   self):
                return False
            db = store.dom(vb)
            if len(db) == 1 and not store.restrict(va, store.dom(va) - db,
                                                   self):
                return False
        return True


# ----- growable arrays ------------------------------------------------------


class GrowArray:
    """An array whose size is itself a variable.

    Cells are created on demand; an undefined cell reads as `top`, the
    widest value set a cell of this array can hold. Once the size
    variable becomes a single value every in-range cell is filled in and
    the array behaves like a fixed one. All mutations are trailed.
    """

    def __init__(self, name: str, size_vid: int, top: frozenset[int]) -> None:
        self.name = name
        self.size_vid = size_vid
        self.top = top
        self.entries: dict[int, int] = {}      # index -> cell vid
        self.listeners: list[Propagator] = []  # told about every new cell

    def cell_dom(self, store: Store, k: int) -> frozenset[int]:
        vid = self.entries.get(k)
        return store.dom(vid) if vid is not None else self.top

    def define(self, store: Store, k: int) -> int:
        vid = self.entries.get(k)
        if vid is None:
            vid = store.new_var(f"{self.name}[{k}]", self.top, TIER_ELEM)
            self.entries[k] = vid
            store.on_undo(lambda kk=k: self.entries.pop(kk))
            for p in self.listeners:
                store.watch_late(vid, p)
                store._schedule(p)
        return vid

    def fill(self, store: Store, n: int) -> None:
        for k in range(n):
            self.define(store, k)

    def listen(self, store: Store, p: Propagator) -> None:
        self.listeners.append(p)
        store.on_undo(lambda: self.listeners.remove(p))


class AccessGrowProp(Propagator):
    """value = array[index] on a growable array, with the in-bounds
    coupling between index and size folded in."""

    def __init__(self, grow: GrowArray, ivid: int, evid: int) -> None:
        self.grow = grow
        self.i = ivid
        self.e = evid

    def watched(self):
        return (self.grow.size_vid, self.i, self.e,
                *self.grow.entries.values())

    def bind(self, store: Store) -> None:
        self.grow.listen(store, self)

    def propagate(self, store: Store) -> bool:
        g = self.grow
        while True:
            changed = False
            ds = store.dom(g.size_vid)
            if len(ds) == 1:
                g.fill(store, next(iter(ds)))
            n_max = max(ds)
            di = store.dom(self.i)
            de = store.dom(self.e)
            live = frozenset(k for k in di
                             if 0 <= k < n_max and de & g.cell_dom(store, k))
            if live != di:
                if not store.restrict(self.i, live, self):
                    return False
                changed = True
                di = live
            if not di:
                return False
            # the accessed position exists, so the size lies above it
            keep_s = frozenset(s for s in ds if s > min(di))
            if keep_s != ds:
                if not store.restrict(g.size_vid, keep_s, self):
                    return False
                changed = True
            acc: set[int] = set()
            for k in sorted(di):
                acc |= g.cell_dom(store, k)
                if de <= acc:
                    break
            if not de <= acc:
                if not store.restrict(self.e, frozenset(acc), self):
                    return False
                changed = True
            if len(di) == 1:
                vid = g.define(store, next(iter(di)))
                both = store.dom(vid) & store.dom(self.e)
                if both != store.dom(vid) or both != store.dom(self.e):
                    if not (store.restrict(vid, both, self)
                            and store.restrict(self.e, both, self)):
                        return False
                    changed = True
            if not changed:
                return True


class UpdateGrowProp(Propagator):
    """after = store(before, index, elem) on growable arrays.

    The two arrays share their size variable: writing neither grows nor
    shrinks. Frame cells are defined in pairs as soon as either side has
    an entry, so equality across the write propagates both ways.
    """

    def __init__(self, before: GrowArray, ivid: int, evid: int,
                 after: GrowArray) -> None:
        assert before.size_vid == after.size_vid
        self.a = before
        self.b = after
        self.i = ivid
        self.e = evid

    def watched(self):
        return (self.a.size_vid, self.i, self.e,
                *self.a.entries.values(), *self.b.entries.values())

    def bind(self, store: Store) -> None:
        self.a.listen(store, self)
        self.b.listen(store, self)

    def propagate(self, store: Store) -> bool:
        A, B = self.a, self.b
        while True:
            changed = False
            ds = store.dom(A.size_vid)
            if len(ds) == 1:
                n = next(iter(ds))
                A.fill(store, n)
                B.fill(store, n)
            n_max = max(ds)
            di = store.dom(self.i)
            de = store.dom(self.e)
            live = frozenset(k for k in di
                             if 0 <= k < n_max and de & B.cell_dom(store, k))
            if live != di:
                if not store.restrict(self.i, live, self):
                    return False
                changed = True
                di = live
            if not di:
                return False
            keep_s = frozenset(s for s in ds if s > min(di))
            if keep_s != ds:
                if not store.restrict(A.size_vid, keep_s, self):
                    return False
                changed = True
            acc: set[int] = set()
            for k in sorted(di):
                acc |= B.cell_dom(store, k)
                if de <= acc:
                    break
            if not de <= acc:
                if not store.restrict(self.e, frozenset(acc), self):
                    return False
                changed = True
            if len(di) == 1:
                vb = B.define(store, next(iter(di)))
                both = store.dom(vb) & store.dom(self.e)
                if both != store.dom(vb) or both != store.dom(self.e):
                    if not (store.restrict(vb, both, self)
                            and store.restrict(self.e, both, self)):
                        return False
                    changed = True
            for k in sorted(set(A.entries) | set(B.entries)):
                if k >= n_max:
                    continue
                if k in di:
                    if k in B.entries:
                        vb = B.entries[k]
                        allowed = A.cell_dom(store, k) | de
                        if not store.dom(vb) <= allowed:
                            if not store.restrict(vb, allowed, self):
                                return False
                            changed = True
                    if di != frozenset((k,)) and \
                            not A.cell_dom(store, k) & B.cell_dom(store, k):
                        # this cell visibly changed: the write landed here
                        if not store.restrict(self.i, frozenset((k,)), self):
                            return False
                        changed = True
                        di = store.dom(self.i)
                else:
                    va = A.define(store, k)
                    vb = B.define(store, k)
                    both = store.dom(va) & store.dom(vb)
                    if both != store.dom(va) or both != store.dom(vb):
                        if not (store.restrict(va, both, self)
                                and store.restrict(vb, both, self)):
                            return False
                        changed = True
            if not changed:
                return True


# ----- maps ---------------------------------------------------------------------


def encode_maps(f: F.Formula) -> F.Formula:
    """Lower every map onto two arrays of one more key than its range:
    NAME%E holds the values, NAME%K in {0,1} marks membership. A read
    m[j] adds the side condition that j is a key; store sets the
    membership bit, delete clears it and leaves the value table alone.
    The '%' cannot appear in user names, so the pair is invisible.
    """
    if not f.maps:
        return f
    g = F.Formula(TermTable())
    g.unsat_reason = f.unsat_reason
    cache: dict[int, Term] = {}
    mcache: dict[int, tuple[Term, Term]] = {}
    one = g.table.const(1)
    zero = g.table.const(0)

    def rew_map(t: Term) -> tuple[Term, Term]:
        hit = mcache.get(t.id)
        if hit is not None:
            return hit
        if t.kind == VAR:
            pair = (g.symbols[t.name + "%E"], g.symbols[t.name + "%K"])
        elif t.kind == STORE:
            me, mk = rew_map(t.args[0])
            nk = rew(t.args[1])
            nv = rew(t.args[2])
            pair = (g.table.store(me, nk, nv), g.table.store(mk, nk, one))
        elif t.kind == DELETE:
            me, mk = rew_map(t.args[0])
            nk = rew(t.args[1])
            pair = (me, g.table.store(mk, nk, zero))
        else:
            raise AssertionError(f"map term of kind {t.kind}")
        mcache[t.id] = pair
        return pair

    def rew(t: Term) -> Term:
        hit = cache.get(t.id)
        if hit is not None:
            return hit
        if t.kind == CONST:
            out = g.table.const(t.value)
        elif t.kind == VAR:
            out = g.symbols[t.name]
        elif t.kind == SELECT:
            arr, idx = t.args
            ni = rew(idx)
            if arr.sort is Sort.MAP:
                me, mk = rew_map(arr)
                # reading a map is only meaningful at a key
                g.add_atom(F.Eq(g.table.select(mk, ni), one))
                out = g.table.select(me, ni)
            else:
                out = g.table.select(rew(arr), ni)
        elif t.kind == STORE:
            out = g.table.store(rew(t.args[0]), rew(t.args[1]), rew(t.args[2]))
        elif t.kind == UNIFORM:
            out = g.table.uniform(rew(t.args[0]), t.name)
        elif t.kind == SIZE_OF:
            out = g.table.size_of(rew(t.args[0]))
        else:
            raise AssertionError(f"unexpected term kind {t.kind}")
        cache[t.id] = out
        return out

    for atom in f.atoms:
        match atom:
            case F.MapDecl(name=name, key_lo=klo, key_hi=khi,
                           val_lo=vlo, val_hi=vhi, pos=pos):
                size = khi + 1
                g.declare_array(name + "%E", size, None, vlo, vhi, pos)
                karr = g.declare_array(name + "%K", size, None, 0, 1, pos)
                for k in range(klo):
                    g.add_atom(F.Eq(g.table.select(karr, g.table.const(k)),
                                    zero, pos))
            case F.DomainDecl(var=v, lo=lo, hi=hi, pos=pos):
                g.declare_int(v.name, lo, hi, pos)
            case F.ArrayDecl(arr=a, size=size, size_bound=bound,
                             elem_lo=lo, elem_hi=hi, pos=pos):
                g.declare_array(a.name, size, bound, lo, hi, pos)
            case F.UniformDecl(name=name, elem=e, pos=pos):
                ne = rew(e)
                t = g.table.uniform(ne, name)
                g.symbols[name] = t
                g.arrays[name] = F.ArrayInfo(name, t, None, None, 0, 0,
                                             uniform_elem=ne)
                g.add_atom(F.UniformDecl(name, t, ne, pos))
            case F.Eq(a=a, b=b, pos=pos):
                g.add_atom(F.Eq(rew(a), rew(b), pos))
            case F.Diff(a=a, b=b, pos=pos, cc_only=cc_only):
                g.add_atom(F.Diff(rew(a), rew(b), pos, cc_only))
            case F.ArrayEq(a=a, b=b, pos=pos):
                g.add_atom(F.ArrayEq(rew(a), rew(b), pos))
            case F.ArrayDiff(a=a, b=b, pos=pos):
                g.add_atom(F.ArrayDiff(rew(a), rew(b), pos))
            case F.Keys(m=m, key=k, positive=positive, pos=pos):
                mk = rew_map(m)[1]
                bit = one if positive else zero
                g.add_atom(F.Eq(g.table.select(mk, rew(k)), bit, pos))
            case F.LinearLeq(coeffs=coeffs, bound=bound, pos=pos):
                g.add_atom(F.LinearLeq(
                    tuple((c, rew(t)) for c, t in coeffs), bound, pos))
            case F.Mul(x=x, y=y, z=z, pos=pos):
                g.add_atom(F.Mul(rew(x), rew(y), rew(z), pos))
            case _:
                raise AssertionError(f"map encoder got {atom}")
    return g


def decode_map_model(f: F.Formula, gm) -> None:
    """Fold the %K/%E array pair of every declared map of `f` back into
    a key->value table on the model, dropping the internal arrays."""
    for name in f.maps:
        bits = gm.arrays.pop(name + "%K", None)
        vals = gm.arrays.pop(name + "%E", None)
        if bits is None or vals is None:
            continue
        gm.maps[name] = {k: vals[k] for k, bit in enumerate(bits) if bit == 1}
