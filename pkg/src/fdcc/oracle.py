"""Brute-force reference: ground evaluation and exhaustive search.

This module answers the same questions as the solver by enumerating
every assignment the declarations allow and evaluating atoms directly
from first principles. It shares the term and formula data structures
but none of the reasoning machinery, so agreement between the two is
meaningful evidence. Enumeration walks declarations in order and
discards a branch as soon as some atom whose symbols are all assigned
evaluates false; that skips work without assuming anything a failed
atom does not already prove.

Semantics pinned here (the solver matches them):
- reading or writing a fixed array outside 0..size-1, or a growable
  array outside 0..size-1 for its current size, falsifies the atom the
  access occurs in; likewise map stores/deletes outside 0..KEYHI and
  reads at a non-key;
- a key-membership atom is false in both polarities when the key value
  lies outside the map's universe 0..KEYHI;
- uniform arrays are total: they read as their element at every index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import formula as F
from .terms import (CONST, DELETE, SELECT, SIZE_OF, STORE, UNIFORM, VAR,
                    Term, subterms)


class _Undef(Exception):
    """An access fell outside the model; the containing atom is false."""


@dataclass
class GroundModel:
    ints: dict[str, int] = field(default_factory=dict)
    arrays: dict[str, list[int]] = field(default_factory=dict)
    # growable arrays: concrete size plus exactly that many cells
    grow: dict[str, tuple[int, list[int]]] = field(default_factory=dict)
    maps: dict[str, dict[int, int]] = field(default_factory=dict)

    def copy(self) -> "GroundModel":
        return GroundModel(dict(self.ints), {k: list(v) for k, v in self.arrays.items()},
                           {k: (s, list(c)) for k, (s, c) in self.grow.items()},
                           {k: dict(v) for k, v in self.maps.items()})


def _base_name(t: Term) -> str:
    while t.kind in (STORE, DELETE):
        t = t.args[0]
    assert t.kind in (VAR, UNIFORM)
    return t.name


class _Eval:
    def __init__(self, f: F.Formula, m: GroundModel) -> None:
        self.f = f
        self.m = m
        self._maps: dict[int, dict[int, int]] = {}

    def int_of(self, t: Term) -> int:
        if t.kind == CONST:
            return t.value
        if t.kind == VAR:
            try:
                return self.m.ints[t.name]
            except KeyError:
                raise _Undef from None
        if t.kind == SELECT:
            return self.select(t.args[0], self.int_of(t.args[1]))
        if t.kind == SIZE_OF:
            return self.m.grow[_base_name(t.args[0])][0]
        raise AssertionError(f"integer term of kind {t.kind}")

    def select(self, arr: Term, i: int) -> int:
        if arr.sort.name == "MAP":
            table = self.map_of(arr)
            if i not in table:
                raise _Undef
            return table[i]
        if arr.kind == UNIFORM:
            return self.int_of(arr.args[0])
        if arr.kind == STORE:
            # every write in the chain must land in bounds, shadowed or not
            node = arr
            while node.kind == STORE:
                self._check_bounds(node.args[0], self.int_of(node.args[1]))
                node = node.args[0]
            node = arr
            while node.kind == STORE:
                if self.int_of(node.args[1]) == i:
                    return self.int_of(node.args[2])
                node = node.args[0]
            return self.select(node, i)
        assert arr.kind == VAR
        name = arr.name
        if name in self.m.arrays:
            cells = self.m.arrays[name]
            if not 0 <= i < len(cells):
                raise _Undef
            return cells[i]
        size, cells = self.m.grow[name]
        if not 0 <= i < size:
            raise _Undef
        return cells[i]

    def _check_bounds(self, arr: Term, i: int) -> None:
        base = arr
        while base.kind == STORE:
            base = base.args[0]
        if base.kind == UNIFORM:
            return
        name = base.name
        if name in self.m.arrays:
            n = len(self.m.arrays[name])
        else:
            n = self.m.grow[name][0]
        if not 0 <= i < n:
            raise _Undef

    def map_of(self, t: Term) -> dict[int, int]:
        hit = self._maps.get(t.id)
        if hit is not None:
            return hit
        if t.kind == VAR:
            table = self.m.maps[t.name]
        elif t.kind == STORE:
            k = self.int_of(t.args[1])
            info = self.f.maps[_base_name(t)]
            if not 0 <= k <= info.key_hi:
                raise _Undef
            table = dict(self.map_of(t.args[0]))
            table[k] = self.int_of(t.args[2])
        else:
            assert t.kind == DELETE
            k = self.int_of(t.args[1])
            info = self.f.maps[_base_name(t)]
            if not 0 <= k <= info.key_hi:
                raise _Undef
            table = dict(self.map_of(t.args[0]))
            table.pop(k, None)
        self._maps[t.id] = table
        return table

    def whole_array(self, t: Term) -> list[int]:
        assert t.kind == VAR
        if t.name in self.m.arrays:
            return self.m.arrays[t.name]
        size, cells = self.m.grow[t.name]
        return cells[:size]

    def atom(self, atom: F.Atom) -> bool:
        try:
            match atom:
                case F.DomainDecl(var=v, lo=lo, hi=hi):
                    return lo <= self.int_of(v) <= hi
                case F.ArrayDecl(arr=a, size=size, size_bound=bound,
                                 elem_lo=lo, elem_hi=hi):
                    if size is not None:
                        cells = self.m.arrays[a.name]
                        return (len(cells) == size
                                and all(lo <= c <= hi for c in cells))
                    s, cells = self.m.grow[a.name]
                    return (1 <= s <= bound and len(cells) == s
                            and all(lo <= c <= hi for c in cells))
                case F.UniformDecl():
                    return True
                case F.MapDecl(name=name, key_lo=klo, key_hi=khi,
                               val_lo=vlo, val_hi=vhi):
                    table = self.m.maps[name]
                    return all(klo <= k <= khi and vlo <= v <= vhi
                               for k, v in table.items())
                case F.Eq(a=a, b=b):
                    return self.int_of(a) == self.int_of(b)
                case F.Diff(a=a, b=b):
                    return self.int_of(a) != self.int_of(b)
                case F.ArrayEq(a=a, b=b):
                    return self.whole_array(a) == self.whole_array(b)
                case F.ArrayDiff(a=a, b=b):
                    return self.whole_array(a) != self.whole_array(b)
                case F.Keys(m=m, key=k, positive=positive):
                    kv = self.int_of(k)
                    info = self.f.maps[_base_name(m)]
                    if not 0 <= kv <= info.key_hi:
                        return False
                    return (kv in self.map_of(m)) == positive
                case F.LinearLeq(coeffs=coeffs, bound=bound):
                    return sum(c * self.int_of(t) for c, t in coeffs) <= bound
                case F.Mul(x=x, y=y, z=z):
                    return self.int_of(x) * self.int_of(y) == self.int_of(z)
                case F.DiffArrayAtom(a=a, witness=w, b=b):
                    k = self.int_of(w)
                    return self.select(a, k) != self.select(b, k)
                case _:
                    raise AssertionError(f"unknown atom {atom}")
        except _Undef:
            return False


def oracle_eval(f: F.Formula, m: GroundModel) -> bool:
    """Does the assignment satisfy every atom of the formula?"""
    if f.unsat_reason is not None:
        return False
    ev = _Eval(f, m)
    return all(ev.atom(a) for a in f.atoms)


# ----- exhaustive search ----------------------------------------------------


def _entity_plan(f: F.Formula):
    """Declarations in order, with the enumeration size of each."""
    plan = []
    for atom in f.atoms:
        match atom:
            case F.DomainDecl(var=v, lo=lo, hi=hi):
                plan.append(("int", v.name, lo, hi, hi - lo + 1))
            case F.ArrayDecl(arr=a, size=size, size_bound=bound,
                             elem_lo=lo, elem_hi=hi):
                e = hi - lo + 1
                if size is not None:
                    plan.append(("arr", a.name, size, lo, hi, e ** size))
                else:
                    total = sum(e ** s for s in range(1, bound + 1))
                    plan.append(("grow", a.name, bound, lo, hi, total))
            case F.MapDecl(name=name, key_lo=klo, key_hi=khi,
                           val_lo=vlo, val_hi=vhi):
                per_key = 1 + (vhi - vlo + 1)
                plan.append(("map", name, klo, khi, vlo, vhi,
                             per_key ** (khi - klo + 1)))
    return plan


def _atom_ready_depth(f: F.Formula, plan) -> list[list[F.Atom]]:
    """Atoms grouped by the entity whose assignment completes them."""
    pos = {p[1]: d for d, p in enumerate(plan)}
    buckets: list[list[F.Atom]] = [[] for _ in plan]
    late: list[F.Atom] = []         # atoms with no enumerated symbols
    for atom in f.atoms:
        names: set[str] = set()
        for fname in atom.__dataclass_fields__:
            v = getattr(atom, fname)
            terms = [v] if isinstance(v, Term) else \
                [t for _, t in v] if fname == "coeffs" else []
            for t in terms:
                for s in subterms(t):
                    if s.kind == VAR and s.name in pos:
                        names.add(s.name)
        if not names:
            late.append(atom)
        else:
            buckets[max(pos[n] for n in names)].append(atom)
    if plan:
        buckets[-1].extend(late)
    return buckets


def oracle_solve(f: F.Formula, cap: int = 10_000_000):
    """("sat", model) / ("unsat", None) by exhaustive enumeration,
    or ("unknown", None) when the assignment space exceeds cap."""
    if f.unsat_reason is not None:
        return ("unsat", None)
    plan = _entity_plan(f)
    space = 1
    for p in plan:
        space *= p[-1]
        if space > cap:
            return ("unknown", None)
    buckets = _atom_ready_depth(f, plan)
    if not plan:
        ok = oracle_eval(f, GroundModel())
        return ("sat", GroundModel()) if ok else ("unsat", None)

    m = GroundModel()

    def ready_ok(d: int) -> bool:
        ev = _Eval(f, m)
        return all(ev.atom(a) for a in buckets[d])

    def assign(d: int):
        if d == len(plan):
            yield m
            return
        p = plan[d]
        kind = p[0]
        if kind == "int":
            _, name, lo, hi, _ = p
            for v in range(lo, hi + 1):
                m.ints[name] = v
                if ready_ok(d):
                    yield from assign(d + 1)
            del m.ints[name]
        elif kind == "arr":
            _, name, size, lo, hi, _ = p
            for cells in _tuples(size, lo, hi):
                m.arrays[name] = cells
                if ready_ok(d):
                    yield from assign(d + 1)
            del m.arrays[name]
        elif kind == "grow":
            _, name, bound, lo, hi, _ = p
            for s in range(1, bound + 1):
                for cells in _tuples(s, lo, hi):
                    m.grow[name] = (s, cells)
                    if ready_ok(d):
                        yield from assign(d + 1)
            del m.grow[name]
        else:
            _, name, klo, khi, vlo, vhi, _ = p
            keys = list(range(klo, khi + 1))

            def maps_from(i: int):
                if i == len(keys):
                    yield
                    return
                k = keys[i]
                yield from maps_from(i + 1)          # k absent
                for v in range(vlo, vhi + 1):
                    m.maps[name][k] = v
                    yield from maps_from(i + 1)
                del m.maps[name][k]

            m.maps[name] = {}
            for _ in maps_from(0):
                if ready_ok(d):
                    yield from assign(d + 1)
            del m.maps[name]

    for found in assign(0):
        return ("sat", found.copy())
    return ("unsat", None)


def _tuples(n: int, lo: int, hi: int):
    """All length-n cell lists over lo..hi, lexicographically."""
    cells = [lo] * n
    while True:
        yield list(cells)
        i = n - 1
        while i >= 0 and cells[i] == hi:
            cells[i] = lo
            i -= 1
        if i < 0:
            return
        cells[i] += 1
