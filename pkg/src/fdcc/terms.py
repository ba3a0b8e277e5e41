"""Hash-consed terms for the two-sorted constraint language.

Two value sorts exist side by side: integers and arrays of integers (a
third, maps, is sugar that gets compiled away before solving). Every
term is interned in a TermTable, so structurally equal terms are the
same object and carry the same id. Both solver engines key their state
on these ids, which is what makes cross-engine messages cheap.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Sort(Enum):
    INT = "int"
    ARRAY = "array"
    MAP = "map"


class SortError(Exception):
    """A term was built with an argument of the wrong sort."""


VAR = "var"
CONST = "const"
SELECT = "select"
STORE = "store"
UNIFORM = "uniform"
SIZE_OF = "size"
DELETE = "delete"


@dataclass(frozen=True, eq=False)
class Term:
    """One interned term. Identity comparison is structural equality."""

    id: int
    kind: str
    sort: Sort
    name: str | None = None
    value: int | None = None
    args: tuple["Term", ...] = ()

    def __repr__(self) -> str:
        return f"<{format_term(self)}#{self.id}>"

    @property
    def is_var(self) -> bool:
        return self.kind == VAR

    @property
    def is_const(self) -> bool:
        return self.kind == CONST


def format_term(t: Term) -> str:
    """Render a term in the same surface syntax the parser accepts."""
    if t.kind == VAR:
        return t.name or f"_{t.id}"
    if t.kind == CONST:
        return str(t.value)
    if t.kind == SELECT:
        return f"(select {format_term(t.args[0])} {format_term(t.args[1])})"
    if t.kind == STORE:
        a, i, e = t.args
        return f"(store {format_term(a)} {format_term(i)} {format_term(e)})"
    if t.kind == UNIFORM:
        # uniform arrays print by their declared name when one exists
        if t.name is not None:
            return t.name
        return f"(uniform {format_term(t.args[0])})"
    if t.kind == SIZE_OF:
        return f"(size {format_term(t.args[0])})"
    if t.kind == DELETE:
        return f"(delete {format_term(t.args[0])} {format_term(t.args[1])})"
    raise AssertionError(f"unprintable term kind {t.kind}")


class TermTable:
    """Interning table. One table lives for one parsed formula/session."""

    def __init__(self) -> None:
        self._terms: list[Term] = []
        self._intern: dict[tuple, Term] = {}

    def __len__(self) -> int:
        return len(self._terms)

    def by_id(self, tid: int) -> Term:
        return self._terms[tid]

    def _make(self, key: tuple, **fields) -> Term:
        hit = self._intern.get(key)
        if hit is not None:
            return hit
        t = Term(id=len(self._terms), **fields)
        self._terms.append(t)
        self._intern[key] = t
        return t

    def var(self, name: str, sort: Sort) -> Term:
        return self._make(("v", name, sort), kind=VAR, sort=sort, name=name)

    def const(self, value: int) -> Term:
        return self._make(("c", value), kind=CONST, sort=Sort.INT, value=value)

    def select(self, arr: Term, idx: Term) -> Term:
        if arr.sort not in (Sort.ARRAY, Sort.MAP):
            raise SortError(f"select needs an array, got {format_term(arr)}")
        if idx.sort is not Sort.INT:
            raise SortError(f"select index must be an integer, got {format_term(idx)}")
        return self._make(("s", arr.id, idx.id), kind=SELECT, sort=Sort.INT,
                          args=(arr, idx))

    def store(self, arr: Term, idx: Term, elem: Term) -> Term:
        if arr.sort not in (Sort.ARRAY, Sort.MAP):
            raise SortError(f"store needs an array, got {format_term(arr)}")
        if idx.sort is not Sort.INT or elem.sort is not Sort.INT:
            raise SortError("store index and element must be integers")
        return self._make(("w", arr.id, idx.id, elem.id), kind=STORE,
                          sort=arr.sort, args=(arr, idx, elem))

    def uniform(self, elem: Term, name: str | None = None) -> Term:
        if elem.sort is not Sort.INT:
            raise SortError("uniform array element must be an integer term")
        # identity is the element alone: two names for the same constant
        # array denote the same object
        return self._make(("u", elem.id), kind=UNIFORM, sort=Sort.ARRAY,
                          name=name, args=(elem,))

    def size_of(self, arr: Term) -> Term:
        if arr.sort is not Sort.ARRAY:
            raise SortError("size applies to arrays")
        return self._make(("z", arr.id), kind=SIZE_OF, sort=Sort.INT, args=(arr,))

    def delete(self, m: Term, key: Term) -> Term:
        if m.sort is not Sort.MAP:
            raise SortError("delete applies to maps")
        if key.sort is not Sort.INT:
            raise SortError("delete key must be an integer term")
        return self._make(("d", m.id, key.id), kind=DELETE, sort=Sort.MAP,
                          args=(m, key))

    def lookup_select(self, arr: Term, idx: Term) -> Term | None:
        """The interned select(arr, idx) if it was ever built, else None."""
        return self._intern.get(("s", arr.id, idx.id))


def subterms(t: Term):
    """Yield t and every subterm, depth first, each occurrence once."""
    seen: set[int] = set()
    stack = [t]
    while stack:
        cur = stack.pop()
        if cur.id in seen:
            continue
        seen.add(cur.id)
        yield cur
        stack.extend(reversed(cur.args))
