"""Conjunctive formulas: atoms, declarations, dispatch and desugaring.

A Formula is an ordered list of atoms over hash-consed terms plus the
symbol tables built while parsing. Everything downstream consumes this
shape: the dispatcher splits atoms between the two engines, the
extensionality desugarer rewrites whole-array atoms, and the map encoder
(ext module) lowers maps onto array pairs before any of that.
"""
from __future__ import annotations

from dataclasses import dataclass

from .terms import (CONST, SELECT, STORE, Sort, Term, TermTable, subterms)

Pos = tuple[int, int]


@dataclass(frozen=True)
class Eq:
    a: Term
    b: Term
    pos: Pos = (0, 0)


@dataclass(frozen=True)
class Diff:
    a: Term
    b: Term
    pos: Pos = (0, 0)
    # set when the disequality exists only to feed the equality engine
    # (the fd side carries the same fact through a dedicated propagator)
    cc_only: bool = False


@dataclass(frozen=True)
class ArrayEq:
    a: Term
    b: Term
    pos: Pos = (0, 0)


@dataclass(frozen=True)
class ArrayDiff:
    a: Term
    b: Term
    pos: Pos = (0, 0)


@dataclass(frozen=True)
class DomainDecl:
    var: Term
    lo: int
    hi: int
    pos: Pos = (0, 0)


@dataclass(frozen=True)
class ArrayDecl:
    arr: Term
    size: int | None          # fixed size, or None for the bounded form
    size_bound: int | None    # upper bound on the size variable
    elem_lo: int
    elem_hi: int
    pos: Pos = (0, 0)


@dataclass(frozen=True)
class UniformDecl:
    name: str
    arr: Term                 # the uniform term
    elem: Term
    pos: Pos = (0, 0)


@dataclass(frozen=True)
class MapDecl:
    name: str
    m: Term
    key_lo: int
    key_hi: int
    val_lo: int
    val_hi: int
    pos: Pos = (0, 0)


@dataclass(frozen=True)
class Keys:
    """keys(m, k) when positive, not-keys(m, k) otherwise."""
    m: Term
    key: Term
    positive: bool
    pos: Pos = (0, 0)


@dataclass(frozen=True)
class LinearLeq:
    """sum(coeff * term) <= bound."""
    coeffs: tuple[tuple[int, Term], ...]
    bound: int
    pos: Pos = (0, 0)


@dataclass(frozen=True)
class Mul:
    """z = x * y."""
    x: Term
    y: Term
    z: Term
    pos: Pos = (0, 0)


@dataclass(frozen=True)
class DiffArrayAtom:
    """Arrays a and b differ at the witness index (dedicated propagator)."""
    a: Term
    witness: Term
    b: Term
    pos: Pos = (0, 0)


Atom = (Eq | Diff | ArrayEq | ArrayDiff | DomainDecl | ArrayDecl
        | UniformDecl | MapDecl | Keys | LinearLeq | Mul | DiffArrayAtom)


def _atom_key(atom: Atom) -> tuple:
    """Structural identity ignoring source position, for deduplication."""
    vals = []
    for f in atom.__dataclass_fields__:
        if f == "pos":
            continue
        v = getattr(atom, f)
        if isinstance(v, Term):
            vals.append(v.id)
        elif isinstance(v, tuple):
            vals.append(tuple((c, t.id) for c, t in v))
        else:
            vals.append(v)
    return (type(atom).__name__, *vals)


@dataclass
class ArrayInfo:
    name: str
    term: Term
    size: int | None
    size_bound: int | None
    elem_lo: int
    elem_hi: int
    uniform_elem: Term | None = None

    @property
    def fixed(self) -> bool:
        return self.size is not None


@dataclass
class MapInfo:
    name: str
    term: Term
    key_lo: int
    key_hi: int
    val_lo: int
    val_hi: int


class Formula:
    """An ordered conjunction of atoms plus its symbol tables."""

    def __init__(self, table: TermTable | None = None) -> None:
        self.table = table or TermTable()
        self.atoms: list[Atom] = []
        self.symbols: dict[str, Term] = {}
        self.arrays: dict[str, ArrayInfo] = {}  # keyed by array name
        self.maps: dict[str, MapInfo] = {}
        self.int_domains: dict[int, tuple[int, int]] = {}  # var term id -> (lo, hi)
        self.unsat_reason: str | None = None
        self._atom_keys: set[tuple] = set()
        self._fresh_counter = 0

    def add_atom(self, atom: Atom) -> bool:
        """Append an atom unless an identical one is already present."""
        key = _atom_key(atom)
        if key in self._atom_keys:
            return False
        self._atom_keys.add(key)
        self.atoms.append(atom)
        if isinstance(atom, DomainDecl):
            self.int_domains[atom.var.id] = (atom.lo, atom.hi)
        return True

    def declare_int(self, name: str, lo: int, hi: int, pos: Pos = (0, 0)) -> Term:
        t = self.table.var(name, Sort.INT)
        self.symbols[name] = t
        self.add_atom(DomainDecl(t, lo, hi, pos))
        return t

    def declare_array(self, name: str, size: int | None, size_bound: int | None,
                      elem_lo: int, elem_hi: int, pos: Pos = (0, 0)) -> Term:
        t = self.table.var(name, Sort.ARRAY)
        self.symbols[name] = t
        self.arrays[name] = ArrayInfo(name, t, size, size_bound, elem_lo, elem_hi)
        self.add_atom(ArrayDecl(t, size, size_bound, elem_lo, elem_hi, pos))
        return t

    def fresh_int(self, hint: str, lo: int, hi: int) -> Term:
        """An internal integer variable; '%' keeps it out of the user namespace."""
        while True:
            name = f"%{hint}{self._fresh_counter}"
            self._fresh_counter += 1
            if name not in self.symbols:
                break
        t = self.table.var(name, Sort.INT)
        self.symbols[name] = t
        self.add_atom(DomainDecl(t, lo, hi))
        return t

    def array_info_for(self, term: Term) -> ArrayInfo | None:
        """The declaration behind an array variable term, if any."""
        if term.is_var and term.name in self.arrays:
            return self.arrays[term.name]
        return None

    def base_array(self, term: Term) -> Term:
        """Strip stores off an array term down to its base."""
        while term.kind == STORE:
            term = term.args[0]
        return term

    def clone_shell(self) -> "Formula":
        """A new Formula sharing the table and symbol state, no atoms yet."""
        g = Formula(self.table)
        g.symbols = dict(self.symbols)
        g.arrays = dict(self.arrays)
        g.maps = dict(self.maps)
        g._fresh_counter = self._fresh_counter
        g.unsat_reason = self.unsat_reason
        return g


@dataclass
class DispatchResult:
    cc_atoms: list[Atom]
    fd_atoms: list[Atom]


def dispatch(f: Formula) -> DispatchResult:
    """Split desugared atoms between the two engines.

    Equalities and disequalities (and the name merges coming from =a) go
    to both; domain declarations, array declarations and arithmetic are
    meaningless to the equality engine and go to fd only. Integer
    constants visible to cc get pairwise disequalities so the equality
    engine knows distinct literals are distinct.
    """
    cc_atoms: list[Atom] = []
    fd_atoms: list[Atom] = []
    consts_seen: dict[int, Term] = {}

    def note_consts(*terms: Term) -> None:
        for t in terms:
            for s in subterms(t):
                if s.kind == CONST:
                    consts_seen.setdefault(s.value, s)

    for atom in f.atoms:
        match atom:
            case Diff(a=a, b=b, cc_only=True):
                cc_atoms.append(atom)
                note_consts(a, b)
            case Eq(a=a, b=b) | Diff(a=a, b=b):
                cc_atoms.append(atom)
                fd_atoms.append(atom)
                note_consts(a, b)
            case ArrayEq():
                cc_atoms.append(atom)
                fd_atoms.append(atom)
            case ArrayDiff():
                raise ValueError("dispatch expects desugared input; "
                                 "ArrayDiff must be rewritten first")
            case Keys() | MapDecl():
                raise ValueError("dispatch expects map-free input; "
                                 "run the map encoder first")
            case DomainDecl() | ArrayDecl() | UniformDecl() | LinearLeq() \
                    | Mul() | DiffArrayAtom():
                fd_atoms.append(atom)
            case _:
                raise AssertionError(f"unhandled atom {atom}")

    # one disequality per unordered pair of occurring constant values
    values = sorted(consts_seen)
    for i, v in enumerate(values):
        for w in values[i + 1:]:
            cc_atoms.append(Diff(consts_seen[v], consts_seen[w]))
    return DispatchResult(cc_atoms, fd_atoms)


def desugar_extensionality(f: Formula, diff_array: str = "witness") -> Formula:
    """Rewrite whole-array atoms into the core language.

    ArrayEq between an array and itself is dropped; ArrayDiff on the same
    name short-circuits to UNSAT, as does any =a/distinct-a between arrays
    of provably different fixed sizes. A surviving ArrayDiff becomes
    either a fresh-witness disequality (both engines can use it) or, with
    diff_array="propagator", the dedicated fd constraint plus the witness
    disequality for cc.
    """
    assert diff_array in ("witness", "propagator")
    g = f.clone_shell()
    for atom in f.atoms:
        if isinstance(atom, (ArrayEq, ArrayDiff)):
            ia = f.array_info_for(atom.a)
            ib = f.array_info_for(atom.b)
            if ia is None or ib is None or not ia.fixed or not ib.fixed:
                raise ValueError("extensional atoms need declared fixed-size arrays")
            if atom.a.id == atom.b.id:
                if isinstance(atom, ArrayEq):
                    continue  # tautology
                g.unsat_reason = f"{ia.name} declared different from itself"
                continue
            if ia.size != ib.size:
                # declared an error either way round, not a tautology
                g.unsat_reason = (f"arrays {ia.name} and {ib.name} have "
                                  f"different sizes {ia.size} and {ib.size}")
                continue
            if isinstance(atom, ArrayEq):
                g.add_atom(atom)
                continue
            w = g.fresh_int("w", 0, ia.size - 1)
            sa = g.table.select(atom.a, w)
            sb = g.table.select(atom.b, w)
            if diff_array == "witness":
                g.add_atom(Diff(sa, sb, atom.pos))
            else:
                g.add_atom(DiffArrayAtom(atom.a, w, atom.b, atom.pos))
                # cc still reasons through the witness reads
                g.add_atom(Diff(sa, sb, atom.pos, cc_only=True))
        else:
            g.add_atom(atom)
    return g


def index_positions(f: Formula) -> tuple[set[int], set[int], set[int]]:
    """Classify integer term ids by where they occur.

    Returns (index_ids, elem_ids, index_const_values): ids of terms used
    in select/store index position, ids used in element position, and
    the set of constant values appearing as indexes (the uniform-array
    unfolder needs those).
    """
    idx: set[int] = set()
    elem: set[int] = set()
    idx_consts: set[int] = set()

    def walk(t: Term) -> None:
        for s in subterms(t):
            if s.kind == SELECT:
                idx.add(s.args[1].id)
                if s.args[1].kind == CONST:
                    idx_consts.add(s.args[1].value)
            elif s.kind == STORE:
                idx.add(s.args[1].id)
                elem.add(s.args[2].id)
                if s.args[1].kind == CONST:
                    idx_consts.add(s.args[1].value)

    for atom in f.atoms:
        for fname in atom.__dataclass_fields__:
            v = getattr(atom, fname)
            if isinstance(v, Term):
                walk(v)
            elif isinstance(v, tuple) and fname == "coeffs":
                for _, t in v:
                    walk(t)
    return idx, elem, idx_consts


def uniform_unfold_size(f: Formula) -> int:
    """Cell count used when a store forces a uniform array to materialise.

    Covers every index the formula can denote: one past the largest upper
    bound among index-position variable domains and index constants.
    """
    idx_ids, _, idx_consts = index_positions(f)
    hi = -1
    for tid in idx_ids:
        dom = f.int_domains.get(tid)
        if dom is not None:
            hi = max(hi, dom[1])
    if idx_consts:
        hi = max(hi, max(idx_consts))
    return hi + 1 if hi >= 0 else 1
