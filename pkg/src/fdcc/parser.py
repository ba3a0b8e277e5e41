"""Reader and printer for the surface syntax.

The input is a sequence of s-expressions, one declaration or atom each,
with ';' line comments:

    (declare-int NAME LO HI)
    (declare-array NAME SIZE [LO HI])
    (declare-array NAME (bounded MAX) [LO HI])
    (declare-uniform-array NAME TERM)
    (declare-map NAME KEYLO KEYHI VALLO VALHI)
    (= t t) (distinct t t) (=a A B) (distinct-a A B)
    (leq (+ (* C t) ...) C) (mul t t t)
    (keys m t) (not-keys m t) (delete m t NEWNAME)

Terms are names, integer literals, (select a i), (store a i e),
(size A), and (delete m i) once maps are declared. Errors carry line
and column of the offending token.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from . import formula as F
from .terms import Sort, SortError, Term, format_term


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


_TOKEN = re.compile(r"\(|\)|;[^\n]*|[^\s();]+")
_INT = re.compile(r"-?\d+\Z")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*\Z")


@dataclass(frozen=True)
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    for ln, line in enumerate(text.splitlines(), start=1):
        for m in _TOKEN.finditer(line):
            s = m.group()
            if s.startswith(";"):
                break
            toks.append(_Tok(s, ln, m.start() + 1))
    return toks


def _read_forms(toks: list[_Tok]):
    """Group the token stream into nested lists. Leaves are _Tok."""
    forms = []
    stack: list[list] = []
    opens: list[_Tok] = []
    for tok in toks:
        if tok.text == "(":
            stack.append([])
            opens.append(tok)
        elif tok.text == ")":
            if not stack:
                raise ParseError("unmatched ')'", tok.line, tok.col)
            done = stack.pop()
            opens.pop()
            (stack[-1] if stack else forms).append(done)
        else:
            (stack[-1] if stack else forms).append(tok)
    if stack:
        o = opens[-1]
        raise ParseError("unclosed '('", o.line, o.col)
    return forms


def _pos(form) -> tuple[int, int]:
    while isinstance(form, list):
        if not form:
            return (0, 0)
        form = form[0]
    return (form.line, form.col)


def _head(form) -> str | None:
    if isinstance(form, list) and form and isinstance(form[0], _Tok):
        return form[0].text
    return None


class _Reader:
    def __init__(self) -> None:
        self.f = F.Formula()

    def err(self, msg: str, form) -> ParseError:
        line, col = _pos(form)
        return ParseError(msg, line, col)

    def parse(self, text: str) -> F.Formula:
        for form in _read_forms(_tokenize(text)):
            if not isinstance(form, list) or not form:
                raise self.err("expected a parenthesised declaration or atom", form)
            head = _head(form)
            if head is None:
                raise self.err("expected a keyword after '('", form)
            handler = self._handlers.get(head)
            if handler is None:
                raise self.err(f"unknown form '{head}'", form)
            handler(self, form)
        return self.f

    # ----- small helpers -------------------------------------------------

    def _int(self, form) -> int:
        if isinstance(form, _Tok) and _INT.match(form.text):
            return int(form.text)
        raise self.err("expected an integer literal", form)

    def _name(self, form) -> str:
        if isinstance(form, _Tok) and _NAME.match(form.text):
            return form.text
        raise self.err("expected a name", form)

    def _fresh_name(self, form) -> str:
        name = self._name(form)
        if name in self.f.symbols or name in self.f.maps:
            raise self.err(f"'{name}' is already declared", form)
        return name

    def _arity(self, form, low: int, high: int, what: str) -> None:
        if not (low <= len(form) <= high):
            raise self.err(f"{what} takes {low - 1}"
                           + (f" to {high - 1}" if high != low else "")
                           + " arguments", form)

    # ----- declarations ---------------------------------------------------

    def _d_int(self, form) -> None:
        self._arity(form, 4, 4, "declare-int")
        name = self._fresh_name(form[1])
        lo, hi = self._int(form[2]), self._int(form[3])
        if lo > hi:
            raise self.err(f"empty domain {lo}..{hi}", form[2])
        self.f.declare_int(name, lo, hi, _pos(form))

    def _d_array(self, form) -> None:
        self._arity(form, 3, 5, "declare-array")
        name = self._fresh_name(form[1])
        size: int | None = None
        bound: int | None = None
        if isinstance(form[2], list):
            if _head(form[2]) != "bounded" or len(form[2]) != 2:
                raise self.err("expected (bounded MAX)", form[2])
            bound = self._int(form[2][1])
            if bound < 1:
                raise self.err("size bound must be at least 1", form[2][1])
        else:
            size = self._int(form[2])
            if size < 1:
                raise self.err("array size must be at least 1", form[2])
        if len(form) == 4:
            raise self.err("element range needs both LO and HI", form[3])
        if len(form) == 5:
            lo, hi = self._int(form[3]), self._int(form[4])
            if lo > hi:
                raise self.err(f"empty element range {lo}..{hi}", form[3])
        else:
            lo, hi = 0, 1000
        self.f.declare_array(name, size, bound, lo, hi, _pos(form))

    def _d_uniform(self, form) -> None:
        self._arity(form, 3, 3, "declare-uniform-array")
        name = self._fresh_name(form[1])
        elem = self._term(form[2], Sort.INT)
        t = self.f.table.uniform(elem, name)
        self.f.symbols[name] = t
        self.f.arrays[name] = F.ArrayInfo(name, t, None, None, 0, 0,
                                          uniform_elem=elem)
        self.f.add_atom(F.UniformDecl(name, t, elem, _pos(form)))

    def _d_map(self, form) -> None:
        self._arity(form, 6, 6, "declare-map")
        name = self._fresh_name(form[1])
        # key range, then value range, both inclusive
        key_lo, key_hi, val_lo, val_hi = (self._int(form[2]), self._int(form[3]),
                                          self._int(form[4]), self._int(form[5]))
        if key_lo > key_hi or key_lo < 0:
            raise self.err("map keys need 0 <= KEYLO <= KEYHI", form[2])
        if val_lo > val_hi:
            raise self.err("empty value range", form[4])
        t = self.f.table.var(name, Sort.MAP)
        self.f.symbols[name] = t
        self.f.maps[name] = F.MapInfo(name, t, key_lo, key_hi, val_lo, val_hi)
        self.f.add_atom(F.MapDecl(name, t, key_lo, key_hi, val_lo, val_hi,
                                  _pos(form)))

    # ----- terms ----------------------------------------------------------

    def _term(self, form, want: Sort | None = None) -> Term:
        t = self._term_any(form)
        if want is not None and t.sort is not want:
            raise self.err(f"expected a {want.value} term, got {t.sort.value}", form)
        return t

    def _term_any(self, form) -> Term:
        tbl = self.f.table
        if isinstance(form, _Tok):
            if _INT.match(form.text):
                return tbl.const(int(form.text))
            name = self._name(form)
            t = self.f.symbols.get(name)
            if t is None:
                raise self.err(f"undeclared symbol '{name}'", form)
            return t
        head = _head(form)
        try:
            if head == "select":
                self._arity(form, 3, 3, "select")
                arr = self._term_any(form[1])
                if arr.sort not in (Sort.ARRAY, Sort.MAP):
                    raise self.err("select needs an array or map", form[1])
                return tbl.select(arr, self._term(form[2], Sort.INT))
            if head == "store":
                self._arity(form, 4, 4, "store")
                arr = self._term_any(form[1])
                if arr.sort not in (Sort.ARRAY, Sort.MAP):
                    raise self.err("store needs an array or map", form[1])
                return tbl.store(arr, self._term(form[2], Sort.INT),
                                 self._term(form[3], Sort.INT))
            if head == "size":
                self._arity(form, 2, 2, "size")
                name = self._name(form[1])
                info = self.f.arrays.get(name)
                if info is None:
                    raise self.err(f"undeclared array '{name}'", form[1])
                if info.uniform_elem is not None:
                    raise self.err("uniform arrays have no size", form[1])
                if info.fixed:
                    return tbl.const(info.size)
                return tbl.size_of(info.term)
            if head == "delete":
                self._arity(form, 3, 3, "delete (as a term)")
                m = self._term(form[1], Sort.MAP)
                return tbl.delete(m, self._term(form[2], Sort.INT))
        except SortError as exc:
            raise self.err(str(exc), form)
        raise self.err(f"not a term: '{head}'", form)

    # ----- atoms ----------------------------------------------------------

    def _a_eq(self, form) -> None:
        self._arity(form, 3, 3, "=")
        a = self._term_any(form[1])
        b = self._term_any(form[2])
        if a.sort is not Sort.INT or b.sort is not Sort.INT:
            raise self.err("'=' compares integer terms; use =a for arrays",
                           form)
        self.f.add_atom(F.Eq(a, b, _pos(form)))

    def _a_diff(self, form) -> None:
        self._arity(form, 3, 3, "distinct")
        a = self._term_any(form[1])
        b = self._term_any(form[2])
        if a.sort is not Sort.INT or b.sort is not Sort.INT:
            raise self.err("'distinct' compares integer terms; "
                           "use distinct-a for arrays", form)
        self.f.add_atom(F.Diff(a, b, _pos(form)))

    def _array_name_term(self, form) -> Term:
        name = self._name(form)
        info = self.f.arrays.get(name)
        if info is None:
            raise self.err(f"undeclared array '{name}'", form)
        if not info.fixed:
            raise self.err("extensional atoms need fixed-size arrays", form)
        return info.term

    def _a_aeq(self, form) -> None:
        self._arity(form, 3, 3, "=a")
        self.f.add_atom(F.ArrayEq(self._array_name_term(form[1]),
                                  self._array_name_term(form[2]), _pos(form)))

    def _a_adiff(self, form) -> None:
        self._arity(form, 3, 3, "distinct-a")
        self.f.add_atom(F.ArrayDiff(self._array_name_term(form[1]),
                                    self._array_name_term(form[2]), _pos(form)))

    def _a_leq(self, form) -> None:
        self._arity(form, 3, 3, "leq")
        total = form[1]
        if _head(total) != "+":
            raise self.err("leq expects (+ (* C t) ...)", form[1])
        coeffs = []
        for item in total[1:]:
            if _head(item) != "*" or len(item) != 3:
                raise self.err("each summand must be (* C t)", item)
            coeffs.append((self._int(item[1]), self._term(item[2], Sort.INT)))
        if not coeffs:
            raise self.err("empty sum", form[1])
        self.f.add_atom(F.LinearLeq(tuple(coeffs), self._int(form[2]),
                                    _pos(form)))

    def _a_mul(self, form) -> None:
        self._arity(form, 4, 4, "mul")
        self.f.add_atom(F.Mul(self._term(form[1], Sort.INT),
                              self._term(form[2], Sort.INT),
                              self._term(form[3], Sort.INT), _pos(form)))

    def _a_keys(self, form, positive: bool) -> None:
        self._arity(form, 3, 3, "keys" if positive else "not-keys")
        m = self._term(form[1], Sort.MAP)
        self.f.add_atom(F.Keys(m, self._term(form[2], Sort.INT), positive,
                               _pos(form)))

    def _a_delete(self, form) -> None:
        # (delete m i NEW) binds NEW as an alias for the delete term
        self._arity(form, 4, 4, "delete (as a binding)")
        m = self._term(form[1], Sort.MAP)
        key = self._term(form[2], Sort.INT)
        name = self._fresh_name(form[3])
        base = m
        while base.kind in ("delete", "store"):
            base = base.args[0]
        info = self.f.maps.get(base.name)
        assert info is not None
        t = self.f.table.delete(m, key)
        self.f.symbols[name] = t
        self.f.maps[name] = F.MapInfo(name, t, info.key_lo, info.key_hi,
                                      info.val_lo, info.val_hi)

    _handlers = {
        "declare-int": _d_int,
        "declare-array": _d_array,
        "declare-uniform-array": _d_uniform,
        "declare-map": _d_map,
        "=": _a_eq,
        "distinct": _a_diff,
        "=a": _a_aeq,
        "distinct-a": _a_adiff,
        "leq": _a_leq,
        "mul": _a_mul,
        "keys": lambda self, form: self._a_keys(form, True),
        "not-keys": lambda self, form: self._a_keys(form, False),
        "delete": _a_delete,
    }


def parse(text: str) -> F.Formula:
    return _Reader().parse(text)


def format_atom(atom: F.Atom) -> str:
    match atom:
        case F.Eq(a=a, b=b):
            return f"(= {format_term(a)} {format_term(b)})"
        case F.Diff(a=a, b=b):
            return f"(distinct {format_term(a)} {format_term(b)})"
        case F.ArrayEq(a=a, b=b):
            return f"(=a {format_term(a)} {format_term(b)})"
        case F.ArrayDiff(a=a, b=b):
            return f"(distinct-a {format_term(a)} {format_term(b)})"
        case F.DomainDecl(var=v, lo=lo, hi=hi):
            return f"(declare-int {format_term(v)} {lo} {hi})"
        case F.ArrayDecl(arr=a, size=size, size_bound=bound,
                         elem_lo=lo, elem_hi=hi):
            sz = str(size) if size is not None else f"(bounded {bound})"
            return f"(declare-array {format_term(a)} {sz} {lo} {hi})"
        case F.UniformDecl(name=name, elem=e):
            return f"(declare-uniform-array {name} {format_term(e)})"
        case F.MapDecl(name=name, key_lo=kl, key_hi=kh, val_lo=vl, val_hi=vh):
            return f"(declare-map {name} {kl} {kh} {vl} {vh})"
        case F.Keys(m=m, key=k, positive=pos):
            op = "keys" if pos else "not-keys"
            return f"({op} {format_term(m)} {format_term(k)})"
        case F.LinearLeq(coeffs=coeffs, bound=b):
            parts = " ".join(f"(* {c} {format_term(t)})" for c, t in coeffs)
            return f"(leq (+ {parts}) {b})"
        case F.Mul(x=x, y=y, z=z):
            return f"(mul {format_term(x)} {format_term(y)} {format_term(z)})"
        case F.DiffArrayAtom(a=a, b=b):
            # internal form; printed as the extensional atom it came from
            return f"(distinct-a {format_term(a)} {format_term(b)})"
    raise AssertionError(f"unprintable atom {atom}")


def format_formula(f: F.Formula) -> str:
    """Print a formula in parseable surface syntax, one form per line."""
    return "\n".join(format_atom(a) for a in f.atoms) + "\n"
