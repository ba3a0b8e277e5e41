"""Whole-array rewriting and the split of atoms between the engines."""

import pytest

from fdcc import parse
from fdcc.formula import (ArrayEq, Diff, DiffArrayAtom, Eq,
                          desugar_extensionality, dispatch)


TWO = ("(declare-array A 3 0 2)\n(declare-array B 3 0 2)\n"
       "(declare-int x 0 2)\n")


def test_array_eq_survives_and_diff_gets_witness():
    g = desugar_extensionality(parse(TWO + "(=a A B)\n(distinct-a A B)\n"))
    assert g.unsat_reason is None
    kinds = [type(a).__name__ for a in g.atoms]
    assert "ArrayEq" in kinds
    assert "ArrayDiff" not in kinds
    # the witness read pair appears as an ordinary disequality
    diffs = [a for a in g.atoms if isinstance(a, Diff)]
    assert len(diffs) == 1
    assert "select" in str(diffs[0].a.kind).lower() or diffs[0].a.kind == "select"


def test_diff_array_propagator_mode_adds_dedicated_atom():
    g = desugar_extensionality(parse(TWO + "(distinct-a A B)\n"),
                               diff_array="propagator")
    assert any(isinstance(a, DiffArrayAtom) for a in g.atoms)
    # cc still receives the witness disequality
    assert any(isinstance(a, Diff) for a in g.atoms)


def test_self_array_eq_is_dropped_and_self_diff_is_unsat():
    g = desugar_extensionality(parse(TWO + "(=a A A)\n"))
    assert g.unsat_reason is None
    assert not any(isinstance(a, ArrayEq) for a in g.atoms)
    g = desugar_extensionality(parse(TWO + "(distinct-a A A)\n"))
    assert g.unsat_reason is not None


def test_cross_size_extensional_atoms_are_declaration_errors():
    # contract: both polarities short-circuit, not just =a
    base = "(declare-array A 3 0 2)\n(declare-array B 2 0 2)\n"
    for atom in ("(=a A B)", "(distinct-a A B)"):
        g = desugar_extensionality(parse(base + atom + "\n"))
        assert g.unsat_reason is not None
        assert "size" in g.unsat_reason


def test_dispatch_routes_eq_diff_to_both_engines():
    d = dispatch(desugar_extensionality(parse(
        TWO + "(= (select A x) 1)\n(distinct x 2)\n(leq (+ (* 1 x)) 2)\n")))
    cc_kinds = [type(a).__name__ for a in d.cc_atoms]
    fd_kinds = [type(a).__name__ for a in d.fd_atoms]
    assert cc_kinds.count("Eq") >= 1 and cc_kinds.count("Diff") >= 1
    assert fd_kinds.count("Eq") == 1 and fd_kinds.count("Diff") == 1
    # declarations and arithmetic are fd-only
    assert "DomainDecl" not in cc_kinds and "LinearLeq" not in cc_kinds
    assert fd_kinds.count("DomainDecl") == 1
    assert fd_kinds.count("LinearLeq") == 1


def test_dispatch_interns_constant_disequalities_for_cc():
    d = dispatch(desugar_extensionality(parse(
        "(declare-int x 0 5)\n(= x 1)\n(distinct x 3)\n")))
    consts = set()
    for a in d.cc_atoms:
        if isinstance(a, Diff):
            for t in (a.a, a.b):
                if t.is_const:
                    consts.add(t.value)
    # 1 != 3 must be known to the equality engine
    assert {1, 3} <= consts
    pair_diffs = [a for a in d.cc_atoms if isinstance(a, Diff)
                  and a.a.is_const and a.b.is_const]
    assert len(pair_diffs) == 1


def test_dispatch_never_drops_atoms():
    text = TWO + "(= (select A x) 1)\n(distinct x 2)\n(mul x x x)\n(=a A B)\n"
    g = desugar_extensionality(parse(text))
    d = dispatch(g)
    # every non-declaration atom lands in at least one engine
    decls = {"DomainDecl", "ArrayDecl", "UniformDecl"}
    payload = [a for a in g.atoms if type(a).__name__ not in decls]
    placed = set(map(id, d.cc_atoms)) | set(map(id, d.fd_atoms))
    for a in payload:
        assert id(a) in placed


def test_dispatch_rejects_sugar():
    with pytest.raises(ValueError):
        dispatch(parse(TWO + "(distinct-a A B)\n"))
    with pytest.raises(ValueError):
        dispatch(parse("(declare-map m 0 2 0 2)\n(keys m 1)\n"))
