"""Extensions: uniform arrays, growable arrays, the dedicated
whole-array-difference propagator, and the map encoding."""

import itertools

import pytest

from fdcc import Config, oracle_eval, oracle_solve, parse, solve
from fdcc.ext import (AccessGrowProp, DiffArrayProp, GrowArray,
                      UpdateGrowProp, encode_maps)
from fdcc.fd import Budget, SearchStats, Store, TIER_SIZE, search
from fdcc.formula import Keys


# ----- uniform arrays ---------------------------------------------------------


def test_uniform_read_is_the_element(run):
    r = run("(declare-int e 0 5)\n(declare-int x 0 9)\n"
            "(declare-uniform-array U e)\n"
            "(= (select U 3) 4)\n(= (select U x) e)\n")
    assert r.verdict == "sat"
    assert r.model.ints["e"] == 4


def test_uniform_reads_at_any_two_indexes_agree(run):
    r = run("(declare-int e 0 5)\n(declare-int i 0 100)\n"
            "(declare-int j 0 100)\n(declare-uniform-array U e)\n"
            "(distinct (select U i) (select U j))\n")
    assert r.verdict == "unsat"


def test_store_on_uniform_materialises_cells(run):
    # one write on a constant array: reads elsewhere still see the element
    r = run("(declare-int e 0 5)\n(declare-uniform-array U e)\n"
            "(= (select (store U 2 9) 2) 9)\n"
            "(= (select (store U 2 9) 0) 3)\n")
    assert r.verdict == "sat"
    assert r.model.ints["e"] == 3


def test_store_on_uniform_conflicts_with_element(run):
    r = run("(declare-int e 0 5)\n(declare-uniform-array U e)\n"
            "(= e 1)\n(= (select (store U 2 3) 0) 2)\n")
    assert r.verdict == "unsat"


# ----- growable arrays --------------------------------------------------------


def test_grow_cells_read_as_top_until_defined():
    s = Store()
    n = s.new_var("n", {1, 2, 3}, TIER_SIZE)
    g = GrowArray("G", n, frozenset({0, 1, 2}))
    assert g.cell_dom(s, 1) == frozenset({0, 1, 2})
    s.push()
    vid = g.define(s, 1)
    assert g.entries == {1: vid}
    s.pop()
    assert g.entries == {}                 # definition is trailed


def test_grow_access_couples_index_and_size():
    s = Store()
    n = s.new_var("n", {1, 2, 3}, TIER_SIZE)
    g = GrowArray("G", n, frozenset({0, 1}))
    i = s.new_var("i", {0, 1, 2, 5})
    e = s.new_var("e", {0, 1})
    p = AccessGrowProp(g, i, e)
    p.bind(s)
    s.post(p)
    assert s.propagate()
    assert sorted(s.dom(i)) == [0, 1, 2]   # 5 can never be in bounds
    s.restrict(i, {2})
    assert s.propagate()
    assert sorted(s.dom(n)) == [3]         # position 2 exists: size > 2


def test_grow_update_out_of_bounds_write_forces_size():
    s = Store()
    n = s.new_var("n", {1, 2}, TIER_SIZE)
    a = GrowArray("A", n, frozenset({0, 1}))
    b = GrowArray("B", n, frozenset({0, 1}))
    i = s.new_var("i", {1})
    e = s.new_var("e", {0})
    p = UpdateGrowProp(a, i, e, b)
    s.post(p)
    assert s.propagate()
    assert sorted(s.dom(n)) == [2]         # write at 1 needs size 2


def test_grow_update_terminates_with_pinned_index_and_disjoint_cells():
    # growable twin of the fixed-array forced-index regression
    s = Store()
    n = s.new_var("n", {1}, TIER_SIZE)
    a = GrowArray("A", n, frozenset({0, 1}))
    b = GrowArray("B", n, frozenset({2}))
    i = s.new_var("i", {0})
    e = s.new_var("e", {2})
    p = UpdateGrowProp(a, i, e, b)
    s.post(p)
    assert s.propagate()
    assert sorted(s.dom(i)) == [0]


def test_bounded_array_solving_end_to_end(run):
    # reading position 2 forces the size up; the size answer is in the model
    r = run("(declare-array G (bounded 4) 0 3)\n(declare-int x 0 3)\n"
            "(= (select G 2) x)\n(distinct x 0)\n")
    assert r.verdict == "sat"
    size, cells = r.model.grow["G"]
    assert size >= 3
    assert cells[2] != 0
    assert len(cells) == size


def test_bounded_array_size_term(run):
    r = run("(declare-array G (bounded 4) 0 3)\n(declare-int s 0 9)\n"
            "(= (size G) s)\n(leq (+ (* -1 s)) -3)\n")
    assert r.verdict == "sat"
    assert r.model.grow["G"][0] >= 3
    assert r.model.ints["s"] == r.model.grow["G"][0]


def test_bounded_array_unsat_when_no_size_fits(run):
    r = run("(declare-array G (bounded 2) 0 3)\n"
            "(= (select G 2) 1)\n")       # needs size >= 3, bound is 2
    assert r.verdict == "unsat"


# ----- whole-array difference propagator ---------------------------------------


def test_diff_array_prop_prunes_proven_equal_positions():
    s = Store()
    a = [s.new_var(f"a{k}", {k}) for k in range(3)]
    b = [s.new_var(f"b{k}", {k}) for k in range(2)] + [s.new_var("b2", {0, 2})]
    w = s.new_var("w", {0, 1, 2})
    s.post(DiffArrayProp(a, w, b))
    assert s.propagate()
    # positions 0 and 1 hold equal singletons; only 2 can witness
    assert sorted(s.dom(w)) == [2]
    assert sorted(s.dom(b[2])) == [0]      # and the cells there differ


def test_diff_array_prop_fails_on_identical_arrays():
    s = Store()
    a = [s.new_var(f"a{k}", {k}) for k in range(3)]
    w = s.new_var("w", {0, 1, 2})
    s.post(DiffArrayProp(a, w, a))
    assert not s.propagate()


def test_diff_array_prop_consults_the_equality_prover():
    s = Store()
    a = [s.new_var("a0", {0, 1})]
    b = [s.new_var("b0", {0, 1})]
    w = s.new_var("w", {0})
    s.post(DiffArrayProp(a, w, b, prove_eq=lambda k: True))
    assert not s.propagate()               # the prover says every cell matches


def test_identity_chain_unsat_propagator_vs_witness(run):
    # two arrays pinned cell-by-cell to the same values
    n = 6
    decls = [f"(declare-array A {n} 0 {n})", f"(declare-array B {n} 0 {n})"]
    atoms = [f"(= (select A {k}) {k})" for k in range(n)]
    atoms += [f"(= (select B {k}) {k})" for k in range(n)]
    text = "\n".join(decls + atoms + ["(distinct-a A B)"]) + "\n"
    rp = run(text, diff_array="propagator")
    assert rp.verdict == "unsat"
    assert rp.stats.decisions == 0         # pruned without search
    rw = run(text, diff_array="witness")
    assert rw.verdict == "unsat"
    assert rw.stats.decisions >= n - 1     # witness enumerates positions


# ----- maps --------------------------------------------------------------------


def test_map_encoding_produces_pure_array_formula():
    f = parse("(declare-map m 0 2 0 3)\n(keys m 1)\n"
              "(= (select m 1) 2)\n")
    g = encode_maps(f)
    assert not any(isinstance(a, Keys) for a in g.atoms)
    assert not g.maps
    names = set(g.arrays)
    assert names == {"m%K", "m%E"}


def test_map_read_requires_membership(run):
    r = run("(declare-map m 0 2 0 3)\n(= (select m 1) 2)\n(not-keys m 1)\n")
    assert r.verdict == "unsat"


def test_map_store_sets_key_and_value(run):
    r = run("(declare-map m 0 2 0 3)\n"
            "(= (select (store m 1 3) 1) 3)\n(not-keys m 1)\n")
    assert r.verdict == "sat"
    assert 1 not in r.model.maps["m"]


def test_map_delete_clears_membership(run):
    r = run("(declare-map m 0 2 0 3)\n(keys m 1)\n(delete m 1 m2)\n"
            "(keys m2 1)\n")
    assert r.verdict == "unsat"
    r = run("(declare-map m 0 2 0 3)\n(keys m 1)\n(delete m 1 m2)\n"
            "(not-keys m2 1)\n(keys m2 0)\n")
    assert r.verdict == "sat"
    # m2 is an alias for delete(m,1): membership at 0 comes from m itself
    assert 0 in r.model.maps["m"] and 1 in r.model.maps["m"]


def test_map_out_of_range_key_is_never_a_member(run):
    r = run("(declare-map m 0 2 0 3)\n(declare-int k 0 9)\n"
            "(leq (+ (* -1 k)) -5)\n(keys m k)\n")
    assert r.verdict == "unsat"            # k >= 5 lies outside 0..2


def test_map_encoding_agrees_with_oracle_semantics(run):
    # store then delete at the same key round-trips to absent
    text = ("(declare-map m 0 1 0 2)\n(not-keys m 0)\n"
            "(delete (store m 0 1) 0 m2)\n(not-keys m2 0)\n(keys m 0)\n")
    f = parse(text)
    assert oracle_solve(f)[0] == "unsat"
    assert run(text).verdict == "unsat"
