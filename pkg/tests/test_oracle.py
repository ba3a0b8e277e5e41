"""Brute-force reference: ground evaluation and exhaustive enumeration.

This module must stay independent of the solving engines; everything
here checks it against hand-computed ground truth only.
"""

import pytest

from fdcc import GroundModel, oracle_eval, oracle_solve, parse


def test_eval_fixed_array_read_over_write():
    f = parse("(declare-int i 0 2)\n(declare-int x 0 5)\n"
              "(declare-array A 3 0 5)\n"
              "(= (select (store A 1 4) i) x)\n")
    m = GroundModel(ints={"i": 1, "x": 4}, arrays={"A": [0, 0, 0]})
    assert oracle_eval(f, m)
    m = GroundModel(ints={"i": 0, "x": 0}, arrays={"A": [0, 0, 0]})
    assert oracle_eval(f, m)               # miss reads the base cell
    m = GroundModel(ints={"i": 1, "x": 0}, arrays={"A": [0, 0, 0]})
    assert not oracle_eval(f, m)


def test_eval_out_of_bounds_read_falsifies_the_atom():
    f = parse("(declare-int i 0 9)\n(declare-array A 3 0 5)\n"
              "(= (select A i) 0)\n")
    assert oracle_eval(f, GroundModel(ints={"i": 2}, arrays={"A": [0, 0, 0]}))
    assert not oracle_eval(f, GroundModel(ints={"i": 5},
                                          arrays={"A": [0, 0, 0]}))


def test_eval_out_of_bounds_write_falsifies_even_when_shadowed():
    # the inner store at index 5 is overwritten at the read position,
    # but an out-of-range write anywhere in the chain sinks the atom
    f = parse("(declare-int i 0 9)\n(declare-array A 3 0 5)\n"
              "(= (select (store (store A i 1) 0 2) 0) 2)\n")
    assert oracle_eval(f, GroundModel(ints={"i": 0}, arrays={"A": [0, 0, 0]}))
    assert not oracle_eval(f, GroundModel(ints={"i": 5},
                                          arrays={"A": [0, 0, 0]}))


def test_eval_domain_decl_is_an_atom():
    f = parse("(declare-int x 2 4)\n")
    assert oracle_eval(f, GroundModel(ints={"x": 3}))
    assert not oracle_eval(f, GroundModel(ints={"x": 5}))


def test_eval_arithmetic():
    f = parse("(declare-int x 0 9)\n(declare-int y 0 9)\n"
              "(leq (+ (* 2 x) (* -3 y)) 1)\n(mul x y x)\n")
    assert oracle_eval(f, GroundModel(ints={"x": 2, "y": 1}))
    assert not oracle_eval(f, GroundModel(ints={"x": 2, "y": 0}))  # leq 4<=1
    assert not oracle_eval(f, GroundModel(ints={"x": 2, "y": 2}))  # mul 4!=2


def test_eval_whole_array_atoms():
    f = parse("(declare-array A 2 0 3)\n(declare-array B 2 0 3)\n"
              "(=a A B)\n")
    assert oracle_eval(f, GroundModel(arrays={"A": [1, 2], "B": [1, 2]}))
    assert not oracle_eval(f, GroundModel(arrays={"A": [1, 2], "B": [1, 3]}))


def test_eval_uniform_array_reads():
    f = parse("(declare-int e 0 5)\n(declare-uniform-array U e)\n"
              "(= (select U 70000) e)\n")
    assert oracle_eval(f, GroundModel(ints={"e": 3}))


def test_eval_map_semantics():
    f = parse("(declare-map m 0 3 0 7)\n(keys m 1)\n"
              "(= (select m 1) 5)\n(not-keys m 2)\n")
    assert oracle_eval(f, GroundModel(maps={"m": {1: 5}}))
    assert not oracle_eval(f, GroundModel(maps={"m": {1: 4}}))
    assert not oracle_eval(f, GroundModel(maps={"m": {1: 5, 2: 0}}))
    # reading an absent key falsifies the read's atom
    assert not oracle_eval(f, GroundModel(maps={"m": {}}))


def test_eval_map_store_and_delete():
    f = parse("(declare-map m 0 3 0 7)\n"
              "(= (select (store m 2 6) 2) 6)\n(delete m 2 m2)\n"
              "(not-keys m2 2)\n")
    assert oracle_eval(f, GroundModel(maps={"m": {}}))
    assert oracle_eval(f, GroundModel(maps={"m": {2: 1}}))


def test_eval_grow_arrays():
    f = parse("(declare-array G (bounded 3) 0 5)\n(= (select G 1) 4)\n"
              "(= (size G) 2)\n")
    assert oracle_eval(f, GroundModel(grow={"G": (2, [0, 4])}))
    assert not oracle_eval(f, GroundModel(grow={"G": (1, [0])}))


def test_solve_enumerates_smallest_model_first():
    verdict, m = oracle_solve(parse(
        "(declare-int x 0 3)\n(declare-int y 0 3)\n(distinct x y)\n"))
    assert verdict == "sat"
    assert (m.ints["x"], m.ints["y"]) == (0, 1)


def test_solve_unsat_and_cap():
    verdict, m = oracle_solve(parse(
        "(declare-int x 0 1)\n(declare-int y 0 1)\n(declare-int z 0 1)\n"
        "(distinct x y)\n(distinct x z)\n(distinct y z)\n"))
    assert verdict == "unsat" and m is None
    verdict, m = oracle_solve(parse(
        "(declare-int x 0 1000)\n(declare-int y 0 1000)\n"
        "(declare-array A 20 0 1000)\n(= (select A x) y)\n"), cap=1000)
    assert verdict == "unknown"


def test_solve_verdict_is_atom_order_independent():
    lines = ["(declare-int x 0 2)", "(declare-int y 0 2)",
             "(declare-array A 2 0 2)", "(= (select A x) y)",
             "(distinct x y)", "(leq (+ (* 1 x) (* 1 y)) 2)"]
    base = oracle_solve(parse("\n".join(lines) + "\n"))
    # declarations must precede use; permute only the constraint tail
    import itertools
    for tail in itertools.permutations(lines[3:]):
        v, _ = oracle_solve(parse("\n".join(lines[:3] + list(tail)) + "\n"))
        assert v == base[0]


def test_solve_models_satisfy_by_eval():
    from conftest import gen_small
    sat = 0
    for seed in range(120):
        f = parse(gen_small(seed))
        verdict, m = oracle_solve(f)
        if verdict == "sat":
            sat += 1
            assert oracle_eval(f, m), seed
    assert sat > 10                        # the generator is not degenerate
