"""Shared fixtures: the two running examples and a small-formula generator.

The generator mirrors the shapes the solver is specified over: a few
integers over tiny domains, a few small fixed arrays, store chains,
and the atom kinds the grammar admits. Tiny bounds keep the
brute-force oracle exact and fast, so every verdict can be
cross-checked.
"""

import random

import pytest

from fdcc import Config, parse, solve

# select(A,i)=e, select(A,j)=f, e!=f, i=j over a size-100 array:
# unsat by read congruence alone, no search needed.
GOLDEN_EQ = """\
(declare-int i 0 99)
(declare-int j 0 99)
(declare-int e 0 1000)
(declare-int f 0 1000)
(declare-array A 100 0 1000)
(= (select A i) e)
(= (select A j) f)
(distinct e f)
(= i j)
"""

# three pairwise-distinct reads of a size-2 array: the indexes form a
# 3-clique that cannot be injected into {0,1}.
GOLDEN_PIGEON = """\
(declare-int i 0 1)
(declare-int j 0 1)
(declare-int k 0 1)
(declare-int e 0 5)
(declare-int f 0 5)
(declare-int g 0 5)
(declare-array A 2 0 5)
(= (select A i) e)
(= (select A j) f)
(= (select A k) g)
(distinct e f)
(distinct e g)
(distinct f g)
"""


def gen_small(seed: int) -> str:
    """Seeded random formula within oracle reach.

    <= 3 ints over 0..3, <= 2 arrays of size <= 3 with elements 0..2,
    plus up to two store chains and up to 8 atoms drawn from the
    grammar. Extensional atoms only between same-size arrays (the
    cross-size case is a declaration error by contract).
    """
    rng = random.Random(seed)
    lines = []
    n_ints = rng.randint(1, 3)
    for v in range(n_ints):
        lines.append(f"(declare-int x{v} 0 3)")
    n_arrays = rng.randint(0, 2)
    sizes = {}
    for a in range(n_arrays):
        size = rng.randint(1, 3)
        sizes[f"A{a}"] = size
        lines.append(f"(declare-array A{a} {size} 0 2)")

    def var() -> str:
        return f"x{rng.randrange(n_ints)}"

    def idx() -> str:
        if rng.random() < 0.5:
            return var()
        return str(rng.randint(0, 3))

    def arr_view(name: str) -> str:
        depth = rng.randint(0, 2)
        out = name
        for _ in range(depth):
            out = f"(store {out} {idx()} {int_term(False)})"
        return out

    def int_term(allow_select: bool = True) -> str:
        r = rng.random()
        if r < 0.4:
            return var()
        if r < 0.7 or not sizes or not allow_select:
            return str(rng.randint(0, 3))
        name = rng.choice(sorted(sizes))
        return f"(select {arr_view(name)} {idx()})"

    kinds = ["eq", "diff", "leq", "mul"]
    if n_arrays >= 2:
        kinds += ["aeq", "adiff"]
    for _ in range(rng.randint(1, 8)):
        k = rng.choice(kinds)
        if k == "eq":
            lines.append(f"(= {int_term()} {int_term()})")
        elif k == "diff":
            lines.append(f"(distinct {int_term()} {int_term()})")
        elif k == "leq":
            n = rng.randint(1, 2)
            s = " ".join(f"(* {rng.choice([-2, -1, 1, 2])} {var()})"
                         for _ in range(n))
            lines.append(f"(leq (+ {s}) {rng.randint(-3, 8)})")
        elif k == "mul":
            lines.append(f"(mul {var()} {var()} {var()})")
        else:
            names = sorted(sizes)
            same = [(a, b) for i, a in enumerate(names)
                    for b in names[i + 1:] if sizes[a] == sizes[b]]
            if not same:
                lines.append(f"(= {int_term()} {int_term()})")
                continue
            a, b = rng.choice(same)
            op = "=a" if k == "aeq" else "distinct-a"
            lines.append(f"({op} {a} {b})")
    return "\n".join(lines) + "\n"


@pytest.fixture
def run():
    def _run(text: str, **kw) -> object:
        kw.setdefault("timeout", 30)
        return solve(parse(text), Config(**kw))
    return _run


def gen_map_small(seed: int) -> str:
    """Random map formula small enough for exhaustive enumeration."""
    rng = random.Random(seed ^ 0x9E3779B9)
    lines = ["(declare-map m 0 2 0 2)"]
    names = ["m"]
    if rng.random() < 0.5:
        lines.append("(declare-map p 0 1 0 2)")
        names.append("p")
    nv = rng.randint(1, 2)
    for k in range(nv):
        lines.append(f"(declare-int x{k} 0 2)")

    def ivar() -> str:
        return f"x{rng.randrange(nv)}"

    def key() -> str:
        if rng.random() < 0.45:
            return ivar()
        return str(rng.randint(0, 3))      # 3 falls outside every key range

    def val() -> str:
        if rng.random() < 0.45:
            return ivar()
        return str(rng.randint(0, 2))

    def view(base: str) -> str:
        t = base
        for _ in range(rng.randint(0, 2)):
            if rng.random() < 0.6:
                t = f"(store {t} {key()} {val()})"
            else:
                t = f"(delete {t} {key()})"
        return t

    for _ in range(rng.randint(2, 6)):
        m = rng.choice(names)
        k = rng.randrange(5)
        if k == 0:
            lines.append(f"(= (select {view(m)} {key()}) {val()})")
        elif k == 1:
            lines.append(f"(distinct (select {view(m)} {key()}) {val()})")
        elif k == 2:
            lines.append(f"(keys {view(m)} {key()})")
        elif k == 3:
            lines.append(f"(not-keys {view(m)} {key()})")
        else:
            lines.append(f"(= {ivar()} {val()})")
    return "\n".join(lines) + "\n"
