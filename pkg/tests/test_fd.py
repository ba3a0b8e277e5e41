"""Finite-domain store, trail, propagators, and the labelling search.

Fixpoint examples are frozen values: each was computed once by hand
(the domains are small enough to trace line by line) and the engine
must reproduce them exactly.
"""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdcc.fd import (AccessProp, AllDiffProp, Budget, BudgetExceeded,
                     DiffProp, EqProp, LinearLeqProp, MulProp, SearchStats,
                     Store, UpdateProp, search,
                     TIER_SIZE, TIER_INDEX, TIER_ELEM, TIER_REST)


def doms(store, vids):
    return [sorted(store.dom(v)) for v in vids]


# ----- store and trail -------------------------------------------------------


def test_restrict_assign_exclude():
    s = Store()
    x = s.new_var("x", {0, 1, 2, 3})
    assert s.restrict(x, {1, 2, 5})
    assert sorted(s.dom(x)) == [1, 2]
    assert s.exclude(x, 2)
    assert s.bound(x) and s.value(x) == 1
    assert not s.assign(x, 9)              # empties the domain
    assert s.failed


def test_push_pop_restores_domains_bit_exact():
    s = Store()
    x = s.new_var("x", {0, 1, 2})
    y = s.new_var("y", {5, 6})
    before = (s.dom(x), s.dom(y))
    s.push()
    s.assign(x, 1)
    s.restrict(y, {6})
    s.push()
    s.assign(y, 6)
    s.pop()
    s.pop()
    assert (s.dom(x), s.dom(y)) == before
    assert not s.failed


def test_pop_unwinds_vars_and_props_created_inside_the_frame():
    s = Store()
    x = s.new_var("x", {0, 1})
    s.push()
    y = s.new_var("y", {0, 1})
    s.post(EqProp(x, y))
    assert len(s.domains) == 2 and s.props
    s.pop()
    assert len(s.domains) == 1
    assert not s.props
    assert s.watchers[x] == []


def test_failure_inside_frame_clears_on_pop():
    s = Store()
    x = s.new_var("x", {0})
    y = s.new_var("y", {1})
    s.push()
    s.post(DiffProp(x, y))
    s.post(EqProp(x, y))
    assert not s.propagate()
    assert s.failed
    s.pop()
    assert not s.failed
    assert doms(s, [x, y]) == [[0], [1]]


def test_is_eq_and_is_diff():
    s = Store()
    x = s.new_var("x", {1})
    y = s.new_var("y", {1})
    z = s.new_var("z", {2, 3})
    assert s.is_eq(x, y)
    assert not s.is_eq(x, z)
    assert s.is_diff(x, z)                 # disjoint domains
    w = s.new_var("w", {1, 2})
    assert not s.is_diff(x, w)


def test_probe_detects_diff_by_refutation():
    # domains overlap only at 2, and x != y is posted: assuming x = y
    # collapses both to 2 and the disequality refutes it
    s = Store()
    x = s.new_var("x", {1, 2})
    y = s.new_var("y", {2, 3})
    s.post(DiffProp(x, y))
    s.propagate()
    assert not s.is_diff(x, y)             # domains still overlap
    assert s.is_diff(x, y, probe=True)     # assuming x=y refutes
    # probing leaves no trace
    assert doms(s, [x, y]) == [[1, 2], [2, 3]]
    assert len(s.marks) == 0
    assert not s.failed


# ----- propagators: frozen fixpoints -----------------------------------------


def test_eq_prop_intersects():
    s = Store()
    x = s.new_var("x", {0, 1, 2})
    y = s.new_var("y", {1, 2, 3})
    s.post(EqProp(x, y))
    assert s.propagate()
    assert doms(s, [x, y]) == [[1, 2], [1, 2]]


def test_diff_prop_needs_a_singleton():
    s = Store()
    x = s.new_var("x", {1, 2})
    y = s.new_var("y", {1, 2})
    s.post(DiffProp(x, y))
    assert s.propagate()
    assert doms(s, [x, y]) == [[1, 2], [1, 2]]
    s.assign(x, 1)
    assert s.propagate()
    assert doms(s, [x, y]) == [[1], [2]]


def test_access_fixpoint():
    # e=3 only reachable through cell 1, which then pins both
    s = Store()
    c0 = s.new_var("c0", {0, 1})
    c1 = s.new_var("c1", {2, 3})
    i = s.new_var("i", {0, 1})
    e = s.new_var("e", {3})
    s.post(AccessProp([c0, c1], i, e))
    assert s.propagate()
    assert doms(s, [c0, c1, i, e]) == [[0, 1], [3], [1], [3]]


def test_access_out_of_range_index_values_are_dropped():
    s = Store()
    c0 = s.new_var("c0", {5})
    i = s.new_var("i", {0, 1, 7})
    e = s.new_var("e", {5, 6})
    s.post(AccessProp([c0], i, e))
    assert s.propagate()
    assert doms(s, [c0, i, e]) == [[5], [0], [5]]


def test_update_unchanged_cells_converge():
    # write lands at 0 (cell 0 visibly changed), cell 1 equalises
    s = Store()
    a0 = s.new_var("a0", {1})
    a1 = s.new_var("a1", {3})
    b0 = s.new_var("b0", {2})
    b1 = s.new_var("b1", {3, 4})
    i = s.new_var("i", {0, 1})
    e = s.new_var("e", {2, 4})
    s.post(UpdateProp([a0, a1], i, e, [b0, b1]))
    assert s.propagate()
    assert doms(s, [a0, a1, b0, b1, i, e]) == [[1], [3], [2], [3], [0], [2]]


def test_update_no_information_no_pruning():
    s = Store()
    a0 = s.new_var("a0", {1, 2})
    a1 = s.new_var("a1", {3})
    b0 = s.new_var("b0", {1, 2, 5})
    b1 = s.new_var("b1", {3, 4})
    i = s.new_var("i", {0, 1})
    e = s.new_var("e", {4, 5})
    s.post(UpdateProp([a0, a1], i, e, [b0, b1]))
    assert s.propagate()
    assert doms(s, [a0, a1, b0, b1, i, e]) == \
        [[1, 2], [3], [1, 2, 5], [3, 4], [0, 1], [4, 5]]


def test_update_terminates_when_forced_index_is_already_bound():
    # regression: size-1 array, index pinned, cells disjoint; the
    # forced-index rule used to re-fire forever on the no-op restrict
    s = Store()
    a0 = s.new_var("a0", {0, 1})
    b0 = s.new_var("b0", {2})
    i = s.new_var("i", {0})
    e = s.new_var("e", {2})
    s.post(UpdateProp([a0], i, e, [b0]))
    assert s.propagate()
    assert doms(s, [a0, b0, i, e]) == [[0, 1], [2], [0], [2]]


def test_update_element_out_of_written_cell_fails():
    s = Store()
    a0 = s.new_var("a0", {1})
    b0 = s.new_var("b0", {1})
    i = s.new_var("i", {0})
    e = s.new_var("e", {5})
    s.post(UpdateProp([a0], i, e, [b0]))
    assert not s.propagate()


def test_alldiff_basic_pigeonhole():
    s = Store()
    vids = [s.new_var(f"v{k}", {1, 2}) for k in range(3)]
    s.post(AllDiffProp(vids, "basic"))
    assert not s.propagate()               # 3 vars, 2 values


def test_alldiff_matching_beats_basic():
    # x,y in {1,2} soak up both small values, so z must be 3;
    # the pairwise filter cannot see it, the matching filter must
    for strength, expect_z in (("basic", [1, 2, 3]), ("matching", [3])):
        s = Store()
        x = s.new_var("x", {1, 2})
        y = s.new_var("y", {1, 2})
        z = s.new_var("z", {1, 2, 3})
        s.post(AllDiffProp([x, y, z], strength))
        assert s.propagate()
        assert sorted(s.dom(z)) == expect_z


def test_alldiff_matching_is_domain_consistent_on_random_instances():
    # every surviving value extends to a full injective assignment
    import random
    rng = random.Random(7)
    for _ in range(40):
        n = rng.randint(2, 4)
        s = Store()
        vids = [s.new_var(f"v{k}",
                          {rng.randint(0, 4) for _ in range(rng.randint(1, 4))})
                for k in range(n)]
        before = [s.dom(v) for v in vids]
        s.post(AllDiffProp(vids, "matching"))
        ok = s.propagate()
        sols = [p for p in itertools.product(*before) if len(set(p)) == n]
        if not sols:
            assert not ok
            continue
        assert ok
        for k, v in enumerate(vids):
            assert s.dom(v) == frozenset(p[k] for p in sols)


def test_linear_leq_slack_filtering():
    s = Store()
    x = s.new_var("x", {0, 1, 2, 3})
    y = s.new_var("y", {0, 1, 2, 3})
    s.post(LinearLeqProp([(2, x), (3, y)], 6))
    assert s.propagate()
    assert doms(s, [x, y]) == [[0, 1, 2, 3], [0, 1, 2]]


def test_linear_leq_negative_coefficients():
    s = Store()
    x = s.new_var("x", {0, 1, 2, 3})
    s.post(LinearLeqProp([(-2, x)], -3))   # -2x <= -3, so x >= 2
    assert s.propagate()
    assert sorted(s.dom(x)) == [2, 3]


def test_mul_exact_filtering():
    s = Store()
    x = s.new_var("x", {2, 3})
    y = s.new_var("y", {3, 4})
    z = s.new_var("z", {6, 7, 8, 9})
    s.post(MulProp(x, y, z))
    assert s.propagate()
    assert doms(s, [x, y, z]) == [[2, 3], [3, 4], [6, 8, 9]]


def test_mul_aliased_square():
    # x = x * x with all three slots the same variable. Occurrence
    # correlation is beyond the filtering (each slot is treated as an
    # independent reader), so nothing prunes at the root, but every
    # ground value decides exactly and search finds only fixpoints.
    s = Store()
    x = s.new_var("x", {0, 1, 2, 3})
    s.post(MulProp(x, x, x))
    assert s.propagate()
    for v in range(4):
        s.push()
        ok = s.assign(x, v) and s.propagate()
        assert ok == (v * v == v)
        s.pop()
    verdict, model = search(s, s.propagate, Budget(), SearchStats())
    assert verdict == "sat" and model[x] == 0


# ----- propagator contract: sound pruning, exact at singletons ---------------


def _holds(prop_kind, vals):
    if prop_kind == "access":
        *cells, i, e = vals
        return 0 <= i < len(cells) and cells[i] == e
    if prop_kind == "update":
        n = (len(vals) - 2) // 2
        a, b, i, e = vals[:n], vals[n:2 * n], vals[-2], vals[-1]
        if not 0 <= i < n:
            return False
        return b[i] == e and all(b[k] == a[k] for k in range(n) if k != i)
    raise AssertionError(prop_kind)


def _make(prop_kind, s, domains):
    vids = [s.new_var(f"v{k}", d) for k, d in enumerate(domains)]
    if prop_kind == "access":
        s.post(AccessProp(vids[:-2], vids[-2], vids[-1]))
    else:
        n = (len(vids) - 2) // 2
        s.post(UpdateProp(vids[:n], vids[-2], vids[-1], vids[n:2 * n]))
    return vids


@pytest.mark.parametrize("prop_kind,shape", [
    ("access", 2), ("access", 3), ("update", 1), ("update", 2)])
def test_row_propagators_sound_and_ground_exact(prop_kind, shape):
    """Never prune a value that some solution uses; decide all ground cases."""
    import random
    rng = random.Random(shape * 17 + len(prop_kind))
    n_vars = shape + 2 if prop_kind == "access" else 2 * shape + 2
    universe = [frozenset(c)
                for r in (1, 2) for c in itertools.combinations(range(3), r)]
    for trial in range(300):
        domains = [rng.choice(universe) for _ in range(n_vars)]
        # index positions may also carry out-of-range values
        domains[-2] = domains[-2] | {rng.randint(0, shape)}
        s = Store()
        vids = _make(prop_kind, s, domains)
        ok = s.propagate()
        sols = [p for p in itertools.product(*domains) if _holds(prop_kind, p)]
        if not sols:
            assert not ok, (prop_kind, domains)
            continue
        assert ok, (prop_kind, domains)
        for k, v in enumerate(vids):
            support = {p[k] for p in sols}
            assert support <= s.dom(v), (prop_kind, domains, k)


@pytest.mark.parametrize("prop_kind,shape", [("access", 2), ("update", 2)])
def test_row_propagators_ground_exhaustive(prop_kind, shape):
    # all ground instances over a tiny universe decide correctly
    n_vars = shape + 2 if prop_kind == "access" else 2 * shape + 2
    for vals in itertools.product(range(3), repeat=n_vars):
        s = Store()
        _make(prop_kind, s, [frozenset((v,)) for v in vals])
        assert s.propagate() == _holds(prop_kind, vals), (prop_kind, vals)


# ----- labelling search -------------------------------------------------------


def test_search_finds_min_model():
    s = Store()
    x = s.new_var("x", {0, 1, 2})
    y = s.new_var("y", {0, 1, 2})
    s.post(DiffProp(x, y))
    stats = SearchStats()
    verdict, model = search(s, s.propagate, Budget(), stats)
    assert verdict == "sat"
    assert model[x] == 0 and model[y] == 1  # minimum-value labelling
    assert stats.decisions >= 1


def test_search_exhausts_to_unsat():
    s = Store()
    vids = [s.new_var(f"v{k}", {0, 1}) for k in range(3)]
    for p in range(3):
        for q in range(p + 1, 3):
            s.post(DiffProp(vids[p], vids[q]))
    verdict, model = search(s, s.propagate, Budget(), SearchStats())
    assert verdict == "unsat" and model is None


def test_search_respects_decision_budget():
    s = Store()
    vids = [s.new_var(f"v{k}", set(range(8))) for k in range(6)]
    for p in range(6):
        for q in range(p + 1, 6):
            s.post(DiffProp(vids[p], vids[q]))
    with pytest.raises(BudgetExceeded):
        search(s, s.propagate, Budget(max_decisions=2), SearchStats())


def test_search_verify_hook_guards_models():
    s = Store()
    s.new_var("x", {0, 1})
    with pytest.raises(AssertionError):
        search(s, s.propagate, Budget(), SearchStats(),
               verify=lambda vals: False)


def test_tier_order_picks_sizes_then_indexes_first():
    s = Store()
    e = s.new_var("e", {0, 1}, TIER_ELEM)
    r = s.new_var("r", {0, 1}, TIER_REST)
    i = s.new_var("i", {0, 1}, TIER_INDEX)
    n = s.new_var("n", {1, 2}, TIER_SIZE)
    assert s.pick_unbound() == n
    s.assign(n, 1)
    assert s.pick_unbound() == i
    s.assign(i, 0)
    assert s.pick_unbound() == e
    s.assign(e, 0)
    assert s.pick_unbound() == r


def test_smallest_domain_first_within_tier():
    s = Store()
    a = s.new_var("a", {0, 1, 2})
    b = s.new_var("b", {0, 1})
    assert s.pick_unbound() == b


@settings(max_examples=80, deadline=None)
@given(st.lists(st.sampled_from(["push", "restrict", "pop"]),
                min_size=1, max_size=30))
def test_trail_random_walk_restores_exactly(ops):
    s = Store()
    vids = [s.new_var(f"v{k}", {0, 1, 2, 3}) for k in range(3)]
    import random
    rng = random.Random(42)
    stack = []
    for op in ops:
        if op == "push":
            stack.append([s.dom(v) for v in vids])
            s.push()
        elif op == "restrict" and stack:
            v = rng.choice(vids)
            keep = rng.sample([0, 1, 2, 3], rng.randint(1, 3))
            s.restrict(v, frozenset(keep))
        elif op == "pop" and stack:
            s.pop()
            assert [s.dom(v) for v in vids] == stack.pop()
    while stack:
        s.pop()
        assert [s.dom(v) for v in vids] == stack.pop()
