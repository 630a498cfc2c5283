import random

import pytest
from hypothesis import given, strategies as st

from twrouter.decomp import RootedDecomposition, validate
from twrouter.flowkit import (
    ContractError,
    boundary_capacity,
    check_violating_set,
    ell_values,
    extract_violating_set,
    inside_flow,
    is_good,
    is_safe,
    prefix_to_set,
    prefix_truncate,
)
from twrouter.generators import gen_unsafe_blob, random_instance_with_decomposition
from twrouter.graph import CapGraph, Instance, Mode
from twrouter.lp import fractional_solution
from twrouter.pathflow import PathFlow


@pytest.fixture
def chain():
    # path 0-1-2-3-4, bags {i, i+1}, root {0, 1}
    g = CapGraph.build(range(5), [(i, i + 1) for i in range(4)])
    d = RootedDecomposition({1: None, 2: 1, 3: 2, 4: 3}, {i + 1: {i, i + 1} for i in range(4)})
    return g, d


def test_good_and_inside(chain):
    g, d = chain
    f = PathFlow([(0, (2, 3, 4), 1.0)])
    assert not is_good(2, f, d)  # alpha(2) = {2, 3, 4} holds the whole path
    assert is_good(3, f, d)  # the path meets sigma(3) = {2}
    assert inside_flow(2, f, d).value == 1.0
    assert inside_flow(3, f, d).value == 0.0


def test_prefixes(chain):
    g, d = chain
    f = PathFlow([(0, (0, 1, 2, 3, 4), 1.0)])
    pre = prefix_truncate(f, 4, d)  # gamma(4) = {3, 4}, sigma = {3}
    assert [e.path for e in pre.entries] == [(4, 3)]
    both = prefix_to_set(f, {2})
    assert sorted(e.path for e in both.entries) == [(0, 1, 2), (4, 3, 2)]
    with pytest.raises(ContractError):
        prefix_to_set(f, {9})


def test_root_is_unsafe_with_demand(chain):
    g, d = chain
    inst = Instance(g, {0: (0, 4)})
    f = PathFlow([(0, (0, 1, 2, 3, 4), 1.0)])
    rep = is_safe(1, f, d, 2, inst)
    assert not rep.safe and rep.demand == pytest.approx(2 / 8)


def test_blob_node_is_unsafe_and_set_is_certified():
    inst, d, f = gen_unsafe_blob(0)
    r = validate(d, inst.graph) + 1
    l1, l2, unsafe, bad = ell_values(f, d, r, inst)
    assert 0 < l1 <= l2 and set(unsafe) <= set(bad)
    for t in unsafe:
        if d.parent[t] is None:
            continue
        U = extract_violating_set(t, f, d, r, inst)
        ok, why = check_violating_set(U, t, f, d, r, inst)
        assert ok, why
        xu = sum(f.marginals.get(v, 0.0) for v in U)
        assert boundary_capacity(inst, U) < xu / (4 * r)


def test_safe_node_has_no_violating_set(chain):
    g, d = chain
    inst = Instance(g, {0: (3, 4)})
    f = PathFlow([(0, (3, 4), 1.0)])
    with pytest.raises(ContractError):
        extract_violating_set(4, f, d, 2, inst)


@given(st.integers(5, 10), st.integers(0, 6), st.integers(1, 4), st.integers(0, 10**5), st.sampled_from(["edp", "ndp"]))
def test_good_nodes_are_safe_by_flow(n, extra, k, seed, mode):
    inst, d = random_instance_with_decomposition(n, n - 1 + extra, k, seed, mode=mode, want_path=mode == "ndp")
    r = validate(d, inst.graph) + 1
    _, f = fractional_solution(inst)
    for t in d.preorder:
        if d.parent[t] is None or not is_good(t, f, d):
            continue
        fast = is_safe(t, f, d, r, inst)
        slow = is_safe(t, f, d, r, inst, shortcut_good=False)
        assert fast.safe and slow.safe
        assert fast.witness.is_feasible(inst.graph, inst.mode)
        assert slow.witness.is_feasible(inst.graph, inst.mode)


@given(st.integers(0, 10**5))
def test_ell_ordering(seed):
    rng = random.Random(seed)
    inst, d, f = gen_unsafe_blob(seed, width=rng.randint(1, 3), n_base=rng.randint(4, 10))
    r = validate(d, inst.graph) + 1
    l1, l2, unsafe, bad = ell_values(f, d, r, inst)
    assert l1 <= l2 <= r


def min_cut_sets(instance, d, t, f, r):
    """All minimum s*-t* cuts by enumeration over subsets of alpha(t) (edge mode)."""
    import itertools

    x = f.marginals
    gamma, sigma, alpha = d.gamma[t], d.sigma[t], sorted(d.alpha[t])
    edges = [(a, b, c) for (a, b), c in instance.graph.edges.items() if a in gamma and b in gamma and not (a in sigma and b in sigma)]
    best, sets = None, []
    for k in range(len(alpha) + 1):
        for X in itertools.combinations(alpha, k):
            X = set(X)
            val = sum(x.get(v, 0.0) for v in gamma - X) / (4 * r)
            val += sum(c for a, b, c in edges if (a in X) != (b in X))
            if best is None or val < best - 1e-9:
                best, sets = val, [X]
            elif abs(val - best) <= 1e-9:
                sets.append(X)
    return best, sets


def test_two_unsafe_siblings_are_merged():
    # p below sigma {c}; two isolated pair edges a1-b1 and a2-b2 in sibling bags
    g = CapGraph.build(range(6), [(0, 1), (2, 3), (4, 5)])
    inst = Instance(g, {0: (2, 3), 1: (4, 5)})
    d = RootedDecomposition({1: None, 2: 1, 3: 2, 4: 2}, {1: {0}, 2: {0, 1}, 3: {1, 2, 3}, 4: {1, 4, 5}})
    f = PathFlow([(0, (2, 3), 1.0), (1, (4, 5), 1.0)])
    r = 3
    assert not is_safe(3, f, d, r, inst).safe and not is_safe(4, f, d, r, inst).safe
    U = extract_violating_set(2, f, d, r, inst)
    best, sets = min_cut_sets(inst, d, 2, f, r)
    assert best == 0
    assert U == frozenset.intersection(*map(frozenset, sets)) == {2, 3, 4, 5}


@pytest.mark.parametrize("seed", range(6))
def test_violating_set_is_source_minimal_cut(seed):
    inst, d, f = gen_unsafe_blob(seed, n_base=6, blob_pairs=7)
    r = validate(d, inst.graph) + 1
    _, _, unsafe, _ = ell_values(f, d, r, inst)
    t = max((t for t in unsafe if d.parent[t] is not None), key=lambda t: (len(d.sigma[t]), d.depth[t]))
    if len(d.alpha[t]) > 16:
        pytest.skip("alpha too large to enumerate")
    U = extract_violating_set(t, f, d, r, inst)
    _, sets = min_cut_sets(inst, d, t, f, r)
    core = frozenset.intersection(*map(frozenset, sets))
    assert core <= U and any(frozenset(X) == U for X in sets)
