import pytest
from hypothesis import given, strategies as st

from twrouter.decomp import (
    DecompositionError,
    RootedDecomposition,
    TDFile,
    attach_leaves,
    heuristic_decomposition,
    preprocess,
    remove_empty_bags,
    subgraph_at,
    torso,
    validate,
)
from twrouter.generators import gen_partial_ktree, random_instance_with_decomposition
from twrouter.graph import CapGraph, InputError, Instance


@pytest.fixture
def small():
    # 0-1-2-3 path plus chord 1-3; root bag {1, 2, 3}
    g = CapGraph.build(range(5), [(0, 1), (1, 2), (2, 3), (1, 3), (3, 4)])
    d = RootedDecomposition({1: None, 2: 1, 3: 1}, {1: {1, 2, 3}, 2: {0, 1}, 3: {3, 4}})
    return g, d


def test_adhesions(small):
    g, d = small
    assert validate(d, g) == 2
    assert d.sigma[2] == {1} and d.gamma[2] == {0, 1} and d.alpha[2] == {0}
    assert d.sigma[1] == frozenset() and d.alpha[1] == {0, 1, 2, 3, 4}
    assert d.children[1] == (2, 3) and d.depth[3] == 1 and not d.is_path


def test_subgraph_at_drops_adhesion_edges():
    g = CapGraph.build(range(4), [(0, 1), (1, 2), (0, 2), (2, 3)])
    d = RootedDecomposition({1: None, 2: 1}, {1: {0, 2, 3}, 2: {0, 1, 2}})
    validate(d, g)
    sub = subgraph_at(d, g, 2)
    assert (0, 2) not in sub.edges and (0, 1) in sub.edges


@pytest.mark.parametrize(
    "parent, bags, prop",
    [
        ({1: None}, {1: {0, 1, 9}}, "unknown vertex"),
        ({1: None, 2: 1}, {1: {0, 1}, 2: {2}}, "uncovered edge"),
        ({1: None, 2: 1}, {1: {0, 1}, 2: {1, 2}}, "vertex in no bag"),
        ({1: None, 2: 1, 3: 2}, {1: {0, 1}, 2: {1, 2}, 3: {0, 2, 3}}, "disconnected"),
    ],
)
def test_validate_errors(parent, bags, prop):
    g = CapGraph.build(range(4), [(0, 1), (1, 2)])
    with pytest.raises(DecompositionError, match=prop):
        validate(RootedDecomposition(parent, bags), g)


def test_width_must_be_below_r(small):
    g, d = small
    with pytest.raises(DecompositionError, match="width"):
        validate(d, g, r=2)
    assert validate(d, g, r=3) == 2


def test_bad_trees_rejected():
    with pytest.raises(InputError):
        RootedDecomposition({1: None, 2: None}, {1: {0}, 2: {1}})
    with pytest.raises(InputError):
        RootedDecomposition({1: 2, 2: 1}, {1: {0}, 2: {1}})


def test_remove_empty_bags_and_preprocess():
    g = CapGraph.build(range(4), [(0, 1), (2, 3)])
    d = RootedDecomposition({1: None, 2: 1, 3: 1}, {1: set(), 2: {0, 1}, 3: {2, 3}})
    clean = remove_empty_bags(d)
    assert 1 not in clean.bags and clean.root == 2
    inst = Instance(g, {0: (0, 1), 1: (2, 3)})
    parts = preprocess(inst, d)
    assert [sorted(p[0].graph.vertices) for p in parts] == [[0, 1], [2, 3]]
    for sub, sd, _ in parts:
        validate(sd, sub.graph)


def test_torso_completes_adhesions(small):
    g, d = small
    t = torso(d, g, 1)
    assert set(t.vertices) == {1, 2, 3}


def test_attach_leaves_tree_and_path():
    g = CapGraph.build(range(3), [(0, 1), (1, 2)])
    d = RootedDecomposition({1: None, 2: 1}, {1: {0, 1}, 2: {1, 2}})
    g2 = CapGraph.build(range(5), [(0, 1), (1, 2), (3, 1), (4, 0)])
    d2 = attach_leaves(d, [(3, 1), (4, 0)])
    validate(d2, g2)
    assert d2.is_path and d2.width <= d.width + 1


TD_TEXT = """c a comment
s td 3 2 4
b 1 1 2
c between bags
b 2 2 3
b 3 3 4
1 2
2 3
"""


def test_td_round_trip_is_exact():
    td = TDFile.parse(TD_TEXT)
    assert td.emit() == TD_TEXT
    d = td.to_decomposition()
    assert d.root == 1 and d.bags[3] == {2, 3}


def test_td_path_rooted_at_endpoint():
    text = "s td 3 2 4\nb 1 2 3\nb 2 1 2\nb 3 3 4\n1 2\n1 3\n"
    d = TDFile.parse(text).to_decomposition()
    assert d.root == 2 and d.is_path


@pytest.mark.parametrize("text", ["b 1 1\n", "s td 2 1 1\nb 1 1\n", "s td 2 1 2\nb 1 1\nb 2 2\n", "s td 1 1 1\nb 1 1\n1 2 3\n"])
def test_td_errors(text):
    with pytest.raises(InputError):
        TDFile.parse(text).to_decomposition()


@given(st.integers(4, 16), st.integers(0, 14), st.integers(0, 10_000), st.booleans())
def test_heuristic_decomposition_is_valid(n, extra, seed, want_path):
    inst, d = random_instance_with_decomposition(n, n - 1 + extra, 1, seed, want_path=want_path)
    validate(d, inst.graph)
    if want_path:
        assert d.is_path


@given(st.integers(1, 4), st.integers(0, 1000))
def test_ktree_generator_width(width, seed):
    inst, d = gen_partial_ktree(20, width, 3, seed)
    assert validate(d, inst.graph) <= width


def test_ktree_generator_special_cases():
    inst, d = gen_partial_ktree(4, 3, 1, 0, keep=1.0)
    assert len(d.bags) == 1 and inst.graph.m == 6
    tree, _ = gen_partial_ktree(15, 1, 2, 3, keep=1.0)
    assert tree.graph.m == 14 and len(tree.graph.components()) == 1
    a, b = gen_partial_ktree(20, 2, 3, 5), gen_partial_ktree(20, 2, 3, 5)
    assert a[0].graph == b[0].graph and a[1].bags == b[1].bags


def _order_width(g, order):
    """Width of an elimination order, simulated with explicit fill edges."""
    adj = {v: set(g.adj[v]) for v in g.vertices}
    width = 0
    for v in order:
        nb = adj.pop(v)
        width = max(width, len(nb))
        for a in nb:
            adj[a] |= nb - {a}
            adj[a].discard(v)
    return width


def test_tree_has_width_one():
    from twrouter.graph import CapGraph

    g = CapGraph.build(range(7), [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)])
    assert validate(heuristic_decomposition(g), g) == 1


def test_cycle_width_matches_brute_force():
    import itertools

    from twrouter.graph import CapGraph

    g = CapGraph.build(range(4), [(0, 1), (1, 2), (2, 3), (3, 0)])
    best = min(_order_width(g, p) for p in itertools.permutations(range(4)))
    assert best == 2
    assert validate(heuristic_decomposition(g), g) == best
