import itertools
import random

import pytest
from hypothesis import given, strategies as st

from twrouter.generators import gen_grid_gap
from twrouter.graph import CapGraph, Instance, Mode, ekey
from twrouter.oracle import GuardError, exact, exact_maxedp, exact_maxndp
from twrouter.routing import audit

from conftest import star_instance


def simple_paths(g, s, t):
    out = []

    def walk(path):
        v = path[-1]
        if v == t:
            out.append(tuple(path))
            return
        for w in g.adj[v]:
            if w not in path:
                walk(path + [w])

    walk([s])
    return out


def brute(inst):
    """Try every choice of one path or nothing per pair."""
    g = inst.graph
    options = [[None] + simple_paths(g, s, t) for s, t in inst.pairs.values()]
    best = 0
    for pick in itertools.product(*options):
        load = {}
        for q in pick:
            if q is None:
                continue
            if inst.mode is Mode.NDP:
                for v in q:
                    load[v] = load.get(v, 0) + 1
            else:
                for a, b in zip(q, q[1:]):
                    load[ekey(a, b)] = load.get(ekey(a, b), 0) + 1
        cap = g.node_caps if inst.mode is Mode.NDP else g.edges
        if all(n <= cap[x] for x, n in load.items()):
            best = max(best, sum(q is not None for q in pick))
    return best


def test_star_ndp_capacities():
    assert exact_maxndp(star_instance(1))[0] == 1
    assert exact_maxndp(star_instance(2))[0] == 2


def test_triangle_edp():
    g = CapGraph.build(range(3), [(0, 1), (1, 2), (0, 2)])
    inst = Instance(g, {0: (0, 1), 1: (1, 2), 2: (0, 2)})
    opt, routing = exact_maxedp(inst)
    assert opt == 3 and not audit(routing, inst)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_grid_gap_opt_is_one(k):
    assert exact(gen_grid_gap(k), max_vertices=40)[0] == 1


def test_guard():
    inst = gen_grid_gap(4)
    with pytest.raises(GuardError):
        exact(inst)
    g = CapGraph.build(range(20), [(i, i + 1) for i in range(19)])
    with pytest.raises(GuardError):
        exact(Instance(g, {i: (i, i + 1) for i in range(9)}))


def test_target_stops_early():
    inst = star_instance(2)
    assert exact(inst, target=1)[0] >= 1


@given(st.integers(0, 10**6), st.sampled_from([Mode.EDP, Mode.NDP]))
def test_matches_brute_force(seed, mode):
    rng = random.Random(seed)
    n = rng.randint(3, 7)
    edges = {(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.4}
    g = CapGraph.build(
        range(n),
        [(a, b, rng.randint(1, 2)) for a, b in sorted(edges)],
        {v: rng.randint(1, 2) for v in range(n)} if mode is Mode.NDP else None,
    )
    pairs = {i: tuple(rng.sample(range(n), 2)) for i in range(rng.randint(1, 4))}
    inst = Instance(g, pairs, mode)
    opt, routing = exact(inst)
    assert opt == brute(inst) == routing.size
    assert not audit(routing, inst)
