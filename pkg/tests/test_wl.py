import pytest
from hypothesis import given, strategies as st

from twrouter.decomp import heuristic_decomposition
from twrouter.generators import gen_partial_ktree, gen_unsafe_blob
from twrouter.graph import CapGraph, InputError, Instance, Mode
from twrouter.pathflow import PathFlow
from twrouter.wl import WLComponent, nice_flow, product_demand_ratio, verify_wl_certificate, wl_decompose

from conftest import path_instance


def test_single_pair_on_path():
    inst = path_instance(4)
    comps, rep = wl_decompose(inst, heuristic_decomposition(inst.graph))
    assert len(comps) == 1
    c = comps[0]
    # base case: g = both prefixes, c = 1, |sigma| <= r, so pi >= |f|/(3r) on each end
    assert c.pi[0] == pytest.approx(c.pi[3])
    assert c.pi[0] >= 1 / (3 * rep.r)
    assert verify_wl_certificate(c)


def test_empty_flow_and_disconnected_parts():
    inst = path_instance(4)
    comps, _ = wl_decompose(inst, heuristic_decomposition(inst.graph), f=PathFlow())
    assert comps == []
    g = CapGraph.build(range(6), [(0, 1), (1, 2), (3, 4), (4, 5)])
    inst = Instance(g, {0: (0, 2), 1: (3, 5)})
    comps, _ = wl_decompose(inst, heuristic_decomposition(g))
    assert len(comps) == 2
    assert not (comps[0].graph.vertices & comps[1].graph.vertices)


def test_nice_flow_scaling_case():
    # g already ends at one vertex with equal pair marginals: h = g / 3
    f = PathFlow([(0, (0, 1, 2), 1.0)])
    g = PathFlow([(0, (0, 5), 0.5), (2, (2, 5), 0.5)])
    z, h = nice_flow({0: (0, 2)}, f, g, 2.0, {5})
    assert z == 5
    assert sorted((e.path, round(e.weight, 9)) for e in h.entries) == [((0, 5), 0.166666667), ((2, 5), 0.166666667)]


def test_nice_flow_balances_through_pair_flow():
    # 0 and 2 are paired via 0-1-2; only 2 reaches the sink 4 through 3
    f = PathFlow([(0, (0, 1, 2), 1.0)])
    g = PathFlow([(0, (0, 5), 0.5), (2, (2, 3, 4), 0.5)])
    z, h = nice_flow({0: (0, 2)}, f, g, 2.0, {4, 5})
    assert z == 4  # tie on 0.5 broken by the smaller id
    sent = {}
    for e in h.entries:
        assert e.path[-1] == 4
        sent[e.path[0]] = sent.get(e.path[0], 0) + e.weight
    assert sent[0] == pytest.approx(sent[2]) == pytest.approx(0.5 / 3)
    assert sum(sent.values()) >= f.value / (3 * 2.0 * 2)
    assert nice_flow({}, PathFlow(), PathFlow(), 1.0, {4})[1].value == 0


def _component():
    g = CapGraph.build(range(3), [(0, 1), (1, 2)])
    h = PathFlow([(0, (0, 1), 0.5), (0, (2, 1), 0.5)])
    return WLComponent(g, {0: 0.5, 2: 0.5}, 1, h, {0: (0, 2)})


def test_certificate_checks():
    c = _component()
    assert verify_wl_certificate(c)
    assert product_demand_ratio(c) >= 0.5
    bad = _component()
    bad.certificate = PathFlow([(0, (0, 1), 1.5), (0, (2, 1), 0.5)])
    chk = verify_wl_certificate(bad)
    assert not chk and any(v[0] == "capacity" for v in chk.violations)
    bad = _component()
    bad.pi = {0: 0.5, 2: 0.25}
    chk = verify_wl_certificate(bad)
    assert not chk and any("marginal" in v[0] for v in chk.violations)


def test_rejects_non_matching_and_ndp():
    g = CapGraph.build(range(3), [(0, 1), (1, 2)])
    with pytest.raises(InputError):
        wl_decompose(Instance(g, {0: (0, 2), 1: (0, 1)}), heuristic_decomposition(g))
    inst = path_instance(3, mode=Mode.NDP)
    with pytest.raises(InputError):
        wl_decompose(inst, heuristic_decomposition(inst.graph))


@given(st.integers(0, 10**5))
def test_bound_and_certificates(seed):
    inst, d = gen_partial_ktree(16, 2, 4, seed)
    comps, rep = wl_decompose(inst, d)
    assert rep.weight >= rep.bound - 1e-9
    seen = set()
    for c in comps:
        assert verify_wl_certificate(c)
        assert not (seen & c.graph.vertices)
        seen |= c.graph.vertices
        assert c.pairs == {p: st for p, st in inst.pairs.items() if set(st) <= c.graph.vertices}


def test_blob_split_components_are_well_linked():
    inst, d, f = gen_unsafe_blob(1, blob_pairs=3)
    comps, rep = wl_decompose(inst, d, f)
    assert rep.weight >= rep.bound
    for c in comps:
        if c.weight > 0 and c.graph.n <= 14:
            assert product_demand_ratio(c) >= 0.5 - 1e-7
