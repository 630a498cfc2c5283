"""Acceptance criteria 1-9; each test prints one PASS/FAIL line (also summarized at the end of the run)."""

import json
import math
import random
import time

import pytest

from twrouter.cli import main
from twrouter.decomp import heuristic_decomposition, preprocess, validate
from twrouter.flowkit import check_violating_set, ell_values, extract_violating_set, is_good, is_safe
from twrouter.formats import write_instance
from twrouter.generators import (
    gen_grid_gap,
    gen_partial_ktree,
    gen_pathwidth_ndp,
    gen_unsafe_blob,
    random_instance_with_decomposition,
)
from twrouter.graph import Mode
from twrouter.hardness import MCCInstance, build_gadget, check_structure, has_multicolored_clique, treedepth_witness, verify_equivalence
from twrouter.lp import fractional_solution, solve_relaxation
from twrouter.oracle import exact
from twrouter.pathflow import PathFlow
from twrouter.rounding import route_via_small_cut
from twrouter.router import solve_edp, solve_ndp, theorem_bound
from twrouter.wl import verify_wl_certificate, wl_decompose

import oracles
from conftest import check_stage_chain, random_rounding_input, spoke_rounding_input

EPS = 1e-7


def report(n, ok, detail=""):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, detail


def independent_ells(inst, d, f, r):
    l1 = l2 = 0
    for sub, sd, sf in preprocess(inst, d, f):
        if sf.value > EPS:
            a, b = oracles.ell_pair(sf, sd, r, sub)
            l1, l2 = max(l1, a), max(l2, b)
    return l1, l2


def test_criterion_1_grid_gap(tmp_path, capsys):
    t0 = time.perf_counter()
    for k in (2, 3, 4):
        inst = gen_grid_gap(k)
        lp = solve_relaxation(inst).objective
        assert lp >= k / 2 - 1e-6
        assert exact(inst, max_vertices=40)[0] == 1
        write_instance(inst, tmp_path / f"g{k}.json")
        assert main(["solve-edp", "--graph", str(tmp_path / f"g{k}.json"), "--json"]) == 0
        assert json.loads(capsys.readouterr().out)[0]["routed"] >= 1
    dt = time.perf_counter() - t0
    report(1, dt < 30, f"{dt:.1f}s")


def test_criterion_2_edp_bound():
    t0 = time.perf_counter()
    for seed in range(30):
        rng = random.Random(seed)
        inst, d = gen_partial_ktree(rng.randint(15, 60), rng.randint(1, 3), rng.randint(2, 10), seed)
        assert inst.graph.n <= 60 and inst.k <= 10 and inst.is_matching()
        r = validate(d, inst.graph) + 1
        assert r <= 4
        _, f = fractional_solution(inst)
        routing, rep = solve_edp(inst, d, f, r)
        l1, l2 = independent_ells(inst, d, f, r)
        assert (l1, l2) == (rep.l1, rep.l2)
        assert routing.size >= theorem_bound(f.value, r, l1, l2, 144) - EPS
        assert not oracles.routing_problems(routing, inst)
    dt = time.perf_counter() - t0
    report(2, dt < 120, f"{dt:.1f}s")


def test_criterion_3_ndp_bound():
    t0 = time.perf_counter()
    for seed in range(20):
        rng = random.Random(seed)
        k = rng.randint(2, 8)
        inst, d = gen_pathwidth_ndp(rng.randint(10, 50 - 2 * k), 2, k, seed, caterpillar=seed % 2 == 0)
        assert inst.graph.n <= 50 and inst.k <= 8 and d.is_path
        routing, rep = solve_ndp(inst, d)
        assert rep.r <= 4
        assert rep.constant == 4 * 60 * (2 * rep.d_max - 1)
        assert routing.size >= theorem_bound(rep.flow, rep.r, rep.l1, rep.l2, rep.constant) - EPS
        assert not oracles.routing_problems(routing, inst)
        assert routing.size <= exact(inst, max_vertices=50)[0]
    dt = time.perf_counter() - t0
    report(3, dt < 120, f"{dt:.1f}s")


def test_criterion_4_rounding_chain():
    branches = set()
    for seed in range(20):
        # half general inputs (local branch), half spokes (mostly distant branch)
        inst, f, g, S, alpha = (random_rounding_input if seed % 2 else spoke_rounding_input)(seed)
        if f.value <= 0:
            inst, f, g, S, alpha = spoke_rounding_input(1000 + seed)
        tr = route_via_small_cut(inst, f, g, S, alpha).trace
        check_stage_chain(tr)
        if tr.m1:
            assert tr.m2 * tr.d * tr.d >= tr.m1
        if tr.branch == "distant":
            assert 5 * tr.routed_pipeline >= tr.m2
        branches.add(tr.branch)
    report(4, branches == {"local", "distant"}, f"branches={sorted(branches)}")


def test_criterion_5_violating_sets():
    checked = 0
    for seed in range(25):
        for mode in (Mode.EDP, Mode.NDP):
            inst, d, f = gen_unsafe_blob(seed, mode=mode, path=mode is Mode.NDP)
            r = validate(d, inst.graph) + 1
            for sub, sd, sf in preprocess(inst, d, f):
                if sf.value <= EPS:
                    continue
                gamma, sigma = oracles.cones(sd.parent, sd.bags)
                x = oracles.marginals(sf)
                _, _, unsafe, _ = ell_values(sf, sd, r, sub)
                for t in unsafe:
                    if sd.parent[t] is None:
                        continue
                    U = extract_violating_set(t, sf, sd, r, sub)
                    assert check_violating_set(U, t, sf, sd, r, sub)[0]
                    assert U and U <= gamma[t] - sigma[t]
                    xu = sum(x.get(v, 0.0) for v in U)
                    assert oracles.boundary(sub, U) < xu / (4 * r)
                    for s in sd.bags:
                        if sd.parent[s] is not None and sigma[s] and sigma[s] <= U:
                            assert gamma[s] <= U
                    checked += 1
    report(5, checked >= 50, f"{checked} sets over 50 configurations")


def test_criterion_6_wl_decomposition():
    for seed in range(20):
        if seed < 14:
            inst, d = gen_partial_ktree(random.Random(seed).randint(12, 40), 2, 6, seed)
            _, f = fractional_solution(inst)
        else:
            inst, d, f = gen_unsafe_blob(seed)
        r = validate(d, inst.graph) + 1
        comps, rep = wl_decompose(inst, d, f, r)
        l1, l2 = independent_ells(inst, d, f, r)
        bound = f.value * (1 - 1 / r) ** (l1 + l2) / (12 * r**3)
        assert sum(sum(c.pi.values()) for c in comps) >= bound - EPS
        seen = set()
        for c in comps:
            assert verify_wl_certificate(c)
            assert not (seen & c.graph.vertices)
            seen |= c.graph.vertices
    report(6, True, "20 instances")


def test_criterion_7_hardness():
    t0 = time.perf_counter()
    classes = [[0, 1], [2, 3], [4, 5]]
    background = [(0, 3), (2, 5)]
    triangle = [(1, 3), (3, 5), (1, 5)]
    for mask in range(8):
        mcc = MCCInstance(3, classes, background + [e for b, e in enumerate(triangle) if mask >> b & 1])
        assert (has_multicolored_clique(mcc) is not None) == (mask == 7)
        assert verify_equivalence(mcc)
        out = build_gadget(mcc)
        k, n = 3, 2
        assert out.instance.graph.n == k * (n * (k - 1) + 2 * (n - 1)) + math.comb(k, 2) == 21
        assert out.ell == k * (n - 1) + math.comb(k, 2) == 6
        assert treedepth_witness(out)[0] <= math.comb(k, 2) + k + 3
        assert not check_structure(out)
    dt = time.perf_counter() - t0
    report(7, dt < 60, f"{dt:.1f}s")


def test_criterion_8_monotonicity():
    triples = 0
    rng = random.Random(8)
    while triples < 200:
        seed = rng.randrange(10**6)
        mode = rng.choice([Mode.EDP, Mode.NDP])
        n = rng.randint(6, 14)
        inst, d = random_instance_with_decomposition(n, n + rng.randint(0, 8), rng.randint(2, 5), seed, mode=mode)
        _, f = fractional_solution(inst)
        if not f:
            continue
        r = validate(d, inst.graph) + 1
        gamma, sigma = oracles.cones(d.parent, d.bags)
        t = rng.choice(sorted(d.bags))
        keep = [e for e in f.entries if rng.random() < 0.6]
        sub = PathFlow(keep)
        for h in (f, sub):
            assert is_good(t, h, d) == bool(oracles.good(t, h, gamma, sigma))
            assert is_safe(t, h, d, r, inst).safe == oracles.safe(t, h, gamma, sigma, inst, r)
        if is_good(t, f, d):
            assert is_good(t, sub, d)
        if is_safe(t, f, d, r, inst).safe:
            assert is_safe(t, sub, d, r, inst).safe
        triples += 1
    report(8, triples == 200, f"{triples} triples")


def _sandwich_instances():
    for k in (1, 2, 3):
        inst = gen_grid_gap(k)
        yield inst, heuristic_decomposition(inst.graph)
    for seed in range(10):
        yield gen_partial_ktree(random.Random(seed).randint(8, 24), 2, 5, seed)
        yield gen_pathwidth_ndp(random.Random(seed).randint(6, 16), 2, 4, seed, caterpillar=seed % 2 == 0)
    for seed in range(4):
        inst, d, _ = gen_unsafe_blob(seed, n_base=8)
        yield inst, d


def test_criterion_9_oracle_sandwich():
    count = 0
    for inst, d in _sandwich_instances():
        solver = solve_ndp if inst.mode is Mode.NDP else solve_edp
        routing, rep = solver(inst, d)
        opt, _ = exact(inst, max_vertices=40)
        assert routing.size <= opt <= math.ceil(rep.lp - 1e-6)
        count += 1
    report(9, count > 0, f"{count} instances")
