"""Well-linked decomposition on tree decompositions (edge mode)."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import _config
from .decomp import RootedDecomposition, preprocess, validate
from .flowkit import ContractError, ell_values, extract_violating_set, inside_flow, is_safe, prefix_to_set
from .graph import CapGraph, InputError, Instance, Mode, ekey, induced_subgraph
from .lp import fractional_solution
from .pathflow import PathFlow, shortcut


@dataclass
class WLComponent:
    """One part of the decomposition with its single-sink certificate flow."""

    graph: CapGraph
    pi: dict
    z: int
    certificate: PathFlow
    pairs: dict

    @property
    def terminals(self) -> frozenset:
        return frozenset(v for st in self.pairs.values() for v in st)

    @property
    def weight(self) -> float:
        return sum(self.pi.get(v, 0.0) for v in self.terminals)

    def to_dict(self) -> dict:
        return {
            "vertices": sorted(self.graph.vertices),
            "edges": [[u, v, c] for (u, v), c in self.graph.edges.items()],
            "z": self.z,
            "pairs": {str(p): list(st) for p, st in sorted(self.pairs.items())},
            "pi": {str(v): w for v, w in sorted(self.pi.items())},
            "certificate": self.certificate.to_dict(),
        }


@dataclass
class CertificateCheck:
    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def verify_wl_certificate(c: WLComponent, eps: float | None = None) -> CertificateCheck:
    """Structural check: feasible certificate into one vertex with marginals equal to pi."""
    eps = _config.EPS if eps is None else eps
    bad = []
    g = c.graph
    if c.z not in g.vertices:
        bad.append(("sink outside component", c.z))
    for e in c.certificate.entries:
        if e.path[-1] != c.z:
            bad.append(("path does not end at the sink", e.path))
        if any(v not in g.vertices for v in e.path):
            bad.append(("path leaves the component", e.path))
    bad += [("capacity", *v) for v in c.certificate.violations(g, Mode.EDP, eps)]
    sent = defaultdict(float)
    for e in c.certificate.entries:
        sent[e.path[0]] += e.weight
    for v in c.terminals | set(sent):
        want = c.pi.get(v, 0.0) if v in c.terminals else 0.0
        if not _config.close(sent.get(v, 0.0), want, eps):
            bad.append(("marginal differs from weight", v, sent.get(v, 0.0), want))
    for p, (s, t) in c.pairs.items():
        if s not in g.vertices or t not in g.vertices:
            bad.append(("pair outside component", p))
        elif not _config.close(c.pi.get(s, 0.0), c.pi.get(t, 0.0), eps):
            bad.append(("unequal pair weights", p, c.pi.get(s, 0.0), c.pi.get(t, 0.0)))
    return CertificateCheck(not bad, bad)


def product_demand_ratio(c: WLComponent) -> float:
    """Largest lambda such that lambda * pi(u)pi(v)/pi(X) is concurrently routable (slow LP).

    Independent cross-check of well-linkedness for tiny components; the
    single-sink certificate implies a ratio of at least 1/2.
    """
    X = sorted(v for v in c.terminals if c.pi.get(v, 0.0) > 0)
    total = sum(c.pi[v] for v in X)
    demands = [(u, v, c.pi[u] * c.pi[v] / total) for i, u in enumerate(X) for v in X[i + 1 :]]
    if not demands:
        return float("inf")
    verts = sorted(c.graph.vertices)
    arcs = [(u, v) for (u, v) in c.graph.edges] + [(v, u) for (u, v) in c.graph.edges]
    na, nk = len(arcs), len(demands)
    nvar = na * nk + 1
    lam = na * nk
    A_eq, b_eq = [], []
    for k, (s, t, dem) in enumerate(demands):
        for v in verts:
            row = np.zeros(nvar)
            for a, (x, y) in enumerate(arcs):
                if x == v:
                    row[k * na + a] += 1
                if y == v:
                    row[k * na + a] -= 1
            if v == s:
                row[lam] = -dem
            elif v == t:
                row[lam] = dem
            A_eq.append(row)
            b_eq.append(0.0)
    A_ub, b_ub = [], []
    for (u, v), cap in c.graph.edges.items():
        row = np.zeros(nvar)
        for a, arc in enumerate(arcs):
            if ekey(*arc) == (u, v):
                row[a : na * nk : na] = 1
        A_ub.append(row)
        b_ub.append(cap)
    obj = np.zeros(nvar)
    obj[lam] = -1
    res = linprog(obj, A_ub=np.array(A_ub), b_ub=b_ub, A_eq=np.array(A_eq), b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise ArithmeticError(res.message)
    return float(res.x[lam])


# ---------------------------------------------------------------- nice flows


def nice_flow(pairs: dict, f: PathFlow, g: PathFlow, c: float, sigma, *, check: bool = True) -> tuple[int, PathFlow]:
    """Balance a flow ``g`` into the adhesion ``sigma`` into a flow to one vertex z.

    ``f`` routes the pairs (commodity = pair id), ``g`` has one path per
    terminal start (its first vertex) ending on ``sigma`` and delivers at least
    x(v)/c from every terminal v.  Returns ``(z, h)`` with equal h-marginals
    across every pair and |h| >= |f| / (3 c |sigma|), where |h| sums the
    marginals of both endpoints.
    """
    sigma = frozenset(sigma)
    x = f.marginals
    if f.value <= 0:
        return (min(sigma) if sigma else None), PathFlow()
    terminals = {v for st in pairs.values() for v in st}
    # keep exactly x(v)/c of g per terminal
    out_of = defaultdict(float)
    for e in g.entries:
        out_of[e.path[0]] += e.weight
    trimmed = []
    for e in g.entries:
        v = e.path[0]
        if v not in terminals or x.get(v, 0.0) <= 0:
            continue
        want = x[v] / c
        if out_of[v] < want * (1 - 1e-9):
            raise ContractError(f"g delivers {out_of[v]} < x/c = {want} from {v}")
        trimmed.append((v, e.path, e.weight * want / out_of[v]))
    g = PathFlow(trimmed)
    into = defaultdict(float)
    for e in g.entries:
        into[e.path[-1]] += e.weight
    z = min(into, key=lambda v: (-into[v], v))
    gz = g.restrict(lambda e: e.path[-1] == z)
    xz = defaultdict(float)
    for e in gz.entries:
        xz[e.path[0]] += e.weight
    entries = []
    for p, (s, t) in sorted(pairs.items()):
        a, b = xz.get(s, 0.0), xz.get(t, 0.0)
        top = max(a, b)
        if top <= 0:
            continue
        for v in (s, t):
            entries += [(p, e.path, e.weight) for e in gz.entries if e.path[0] == v]
        lo, hi = (s, t) if a < b else (t, s)
        gap = abs(a - b)
        if gap <= 0:
            continue
        fp = [e for e in f.entries if e.commodity == p]
        fval = sum(e.weight for e in fp)
        ghi = [e for e in gz.entries if e.path[0] == hi]
        for fe in fp:
            leg = fe.path if fe.path[0] == lo else fe.path[::-1]
            for ge in ghi:
                w = gap * (fe.weight / fval) * (ge.weight / top)
                entries.append((p, shortcut(leg + ge.path[1:]), w))
    h = PathFlow(entries).scale(1 / 3)
    if check:
        lo_bound = f.value / (3 * c * max(1, len(sigma)))
        hval = sum(e.weight for e in h.entries)
        if hval + _config.EPS * max(1.0, f.value) < lo_bound:
            raise AssertionError(f"nice flow {hval} below {lo_bound}")
    return z, h


def _component(graph, pairs, z, h) -> WLComponent:
    pi = defaultdict(float)
    for e in h.entries:
        pi[e.path[0]] += e.weight
    inside = {p: st for p, st in pairs.items() if st[0] in graph.vertices and st[1] in graph.vertices}
    terms = {v for st in inside.values() for v in st}
    pi = {v: pi.get(v, 0.0) for v in sorted(terms)}
    return WLComponent(graph, pi, z, h, inside)


# ---------------------------------------------------------------- recursion


@dataclass
class WLReport:
    flow: float = 0.0
    r: int = 0
    l1: int = 0
    l2: int = 0
    weight: float = 0.0
    bound: float = 0.0
    steps: list = field(default_factory=list)


class _WL:
    def __init__(self, r):
        self.r = r
        self.steps = []

    def solve(self, inst, d, f, depth=0):
        out = []
        if f.value <= _config.EPS:
            return out
        for sub, sd, sf in preprocess(inst, d, f):
            if sf.value > _config.EPS:
                out += self.solve_connected(sub, sd, sf, depth)
        return out

    def solve_connected(self, inst, d, f, depth):
        r = self.r
        l1, l2, unsafe, bad = ell_values(f, d, r, inst)
        if l2 == 0:
            S = d.bags[d.root]
            g = prefix_to_set(f, S)
            z, h = nice_flow(inst.pairs, f, g, 1.0, S)
            self.steps.append({"depth": depth, "case": "base", "flow": f.value})
            return [_component(inst.graph, inst.pairs, z, h)]
        if l1 < l2:
            return self.step_unequal(inst, d, f, l2, bad, depth)
        return self.step_equal(inst, d, f, l1, unsafe, depth)

    def step_unequal(self, inst, d, f, l2, bad, depth):
        bad_set = set(bad)
        tops = []
        stack = [d.root]
        while stack:
            t = stack.pop()
            if d.parent[t] is not None and t in bad_set and len(d.sigma[t]) == l2:
                tops.append(t)
                continue
            stack.extend(reversed(d.children[t]))
        groups = defaultdict(list)
        removed = PathFlow()
        total = 0.0
        for t in sorted(tops):
            fin = inside_flow(t, f, d)
            if fin.value <= 0:
                continue
            rep = is_safe(t, f, d, self.r, inst)
            if not rep.safe:
                raise ContractError(f"topmost bad node {t} is unsafe although l1 < l2")
            pairs = {p: inst.pairs[p] for p in fin.commodity_values}
            z, h = nice_flow(pairs, fin, rep.witness, 4 * self.r, d.sigma[t])
            groups[z].append((t, h))
            removed = removed + fin
            total += fin.value
        self.steps.append({"depth": depth, "case": "unequal", "l2": l2, "tops": len(tops), "inside": total})
        if total > f.value / self.r:
            out = []
            for z, items in sorted(groups.items()):
                verts = {z}
                for t, _ in items:
                    verts |= d.alpha[t]
                h = PathFlow([e for _, hh in items for e in hh.entries])
                out.append(_component(induced_subgraph(inst.graph, verts), inst.pairs, z, h))
            return out
        return self.solve(inst, d, f.subtract(removed), depth + 1)

    def step_equal(self, inst, d, f, l1, unsafe, depth):
        cands = [t for t in unsafe if d.parent[t] is not None and len(d.sigma[t]) == l1]
        t0 = min(cands, key=lambda t: (-d.depth[t], t))
        U = extract_violating_set(t0, f, d, self.r, inst)
        out = []
        self.steps.append({"depth": depth, "case": "equal", "node": t0, "U": len(U)})
        for Vi in (U, inst.graph.vertices - U):
            gi = induced_subgraph(inst.graph, Vi)
            out += self.solve(inst.restricted(gi), d.restricted(Vi), f.restrict_to_vertices(Vi), depth + 1)
        return out


def wl_decompose(instance: Instance, d: RootedDecomposition, f: PathFlow | None = None, r: int | None = None, *, lp_method: str = "highs", check_bound: bool = True):
    """Partition into node-disjoint components with single-sink certificates.

    Returns ``(components, WLReport)``.  The pairs must form a matching.
    """
    if instance.mode is not Mode.EDP:
        raise InputError("the well-linked decomposition works in edge mode")
    if not instance.is_matching():
        raise InputError("the well-linked decomposition needs the pairs to form a matching")
    width = validate(d, instance.graph)
    r = max(r or 0, width + 1)
    if f is None:
        _, f = fractional_solution(instance, lp_method)
    l1 = l2 = 0
    for sub, sd, sf in preprocess(instance, d, f):
        if sf.value > _config.EPS:
            a, b, _, _ = ell_values(sf, sd, r, sub)
            l1, l2 = max(l1, a), max(l2, b)
    run = _WL(r)
    comps = run.solve(instance, d, f)
    rep = WLReport(flow=f.value, r=r, l1=l1, l2=l2, steps=run.steps)
    rep.weight = sum(c.weight for c in comps)
    rep.bound = f.value * (1 - 1 / r) ** (l1 + l2) / (12 * r**3)
    seen = set()
    for c in comps:
        if seen & c.graph.vertices:
            raise AssertionError("components overlap")
        seen |= c.graph.vertices
        chk = verify_wl_certificate(c)
        if not chk:
            raise AssertionError(f"certificate check failed: {chk.violations[:3]}")
    if check_bound and rep.weight + _config.EPS * max(1.0, f.value) < rep.bound:
        raise AssertionError(f"total weight {rep.weight} below {rep.bound}")
    return comps, rep
