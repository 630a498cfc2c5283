"""Good and safe decomposition nodes, witness flows, and violating-set extraction."""

from __future__ import annotations

from dataclasses import dataclass

from . import _config
from .decomp import RootedDecomposition, subgraph_at
from .graph import CapGraph, Instance, Mode, edge_boundary, vertex_boundary
from .maxflow import (
    INF,
    CutCertificate,
    FlowNetwork,
    decompose_arc_flow,
    max_flow_min_cut,
    node_capacitated_reduce,
    project_split_path,
)
from .pathflow import FlowError, PathFlow

SRC = "s*"
SNK = "t*"


class ContractError(AssertionError):
    """An operation was called outside its precondition."""


def is_good(t: int, f: PathFlow, d: RootedDecomposition) -> bool:
    """No support path of f lies entirely inside alpha(t)."""
    a = d.alpha[t]
    if not a:
        return True
    return not any(all(v in a for v in e.path) for e in f.entries)


def inside_flow(t: int, f: PathFlow, d: RootedDecomposition) -> PathFlow:
    """The subflow of paths contained in G[alpha(t)]."""
    a = d.alpha[t]
    return f.restrict(lambda e: all(v in a for v in e.path))


def prefix_truncate(f: PathFlow, t: int, d: RootedDecomposition) -> PathFlow:
    """Shortest prefix into sigma(t) of every path, from each endpoint lying in gamma(t).

    The commodity of each output path is its start vertex.
    """
    return _prefixes(f, d.gamma[t], d.sigma[t] if d.parent[t] is not None else None)


def prefix_to_set(f: PathFlow, target) -> PathFlow:
    """Shortest prefix into ``target`` from both endpoints of every path."""
    return _prefixes(f, None, frozenset(target))


def _prefixes(f, within, target):
    out = []
    for e in f.entries:
        for path in (e.path, e.path[::-1]):
            if within is not None and path[0] not in within:
                continue
            if target is None:
                raise ContractError("the root adhesion is empty")
            cut = next((i for i, v in enumerate(path) if v in target), None)
            if cut is None:
                raise ContractError(f"path {e.path} avoids the target set")
            out.append((path[0], path[: cut + 1], e.weight))
    return PathFlow(out)


@dataclass
class SafetyReport:
    safe: bool
    demand: float
    value: float
    witness: PathFlow | None
    network: FlowNetwork | None = None
    cut: CutCertificate | None = None


def _network(instance: Instance, d: RootedDecomposition, t: int, x: dict, r: int):
    gt = subgraph_at(d, instance.graph, t)
    sigma = d.sigma[t]
    demand = 0.0
    if instance.mode is Mode.EDP:
        net = FlowNetwork()
        net.node(SRC)
        for v in sorted(gt.vertices):
            net.node(v)
        for (u, v), c in gt.edges.items():
            net.add_arc(u, v, c)
            net.add_arc(v, u, c)
        for v in sorted(gt.vertices):
            if x.get(v, 0) > 0:
                net.add_arc(SRC, v, x[v] / (4 * r))
                demand += x[v] / (4 * r)
        for v in sorted(sigma):
            net.add_arc(v, SNK, INF)
    else:
        net = FlowNetwork()
        net.node(SRC)
        sub = node_capacitated_reduce(gt)
        for aid, u, v, c in sub.arcs():
            net.add_arc(u, v, c)
        for v in sorted(gt.vertices):
            if x.get(v, 0) > 0:
                net.add_arc(SRC, (v, 0), x[v] / (4 * r))
                demand += x[v] / (4 * r)
        for v in sorted(sigma):
            net.add_arc((v, 1), SNK, INF)
    net.node(SNK)
    return net, demand


def is_safe(t: int, f: PathFlow, d: RootedDecomposition, r: int, instance: Instance, *, shortcut_good: bool = True) -> SafetyReport:
    """Decide whether gamma(t) can send x(z)/4r from every z to sigma(t) inside G(t).

    Good nodes are answered with the scaled prefix witness without a max-flow
    (pass ``shortcut_good=False`` to force the flow computation).
    """
    x = f.marginals
    demand = sum(x.get(v, 0.0) for v in d.gamma[t]) / (4 * r)
    if demand <= 0:
        return SafetyReport(True, 0.0, 0.0, PathFlow())
    if d.parent[t] is None:
        return SafetyReport(False, demand, 0.0, None)
    if shortcut_good and is_good(t, f, d):
        return SafetyReport(True, demand, demand, prefix_truncate(f, t, d).scale(1.0 / (4 * r)))
    net, demand = _network(instance, d, t, x, r)
    value, cut = max_flow_min_cut(net, SRC, SNK)
    if not _config.close(value, demand) and value < demand:
        return SafetyReport(False, demand, value, None, net, cut)
    return SafetyReport(True, demand, value, _witness(net, instance.mode, d.sigma[t]), net, cut)


def _witness(net: FlowNetwork, mode: Mode, sigma) -> PathFlow:
    entries = []
    for path, w in decompose_arc_flow(net.arc_flows(), SRC, SNK):
        inner = path[1:-1]
        if mode is Mode.NDP:
            inner = project_split_path(inner)
        cut = next(i for i, v in enumerate(inner) if v in sigma)
        entries.append((inner[0], tuple(inner[: cut + 1]), w))
    return PathFlow(entries)


def extract_violating_set(t: int, f: PathFlow, d: RootedDecomposition, r: int, instance: Instance) -> frozenset:
    """A nonempty U inside alpha(t) with a small boundary that is closed under adhesions.

    U is the source side of the source-minimal minimum cut in the safety
    network, then closed under "sigma(s) inside U implies gamma(s) inside U";
    both properties are re-verified before returning.  In node mode the
    terminals must be leaves outside every adhesion (as the router arranges);
    a terminal cut out of the network would otherwise only give equality.
    """
    rep = is_safe(t, f, d, r, instance, shortcut_good=False)
    if rep.safe:
        raise ContractError(f"node {t} is safe")
    if rep.network is None:
        raise ContractError(f"node {t} is the root; no violating set below it")
    side = rep.cut.side
    if instance.mode is Mode.EDP:
        U = {v for v in side if v != SRC}
    else:
        U = {v for (v, k) in (n for n in side if n != SRC) if k == 0 and (v, 1) in side}
    changed = True
    while changed:
        changed = False
        for s in d.bags:
            if d.parent[s] is not None and d.sigma[s] and d.sigma[s] <= U and not d.gamma[s] <= U:
                U |= d.gamma[s]
                changed = True
    U = frozenset(U)
    ok, why = check_violating_set(U, t, f, d, r, instance)
    if not ok:
        raise ContractError(f"violating set check failed: {why}")
    return U


def boundary_capacity(instance: Instance, U) -> float:
    g = instance.graph
    if instance.mode is Mode.EDP:
        return float(sum(g.edges[e] for e in edge_boundary(g, U)))
    return float(sum(g.vcap(v) for v in vertex_boundary(g, U)))


def check_violating_set(U, t, f, d, r, instance, eps=None):
    """Direct re-verification of both violating-set properties; returns (ok, reason)."""
    if not U:
        return False, "empty set"
    if not U <= d.alpha[t]:
        return False, "U leaves alpha(t)"
    x = f.marginals
    xu = sum(x.get(v, 0.0) for v in U)
    cap = boundary_capacity(instance, U)
    if not cap < xu / (4 * r):
        return False, f"boundary {cap} not below x(U)/4r = {xu / (4 * r)}"
    for s in d.bags:
        if d.parent[s] is not None and d.sigma[s] and d.sigma[s] <= U and not d.gamma[s] <= U:
            return False, f"closure fails at node {s}"
    return True, ""


def ell_values(f: PathFlow, d: RootedDecomposition, r: int, instance: Instance):
    """(l1, l2, unsafe nodes, bad nodes): largest parent adhesion of an unsafe / bad node."""
    bad = [t for t in d.preorder if not is_good(t, f, d)]
    unsafe = [t for t in bad if not is_safe(t, f, d, r, instance).safe]
    l1 = max((len(d.sigma[t]) for t in unsafe), default=0)
    l2 = max((len(d.sigma[t]) for t in bad), default=0)
    return l1, l2, unsafe, bad
