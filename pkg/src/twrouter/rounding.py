"""Rounding a fractional routing that can reach a small vertex set S.

Given a feasible flow ``f`` and a second flow ``g`` sending x(v)/alpha from every
terminal to S, the pipeline below produces an integral routing of size at
least |f| / (C * alpha * |S|) where C = 60 * (2d - 1) and d is the realized
cluster size (logged in the trace).

Everything runs in a node-capacitated working graph H in which each terminal
sits on its own degree-1, capacity-1 leaf.  Edge-capacitated inputs are first
subdivided: every edge becomes a vertex carrying the edge's capacity.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field

from . import _config
from .graph import CapGraph, Instance, InputError, Mode, ekey
from .maxflow import INF, FlowNetwork, decompose_arc_flow, node_capacitated_reduce, project_split_path
from .pathflow import FlowError, PathFlow, shortcut
from .routing import Routing, assert_feasible, augment_greedily

log = logging.getLogger(__name__)

SRC = "s*"


class RoundingError(RuntimeError):
    """A stage guarantee failed; carries the trace collected so far."""

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace


@dataclass
class Workspace:
    """The working graph H and the flows expressed on it."""

    H: CapGraph
    pairs: dict  # pid -> (leaf_s, leaf_t) in H
    f: PathFlow  # commodity = pid
    g: PathFlow  # commodity = source leaf
    S: frozenset
    alpha: float
    original: dict  # H vertex -> original vertex (identity on original vertices)

    def terminal_of(self):
        out = {}
        for p, (s, t) in self.pairs.items():
            out[s] = (p, 0)
            out[t] = (p, 1)
        return out


@dataclass
class Trace:
    flow: float = 0.0
    alpha: float = 1.0
    S: int = 0
    f1: float = 0.0
    f2: float = 0.0
    u: object = None
    g2: float = 0.0
    hs_ht: float = 0.0
    rounding_steps: int = 0
    fallbacks: int = 0
    m1: int = 0  # |M'|
    d: int = 0
    m2: int = 0  # |M''|
    local: int = 0
    distant: int = 0
    branch: str = ""
    g4: float = 0.0
    g5: float = 0.0
    routed_local: int = 0
    routed_distant: int = 0
    routed_pipeline: int = 0
    routed: int = 0
    constant: float = 0.0
    notes: list = field(default_factory=list)

    def as_dict(self):
        return dict(self.__dict__)


@dataclass
class RoundingResult:
    routing: Routing
    trace: Trace

    @property
    def constant(self):
        return self.trace.constant


# ------------------------------------------------------------------ set-up


def _oriented(path, s):
    return path if path[0] == s else path[::-1]


def build_workspace(instance: Instance, f: PathFlow, g: PathFlow, S, alpha: float) -> Workspace:
    """Subdivide (edge mode), attach terminal leaves, and trim g to exactly x(v)/alpha."""
    G = instance.graph
    S = frozenset(S)
    if not S <= G.vertices:
        raise InputError("S must be a set of graph vertices")
    pairs_used = {p: instance.pairs[p] for p in f.commodity_values}
    seen = set()
    for s, t in pairs_used.values():
        if s in seen or t in seen:
            raise InputError("pairs carrying flow must form a matching")
        seen.update((s, t))
    nxt = max(G.vertices, default=-1) + 1
    original = {v: v for v in G.vertices}
    node_caps: dict[int, int] = {}
    edges: list[tuple[int, int]] = []
    sub: dict[tuple[int, int], int] = {}
    if instance.mode is Mode.EDP:
        big = 2 * max(1, len(instance.pairs))
        for v in G.vertices:
            node_caps[v] = big
        for (a, b), c in G.edges.items():
            w = nxt
            nxt += 1
            sub[(a, b)] = w
            node_caps[w] = c
            original[w] = None
            edges += [(a, w), (w, b)]
    else:
        node_caps.update(G.node_caps)
        edges = list(G.edges)

    def lift(path):
        if not sub:
            return tuple(path)
        out = [path[0]]
        for a, b in zip(path, path[1:]):
            out += [sub[ekey(a, b)], b]
        return tuple(out)

    leaf = {}
    ws_pairs = {}
    for p, (s, t) in sorted(pairs_used.items()):
        for v in (s, t):
            leaf[v] = nxt
            node_caps[nxt] = 1
            original[nxt] = None
            edges.append((nxt, v))
            nxt += 1
        ws_pairs[p] = (leaf[s], leaf[t])
    H = CapGraph.build(node_caps.keys(), edges, node_caps)

    f_entries = []
    for c, path, w in f.entries:
        s, t = pairs_used[c]
        path = _oriented(path, s)
        if path[-1] != t:
            raise FlowError(f"path of pair {c} does not join its terminals")
        f_entries.append((c, (leaf[s],) + lift(path) + (leaf[t],), w))
    fH = PathFlow(f_entries)

    x = f.marginals
    by_src = defaultdict(list)
    for c, path, w in g.entries:
        if path[-1] not in S and path[0] in S:
            path = path[::-1]
        if path[-1] not in S:
            raise FlowError(f"g path {path} does not end in S")
        if path[0] in leaf:
            by_src[path[0]].append((path, w))
    g_entries = []
    for v in leaf:
        want = x.get(v, 0.0) / alpha
        have = sum(w for _, w in by_src[v])
        if want <= 0:
            continue
        if have < want and not _config.close(have, want):
            raise RoundingError(f"g delivers {have} from {v}, below x(v)/alpha = {want}")
        scale = min(1.0, want / have)
        for path, w in by_src[v]:
            g_entries.append((leaf[v], (leaf[v],) + lift(path), w * scale))
    gH = PathFlow(g_entries)
    return Workspace(H, ws_pairs, fH, gH, S, float(alpha), original)


# ------------------------------------------------------------------ stages


def symmetrize(ws: Workspace):
    """(f1, g1): g1 = g/3 with each s-side rerouted along f/(3 alpha) to t and on along t's g-paths."""
    f1 = ws.f.scale(1.0 / 3.0)
    g_by_src = defaultdict(list)
    for c, path, w in ws.g.entries:
        g_by_src[c].append((path, w))
    f_by_pair = defaultdict(list)
    for c, path, w in ws.f.entries:
        f_by_pair[c].append((path, w))
    xp = ws.f.commodity_values
    entries = []
    for p, (s, t) in sorted(ws.pairs.items()):
        if xp.get(p, 0) <= 0:
            continue
        for path, w in g_by_src[t]:
            entries.append((t, path, w / 3.0))
        for P, wp in f_by_pair[p]:
            for Q, wq in g_by_src[t]:
                walk = shortcut(P + Q[1:])
                entries.append((s, walk, wp * wq / (3.0 * xp[p])))
    return f1, PathFlow(entries)


def restrict_to_best_vertex(ws: Workspace, f1: PathFlow, g1: PathFlow):
    """(f2, g2, u): keep the g1-paths ending at the best S vertex; shrink f1 to match."""
    recv = defaultdict(float)
    for _, path, w in g1.entries:
        recv[path[-1]] += w
    if not recv:
        return PathFlow(), PathFlow(), None
    u = min(recv, key=lambda v: (-recv[v], v))
    g2 = g1.restrict(lambda e: e.path[-1] == u)
    src = g2.sources
    entries = []
    factors = {}
    for p, (s, t) in ws.pairs.items():
        a = min(src.get(s, 0.0), src.get(t, 0.0))
        if a <= 0:
            continue
        factors[s] = a / src[s]
        factors[t] = a / src[t]
    g2 = g2.scale_commodities(factors)
    f1v = f1.commodity_values
    pf = {}
    for p, (s, t) in ws.pairs.items():
        if s in factors and f1v.get(p, 0) > 0:
            pf[p] = min(1.0, ws.alpha * g2.sources.get(s, 0.0) / f1v[p])
    f2 = f1.scale_commodities(pf)
    return f2, g2, u


def _is_int(z):
    return abs(z - round(z)) <= 1e-9


def _single_sink_values(ws: Workspace, u, fixed: dict, free: dict):
    """Max-flow into u; ``fixed`` sources are routed first, then ``free`` ones are added.

    Returns (per-source values, network).  The second phase warm-starts from
    the first, so fixed sources keep their flow.
    """
    net = node_capacitated_reduce(ws.H)
    arcs = {}
    for v, c in fixed.items():
        arcs[v] = net.add_arc(SRC, (v, 0), c)
    net.max_flow(SRC, (u, 1))
    for v, c in free.items():
        arcs[v] = net.add_arc(SRC, (v, 0), c)
    net.max_flow(SRC, (u, 1))
    return {v: net.flow[a] for v, a in arcs.items()}, net


def _round_side(ws: Workspace, u, z: dict, v0):
    """One application of the single-source rounding lemma to the flow with source values z."""
    fixed = {v: round(val) for v, val in z.items() if _is_int(val) and round(val) > 0}
    free = {v: val for v, val in z.items() if not _is_int(val) and v != v0}
    fixed_a = dict(fixed)
    fixed_a[v0] = math.ceil(z[v0])
    vals, _ = _single_sink_values(ws, u, fixed_a, free)
    fell_short = any(vals.get(v, 0.0) < c - 1e-9 for v, c in fixed_a.items())
    if fell_short:
        fixed_b = dict(fixed)
        vals, _ = _single_sink_values(ws, u, fixed_b, free)
        vals[v0] = 0.0
        if any(vals.get(v, 0.0) < c - 1e-9 for v, c in fixed_b.items()):
            raise RoundingError("integral sources could not be re-routed")
    out = {}
    for v in z:
        val = vals.get(v, 0.0)
        out[v] = float(round(val)) if _is_int(val) else val
    return out, fell_short


def half_integral_round(ws: Workspace, g2: PathFlow, u, trace: Trace | None = None):
    """Round g2 = h_s + h_t to integral single-sink flows (h_s°, h_t°) with equal per-pair values."""
    zs, zt = {}, {}
    src = g2.sources
    for p, (s, t) in sorted(ws.pairs.items()):
        a = min(src.get(s, 0.0), src.get(t, 0.0))
        zs[s] = a
        zt[t] = a
    steps = fallbacks = 0
    while True:
        pending = [p for p, (s, t) in sorted(ws.pairs.items()) if not _is_int(zs[s])]
        if not pending:
            break
        p = pending[0]
        s, t = ws.pairs[p]
        zs, fs = _round_side(ws, u, zs, s)
        zt, ft = _round_side(ws, u, zt, t)
        fallbacks += fs + ft
        for q, (a, b) in ws.pairs.items():
            m = min(zs[a], zt[b])
            zs[a] = zt[b] = m
        if not _is_int(zs[s]):
            zs[s] = zt[t] = 0.0
        steps += 1
        if steps > len(ws.pairs) + 1:
            raise RoundingError("half-integral rounding did not terminate")
    if trace is not None:
        trace.rounding_steps = steps
        trace.fallbacks = fallbacks
        if fallbacks:
            trace.notes.append(f"rounding fell back to floor {fallbacks} time(s)")
    hs = _integral_paths(ws, u, {v: int(round(z)) for v, z in zs.items() if round(z) > 0})
    ht = _integral_paths(ws, u, {v: int(round(z)) for v, z in zt.items() if round(z) > 0})
    return hs, ht


def _integral_paths(ws: Workspace, u, caps: dict) -> PathFlow:
    if not caps:
        return PathFlow()
    vals, net = _single_sink_values(ws, u, caps, {})
    if any(vals[v] < c - 1e-9 for v, c in caps.items()):
        raise RoundingError("integral source values are not routable")
    entries = []
    for path, w in decompose_arc_flow(net.arc_flows(), SRC, (u, 1)):
        inner = project_split_path(path[1:])
        entries.append((inner[0], inner, float(round(w))))
    return PathFlow(entries)


@dataclass
class Clustering:
    trees: list  # list of (vertex set, adjacency dict)
    tree_of: dict  # vertex -> tree index
    selected: list  # M'' pair ids
    local: list
    distant: list
    d: int


def _spanning_tree(support_adj, root):
    parent = {root: None}
    order = [root]
    q = deque([root])
    while q:
        v = q.popleft()
        for w in sorted(support_adj[v]):
            if w not in parent:
                parent[w] = v
                order.append(w)
                q.append(w)
    return parent, order


def cluster_and_select(ws: Workspace, g3: PathFlow, u, pairs_m1: list) -> Clustering:
    """Vertex-disjoint trees over the support of g3 with >= 3 terminals each, and the greedy M''."""
    if not pairs_m1:
        return Clustering([], {}, [], [], [], 0)
    X = {v for p in pairs_m1 for v in ws.pairs[p]}
    adj = defaultdict(set)
    for _, path, _ in g3.entries:
        for a, b in zip(path, path[1:]):
            adj[a].add(b)
            adj[b].add(a)
    adj[u]
    parent, order = _spanning_tree(adj, u)
    missing = X - parent.keys()
    if missing:
        raise RoundingError(f"terminals {sorted(missing)} are not connected to u in the support")
    children = defaultdict(list)
    for v, p in parent.items():
        if p is not None:
            children[p].append(v)
    pending_cnt = {}
    pending_members = {}
    trees = []
    for v in reversed(order):
        members = [v]
        cnt = 1 if v in X else 0
        for c in children[v]:
            if c in pending_cnt:
                cnt += pending_cnt.pop(c)
                members += pending_members.pop(c)
        if cnt >= 3:
            trees.append(set(members))
        else:
            pending_cnt[v] = cnt
            pending_members[v] = members
    if u in pending_members:
        rest = set(pending_members[u])
        if not trees:
            trees.append(rest)
        else:
            # attach the leftover (which contains the root) to a tree hanging off it
            hang = next(i for i, T in enumerate(trees) if any(parent[v] in rest for v in T if parent[v] is not None))
            trees[hang] |= rest
    tree_of = {v: i for i, T in enumerate(trees) for v in T}
    tree_adj = []
    for T in trees:
        a = defaultdict(set)
        for v in T:
            p = parent[v]
            if p is not None and p in T:
                a[v].add(p)
                a[p].add(v)
        tree_adj.append(a)
    d = max(len(X & T) for T in trees)
    touched = set()
    selected, local, distant = [], [], []
    for p in sorted(pairs_m1):
        s, t = ws.pairs[p]
        ts = {tree_of[s], tree_of[t]}
        if ts & touched:
            continue
        touched |= ts
        selected.append(p)
        (local if len(ts) == 1 else distant).append(p)
    return Clustering(list(zip(trees, tree_adj)), tree_of, selected, local, distant, d)


def _tree_path(adj, a, b):
    prev = {a: None}
    q = deque([a])
    while q:
        v = q.popleft()
        if v == b:
            break
        for w in sorted(adj[v]):
            if w not in prev:
                prev[w] = v
                q.append(w)
    path = [b]
    while path[-1] != a:
        path.append(prev[path[-1]])
    return tuple(reversed(path))


def route_local(ws: Workspace, cl: Clustering) -> dict:
    out = {}
    for p in cl.local:
        s, t = ws.pairs[p]
        out[p] = _tree_path(cl.trees[cl.tree_of[s]][1], s, t)
    return out


def build_g4(ws: Workspace, cl: Clustering, g3: PathFlow, pairs_m1) -> PathFlow:
    """3/5 from every distant terminal: 1/5 along its tree to each of three terminals, then (2/5) g3."""
    X = {v for p in pairs_m1 for v in ws.pairs[p]}
    g3_path = {}
    for _, path, _ in g3.entries:
        g3_path.setdefault(path[0], path)
    entries = []
    for p in cl.distant:
        for v in ws.pairs[p]:
            T, adj = cl.trees[cl.tree_of[v]]
            hubs = sorted(X & T)[:3]
            if len(hubs) < 3:
                raise RoundingError("a tree holding a distant terminal has fewer than three terminals")
            for h in hubs:
                walk = _tree_path(adj, v, h) + g3_path[h][1:]
                entries.append((v, shortcut(walk), 0.2))
    return PathFlow(entries)


def final_integral_round(ws: Workspace, cl: Clustering, u):
    """Integral max-flow from the distant terminals to u; join pairs whose both ends got a path."""
    terms = {v: 1 for p in cl.distant for v in ws.pairs[p]}
    if not terms:
        return {}, 0.0
    vals, net = _single_sink_values(ws, u, {}, terms)
    value = sum(vals.values())
    unit = {}
    for path, w in decompose_arc_flow(net.arc_flows(), SRC, (u, 1)):
        inner = project_split_path(path[1:])
        if w > 0.5:
            unit[inner[0]] = inner
    out = {}
    for p in cl.distant:
        s, t = ws.pairs[p]
        if s in unit and t in unit:
            out[p] = shortcut(unit[s] + unit[t][::-1][1:])
    return out, value


# ------------------------------------------------------------------ driver


def _project(ws: Workspace, path):
    return tuple(ws.original[v] for v in path if ws.original.get(v) is not None)


def route_via_small_cut(
    instance: Instance, f: PathFlow, g: PathFlow, S, alpha: float = 1.0, augment: bool = True
) -> RoundingResult:
    """Integral routing of size >= |f| / (60 (2d-1) alpha |S|); every stage is checked and traced.

    With ``augment`` the pipeline's routing is extended greedily by pairs that
    carry flow in f and still fit; ``trace.routed_pipeline`` keeps the
    pipeline's own count.
    """
    tr = Trace(flow=f.value, alpha=alpha, S=len(frozenset(S)))
    if f.value <= 0:
        tr.constant = 0.0
        return RoundingResult(Routing(), tr)
    if alpha < 1:
        raise InputError("alpha must be at least 1")
    ws = build_workspace(instance, f, g, S, alpha)
    eps = _config.EPS

    f1, g1 = symmetrize(ws)
    tr.f1 = f1.value
    _require(_config.close(tr.f1, tr.flow / 3), "|f1| = |f|/3", tr)
    _require(g1.is_feasible(ws.H, Mode.NDP), "g1 feasible", tr)

    f2, g2, u = restrict_to_best_vertex(ws, f1, g1)
    tr.f2, tr.g2, tr.u = f2.value, g2.value, ws.original.get(u)
    _require(_config.leq(tr.f1 / tr.S, tr.f2), "|f2| >= |f1|/|S|", tr)

    hs, ht = half_integral_round(ws, g2, u, tr)
    tr.hs_ht = hs.value + ht.value
    _require(_config.leq(tr.g2 / 2, tr.hs_ht), "|hs|+|ht| >= |g2|/2", tr)
    g3 = (hs + ht).scale(0.5)
    _require(g3.is_feasible(ws.H, Mode.NDP), "g3 feasible", tr)
    hs_src = hs.sources
    m1 = [p for p, (s, t) in sorted(ws.pairs.items()) if hs_src.get(s, 0) > 0.5]
    tr.m1 = len(m1)

    cl = cluster_and_select(ws, g3, u, m1)
    tr.d, tr.m2 = cl.d, len(cl.selected)
    tr.local, tr.distant = len(cl.local), len(cl.distant)
    if m1:
        _require(tr.m2 * (2 * cl.d - 1) >= tr.m1, "|M''| >= |M'|/(2d-1)", tr)
        _require(tr.m2 * cl.d * cl.d >= tr.m1, "|M''| >= |M'|/d^2", tr)

    local_paths = route_local(ws, cl)
    tr.routed_local = len(local_paths)
    chosen = local_paths
    if len(cl.local) * 2 >= len(cl.selected):
        tr.branch = "local"
        _require(2 * len(chosen) >= tr.m2, "local branch routes >= |M''|/2", tr)
    else:
        tr.branch = "distant"
        g4 = build_g4(ws, cl, g3, m1)
        tr.g4 = g4.value
        _require(g4.is_feasible(ws.H, Mode.NDP), "g4 feasible", tr)
        distant_paths, tr.g5 = final_integral_round(ws, cl, u)
        _require(_config.leq(tr.g4, tr.g5), "|g5| >= |g4|", tr)
        tr.routed_distant = len(distant_paths)
        _require(5 * len(distant_paths) >= len(cl.distant), "distant branch routes >= |M''_distant|/5", tr)
        if len(distant_paths) >= len(local_paths):
            chosen = distant_paths
    routing = Routing({p: _project(ws, path) for p, path in sorted(chosen.items())})
    assert_feasible(routing, instance)
    tr.routed_pipeline = routing.size
    if augment:
        routing = assert_feasible(augment_greedily(routing, instance, f.commodity_values), instance)
    tr.routed = routing.size
    tr.constant = 60.0 * (2 * max(cl.d, 1) - 1)
    bound = tr.flow / (tr.constant * alpha * tr.S)
    _require(tr.routed_pipeline + eps >= bound, "routed >= |f| / (C alpha |S|)", tr)
    log.debug("rounding trace %s", tr.as_dict())
    return RoundingResult(routing, tr)


def _require(cond, what, tr):
    if not cond:
        raise RoundingError(f"stage guarantee failed: {what}", tr)


def edp_via_reduction(instance: Instance, f: PathFlow, g: PathFlow, S, alpha: float = 1.0, augment: bool = True) -> RoundingResult:
    if instance.mode is not Mode.EDP:
        raise InputError("edp_via_reduction expects an edge-capacitated instance")
    return route_via_small_cut(instance, f, g, S, alpha, augment)
