"""Single-commodity max-flow / min-cut (Dinic) with cut certificates."""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping

from . import _config
from .graph import CapGraph

INF = math.inf


@dataclass(frozen=True)
class CutCertificate:
    side: frozenset
    capacity: float
    saturated: tuple


class FlowNetwork:
    """Directed network with float capacities; ``math.inf`` marks uncuttable arcs.

    Infinite arcs are given capacity (sum of finite capacities + 1) when a flow
    is computed, so no finite minimum cut can contain one.  Flow is kept between
    calls, which lets callers raise capacities and augment from a warm start.
    """

    def __init__(self):
        self.index: dict[Hashable, int] = {}
        self.names: list[Hashable] = []
        self.adj: list[list[int]] = []
        self.head: list[int] = []
        self.cap: list[float] = []
        self.flow: list[float] = []
        self.forward: list[bool] = []

    def node(self, name: Hashable) -> int:
        i = self.index.get(name)
        if i is None:
            i = len(self.names)
            self.index[name] = i
            self.names.append(name)
            self.adj.append([])
        return i

    def add_arc(self, u: Hashable, v: Hashable, cap: float) -> int:
        """Add arc u->v and return its id (the reverse residual arc is id ^ 1)."""
        if cap < 0:
            raise ValueError(f"negative capacity on arc {u}->{v}")
        a, b = self.node(u), self.node(v)
        aid = len(self.head)
        self.head += [b, a]
        self.cap += [cap, 0.0]
        self.flow += [0.0, 0.0]
        self.forward += [True, False]
        self.adj[a].append(aid)
        self.adj[b].append(aid + 1)
        return aid

    def set_capacity(self, arc: int, cap: float) -> None:
        if cap < self.flow[arc] - _config.EPS:
            raise ValueError("new capacity is below the current flow")
        self.cap[arc] = cap

    def tail(self, arc: int) -> int:
        return self.head[arc ^ 1]

    def arcs(self):
        for aid in range(0, len(self.head), 2):
            yield aid, self.names[self.tail(aid)], self.names[self.head[aid]], self.cap[aid]

    def _big(self) -> float:
        return sum(c for c in self.cap[0::2] if c != INF) + 1.0

    def _residual(self, arc: int, big: float) -> float:
        c = self.cap[arc]
        if c == INF:
            c = big
        return c - self.flow[arc]

    def max_flow(self, s: Hashable, t: Hashable, tol: float = 1e-12) -> float:
        """Augment to a maximum s-t flow (keeping any existing flow); return its value."""
        src, snk = self.node(s), self.node(t)
        big = self._big()
        n = len(self.names)
        while True:
            level = [-1] * n
            level[src] = 0
            q = deque([src])
            while q:
                v = q.popleft()
                for a in self.adj[v]:
                    w = self.head[a]
                    if level[w] < 0 and self._residual(a, big) > tol:
                        level[w] = level[v] + 1
                        q.append(w)
            if level[snk] < 0:
                break
            it = [0] * n
            while True:
                pushed = self._push(src, snk, INF, level, it, big, tol)
                if pushed <= tol:
                    break
        return self.value(s)

    def _push(self, src, snk, limit, level, it, big, tol):
        # iterative DFS along the level graph
        stack = [src]
        arcs_taken: list[int] = []
        while stack:
            v = stack[-1]
            if v == snk:
                amt = min([limit] + [self._residual(a, big) for a in arcs_taken])
                for a in arcs_taken:
                    self.flow[a] += amt
                    self.flow[a ^ 1] -= amt
                return amt
            advanced = False
            while it[v] < len(self.adj[v]):
                a = self.adj[v][it[v]]
                w = self.head[a]
                if level[w] == level[v] + 1 and self._residual(a, big) > tol:
                    stack.append(w)
                    arcs_taken.append(a)
                    advanced = True
                    break
                it[v] += 1
            if not advanced:
                level[v] = -1
                stack.pop()
                if arcs_taken:
                    arcs_taken.pop()
                if stack:
                    it[stack[-1]] += 1
        return 0.0

    def value(self, s: Hashable) -> float:
        src = self.index[s]
        return sum(self.flow[a] for a in self.adj[src])

    def reachable(self, s: Hashable, tol: float = 1e-12) -> frozenset:
        """Names reachable from s in the residual graph (the source-minimal min-cut side)."""
        big = self._big()
        src = self.index[s]
        seen = {src}
        q = deque([src])
        while q:
            v = q.popleft()
            for a in self.adj[v]:
                w = self.head[a]
                if w not in seen and self._residual(a, big) > tol:
                    seen.add(w)
                    q.append(w)
        return frozenset(self.names[i] for i in seen)

    def min_cut(self, s: Hashable, tol: float = 1e-12) -> CutCertificate:
        side = self.reachable(s, tol)
        sat = []
        total = 0.0
        for aid, u, v, c in self.arcs():
            if u in side and v not in side:
                sat.append((u, v, c))
                total += c
        return CutCertificate(side, total, tuple(sat))

    def arc_flows(self) -> dict[tuple, float]:
        out: dict[tuple, float] = defaultdict(float)
        for aid, u, v, _ in self.arcs():
            if self.flow[aid] > 0:
                out[(u, v)] += self.flow[aid]
        return dict(out)

    def to_dimacs(self, s: Hashable, t: Hashable) -> str:
        big = self._big()
        lines = [f"p max {len(self.names)} {len(self.head) // 2}"]
        lines.append(f"n {self.index[s] + 1} s")
        lines.append(f"n {self.index[t] + 1} t")
        for aid, u, v, c in self.arcs():
            lines.append(f"a {self.index[u] + 1} {self.index[v] + 1} {big if c == INF else c:g}")
        return "\n".join(lines) + "\n"


def max_flow_min_cut(net: FlowNetwork, s: Hashable, t: Hashable, eps: float | None = None):
    """Return (value, CutCertificate); duality is checked."""
    val = net.max_flow(s, t)
    cert = net.min_cut(s)
    if not _config.close(val, cert.capacity, eps):
        raise ArithmeticError(f"max-flow {val} differs from cut capacity {cert.capacity}")
    return val, cert


def decompose_arc_flow(arc_flow: Mapping[tuple, float], s: Hashable, t: Hashable, tol: float = 1e-12):
    """Split an s-t arc flow into weighted simple s-t paths.

    Opposite arcs are netted, directed cycles cancelled, then paths stripped by
    always following the smallest positive out-arc.  Stray residue below ``tol``
    (from float cancellation) is discarded.
    """
    net: dict[Hashable, dict[Hashable, float]] = defaultdict(dict)
    for (u, v), w in arc_flow.items():
        if u == v or w <= 0:
            continue
        back = net[v].get(u, 0.0)
        if back >= w:
            net[v][u] = back - w
        else:
            net[v].pop(u, None)
            net[u][v] = net[u].get(v, 0.0) + (w - back)
    for u in list(net):
        net[u] = {v: w for v, w in net[u].items() if w > tol}

    def out_arc(u):
        best = None
        for v, w in net[u].items():
            if w > tol and (best is None or _order_key(v) < _order_key(best)):
                best = v
        return best

    paths: list[tuple[tuple, float]] = []
    while True:
        first = out_arc(s)
        if first is None:
            break
        walk = [s]
        pos = {s: 0}
        while walk[-1] != t:
            v = walk[-1]
            w = out_arc(v)
            if w is None:
                # dead end: residue from rounding, drop the arc feeding it
                prev = walk[-2]
                net[prev].pop(v, None)
                break
            if w in pos:
                cyc = walk[pos[w]:] + [w]
                amt = min(net[a][b] for a, b in zip(cyc, cyc[1:]))
                for a, b in zip(cyc, cyc[1:]):
                    net[a][b] -= amt
                    if net[a][b] <= tol:
                        del net[a][b]
                for x in walk[pos[w] + 1:]:
                    del pos[x]
                del walk[pos[w] + 1:]
                continue
            pos[w] = len(walk)
            walk.append(w)
        else:
            amt = min(net[a][b] for a, b in zip(walk, walk[1:]))
            for a, b in zip(walk, walk[1:]):
                net[a][b] -= amt
                if net[a][b] <= tol:
                    del net[a][b]
            paths.append((tuple(walk), amt))
    return paths


def _order_key(v):
    return (0, v) if isinstance(v, int) else (1, repr(v))


def edge_network(g: CapGraph, caps: Mapping[tuple, float] | None = None) -> FlowNetwork:
    """Each undirected edge becomes two opposite arcs with the edge's capacity."""
    net = FlowNetwork()
    for v in sorted(g.vertices):
        net.node(v)
    for (u, v), c in g.edges.items():
        c = caps[(u, v)] if caps is not None else c
        net.add_arc(u, v, c)
        net.add_arc(v, u, c)
    return net


def node_capacitated_reduce(g: CapGraph) -> FlowNetwork:
    """Split v into (v, 0) -> (v, 1) with capacity cap(v); each edge gives two infinite arcs."""
    net = FlowNetwork()
    for v in sorted(g.vertices):
        net.add_arc((v, 0), (v, 1), g.vcap(v))
    for u, v in g.edges:
        net.add_arc((u, 1), (v, 0), INF)
        net.add_arc((v, 1), (u, 0), INF)
    return net


def project_split_path(path: Iterable) -> tuple:
    """Map a path over split nodes (v, side) back to original vertices."""
    out = []
    for node in path:
        if isinstance(node, tuple) and len(node) == 2 and node[1] in (0, 1):
            v = node[0]
            if not out or out[-1] != v:
                out.append(v)
    return tuple(out)
