"""Integral routings and their independent feasibility audit."""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Mapping

from .graph import Instance, Mode, ekey, translate_path


class AuditError(AssertionError):
    """A routing failed its feasibility audit."""


@dataclass(frozen=True)
class Routing:
    """One simple path per routed pair id."""

    paths: Mapping[int, tuple] = field(default_factory=dict)

    def __len__(self):
        return len(self.paths)

    @property
    def size(self) -> int:
        return len(self.paths)

    def union(self, other: "Routing") -> "Routing":
        clash = set(self.paths) & set(other.paths)
        if clash:
            raise AuditError(f"pairs routed twice: {sorted(clash)}")
        return Routing({**self.paths, **other.paths})

    def restricted(self, ids) -> "Routing":
        ids = set(ids)
        return Routing({p: q for p, q in self.paths.items() if p in ids})

    def translated(self, origin: Mapping[int, int]) -> "Routing":
        return Routing({p: translate_path(q, origin) for p, q in self.paths.items()})

    def to_dict(self) -> dict:
        return {str(p): list(q) for p, q in sorted(self.paths.items())}


def audit(routing: Routing, instance: Instance) -> list:
    """Recompute everything from scratch; return a list of violations (empty when feasible)."""
    g = instance.graph
    bad = []
    edge_load: Counter = Counter()
    node_load: Counter = Counter()
    for p, path in routing.paths.items():
        if p not in instance.pairs:
            bad.append(("unknown pair", p))
            continue
        s, t = instance.pairs[p]
        if len(path) < 2 or {path[0], path[-1]} != {s, t}:
            bad.append(("wrong endpoints", p, path))
            continue
        if len(set(path)) != len(path):
            bad.append(("not simple", p, path))
        for a, b in zip(path, path[1:]):
            if not g.has_edge(a, b):
                bad.append(("missing edge", p, (a, b)))
            else:
                edge_load[ekey(a, b)] += 1
        for v in set(path):
            node_load[v] += 1
    if instance.mode is Mode.EDP:
        for e, load in edge_load.items():
            if e in g.edges and load > g.edges[e]:
                bad.append(("edge overload", e, load, g.edges[e]))
    else:
        for v, load in node_load.items():
            if v in g.vertices and load > g.vcap(v):
                bad.append(("vertex overload", v, load, g.vcap(v)))
    return bad


def assert_feasible(routing: Routing, instance: Instance) -> Routing:
    bad = audit(routing, instance)
    if bad:
        raise AuditError(f"routing infeasible: {bad[:5]}")
    return routing


def augment_greedily(routing: Routing, instance: Instance, candidates) -> Routing:
    """Add unrouted candidate pairs one by one along shortest paths in the residual graph.

    The result contains ``routing`` and stays feasible; it only ever grows.
    """
    g = instance.graph
    edge_left = dict(g.edges)
    node_left = dict(g.node_caps) if g.node_caps is not None else None
    for path in routing.paths.values():
        for a, b in zip(path, path[1:]):
            edge_left[ekey(a, b)] -= 1
        if node_left is not None:
            for v in path:
                node_left[v] -= 1
    ndp = instance.mode is Mode.NDP
    paths = dict(routing.paths)
    for p in sorted(candidates):
        if p in paths:
            continue
        s, t = instance.pairs[p]
        if ndp and (node_left[s] < 1 or node_left[t] < 1):
            continue
        prev = {s: None}
        q = deque([s])
        while q and t not in prev:
            v = q.popleft()
            for w in g.adj[v]:
                if w in prev:
                    continue
                if ndp and node_left[w] < 1:
                    continue
                if not ndp and edge_left[ekey(v, w)] < 1:
                    continue
                prev[w] = v
                q.append(w)
        if t not in prev:
            continue
        path = [t]
        while path[-1] != s:
            path.append(prev[path[-1]])
        path = tuple(reversed(path))
        for a, b in zip(path, path[1:]):
            edge_left[ekey(a, b)] -= 1
        if ndp:
            for v in path:
                node_left[v] -= 1
        paths[p] = path
    return Routing(paths)
