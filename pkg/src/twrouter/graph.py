"""Capacitated undirected graphs, terminal pairs and routing instances."""

from __future__ import annotations

import enum
from collections import defaultdict, deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping


class InputError(ValueError):
    """Malformed graph, instance or decomposition."""


class Mode(str, enum.Enum):
    EDP = "edp"
    NDP = "ndp"


def ekey(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=True)
class CapGraph:
    """Undirected simple graph with positive integer edge (and optional node) capacities.

    Build instances through :meth:`build`, which folds parallel edges and rejects
    self-loops; the raw constructor trusts its arguments.
    """

    vertices: frozenset
    edges: Mapping[tuple[int, int], int]
    node_caps: Mapping[int, int] | None = None

    @classmethod
    def build(cls, vertices: Iterable[int], edges: Iterable[tuple], node_caps=None) -> "CapGraph":
        verts = frozenset(vertices)
        folded: dict[tuple[int, int], int] = {}
        for e in edges:
            u, v = int(e[0]), int(e[1])
            cap = int(e[2]) if len(e) > 2 else 1
            if u == v:
                raise InputError(f"self-loop at vertex {u}")
            if u not in verts or v not in verts:
                raise InputError(f"edge ({u}, {v}) has an unknown endpoint")
            if cap < 1:
                raise InputError(f"edge ({u}, {v}) has non-positive capacity {cap}")
            k = ekey(u, v)
            folded[k] = folded.get(k, 0) + cap
        caps = None
        if node_caps is not None:
            caps = {}
            for v, c in dict(node_caps).items():
                if v not in verts:
                    raise InputError(f"node capacity for unknown vertex {v}")
                if int(c) < 1:
                    raise InputError(f"vertex {v} has non-positive capacity {c}")
                caps[int(v)] = int(c)
            missing = verts - caps.keys()
            if missing:
                raise InputError(f"missing node capacities for {sorted(missing)[:5]}")
        return cls(verts, dict(sorted(folded.items())), caps)

    @cached_property
    def adj(self) -> dict[int, tuple[int, ...]]:
        nbrs: dict[int, list[int]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return {v: tuple(sorted(ns)) for v, ns in nbrs.items()}

    def cap(self, u: int, v: int) -> int:
        return self.edges[ekey(u, v)]

    def has_edge(self, u: int, v: int) -> bool:
        return ekey(u, v) in self.edges

    def vcap(self, v: int) -> int:
        if self.node_caps is None:
            raise KeyError("graph carries no node capacities")
        return self.node_caps[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    def components(self) -> list[frozenset]:
        seen: set[int] = set()
        out = []
        for s in sorted(self.vertices):
            if s in seen:
                continue
            comp = {s}
            queue = deque([s])
            while queue:
                v = queue.popleft()
                for w in self.adj[v]:
                    if w not in comp:
                        comp.add(w)
                        queue.append(w)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def without_edges(self, drop: Iterable[tuple[int, int]]) -> "CapGraph":
        gone = {ekey(*e) for e in drop}
        return CapGraph(self.vertices, {e: c for e, c in self.edges.items() if e not in gone}, self.node_caps)

    def with_caps_clamped(self, bound: int) -> "CapGraph":
        bound = max(1, bound)
        caps = None
        if self.node_caps is not None:
            caps = {v: min(c, bound) for v, c in self.node_caps.items()}
        return CapGraph(self.vertices, {e: min(c, bound) for e, c in self.edges.items()}, caps)


def induced_subgraph(g: CapGraph, S: Iterable[int]) -> CapGraph:
    S = frozenset(S)
    unknown = S - g.vertices
    if unknown:
        raise InputError(f"unknown vertices {sorted(unknown)[:5]}")
    edges = {e: c for e, c in g.edges.items() if e[0] in S and e[1] in S}
    caps = None if g.node_caps is None else {v: g.node_caps[v] for v in S}
    return CapGraph(S, edges, caps)


def is_separation(g: CapGraph, A: Iterable[int], B: Iterable[int]) -> bool:
    A, B = set(A), set(B)
    if A | B != set(g.vertices):
        return False
    only_a, only_b = A - B, B - A
    return not any((u in only_a and v in only_b) or (v in only_a and u in only_b) for u, v in g.edges)


def vertex_boundary(g: CapGraph, U: Iterable[int]) -> set[int]:
    """N(U): vertices outside U with a neighbour in U."""
    U = set(U)
    return {w for v in U for w in g.adj[v] if w not in U}


def edge_boundary(g: CapGraph, U: Iterable[int]) -> list[tuple[int, int]]:
    U = set(U)
    return [e for e in g.edges if (e[0] in U) != (e[1] in U)]


@dataclass(frozen=True)
class Instance:
    """A MaxEDP / MaxNDP instance.

    ``pairs`` maps a stable pair id to its ``(s, t)`` terminals; sub-instances
    produced by the recursion keep the ids of the pairs they inherit.
    ``terminal_origin`` maps terminals introduced by normalization to the vertex
    they stand in for.
    """

    graph: CapGraph
    pairs: Mapping[int, tuple[int, int]]
    mode: Mode = Mode.EDP
    terminal_origin: Mapping[int, int] = field(default_factory=dict)
    labels: Mapping[int, str] | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        for pid, (s, t) in self.pairs.items():
            if s == t:
                raise InputError(f"pair {pid} has identical endpoints {s}")
            if s not in self.graph.vertices or t not in self.graph.vertices:
                raise InputError(f"pair {pid} uses a vertex outside the graph")
        if self.mode is Mode.NDP and self.graph.node_caps is None:
            raise InputError("NDP instances need node capacities")

    @property
    def k(self) -> int:
        return len(self.pairs)

    @cached_property
    def terminal_pair(self) -> dict[int, int]:
        """terminal -> pair id (only meaningful once terminals form a matching)."""
        out = {}
        for pid, (s, t) in self.pairs.items():
            out.setdefault(s, pid)
            out.setdefault(t, pid)
        return out

    def is_matching(self) -> bool:
        seen: set[int] = set()
        for s, t in self.pairs.values():
            if s in seen or t in seen:
                return False
            seen.update((s, t))
        return True

    def restricted(self, graph: CapGraph) -> "Instance":
        """Same instance on ``graph`` (a subgraph), keeping pairs with both ends inside."""
        vs = graph.vertices
        pairs = {p: st for p, st in self.pairs.items() if st[0] in vs and st[1] in vs}
        return replace(self, graph=graph, pairs=pairs)


def normalize_terminals(instance: Instance, decomposition=None):
    """Make the pairs a matching and clamp capacities to the number of pairs.

    Every terminal that repeats is kept in its first pair; later occurrences are
    replaced by a fresh leaf hanging off it (edge capacity 1, node capacity 1).
    Returns the new instance, or ``(instance, decomposition)`` when a tree
    decomposition is supplied; the decomposition gains one leaf bag per new leaf.
    """
    g = instance.graph
    next_id = max(g.vertices, default=-1) + 1
    used: set[int] = set()
    pairs: dict[int, tuple[int, int]] = {}
    new_edges: list[tuple[int, int, int]] = []
    origin = dict(instance.terminal_origin)
    leaves: list[tuple[int, int]] = []
    for pid, (s, t) in instance.pairs.items():
        ends = []
        for v in (s, t):
            if v in used:
                leaf = next_id
                next_id += 1
                new_edges.append((leaf, v, 1))
                origin[leaf] = origin.get(v, v)
                leaves.append((leaf, v))
                v = leaf
            used.add(v)
            ends.append(v)
        pairs[pid] = (ends[0], ends[1])
    k = max(1, len(pairs))
    caps = None
    if g.node_caps is not None:
        caps = dict(g.node_caps)
        for leaf, _ in leaves:
            caps[leaf] = 1
    elif instance.mode is Mode.NDP:
        raise InputError("NDP instances need node capacities")
    graph = CapGraph.build(
        set(g.vertices) | {leaf for leaf, _ in leaves},
        [(u, v, c) for (u, v), c in g.edges.items()] + new_edges,
        caps,
    ).with_caps_clamped(k)
    out = replace(instance, graph=graph, pairs=pairs, terminal_origin=origin)
    if decomposition is None:
        return out
    from .decomp import attach_leaves

    return out, attach_leaves(decomposition, leaves)


def attach_terminal_leaves(instance: Instance, decomposition):
    """Move every terminal onto a fresh degree-1, capacity-1 leaf.

    Terminals that already are degree-1 capacity-1 vertices, occur in one pair
    and sit in a single bag are left in place (such a vertex is never in an
    adhesion).  Returns ``(instance, decomposition)``.
    """
    from .decomp import attach_leaves

    g = instance.graph
    caps = dict(g.node_caps) if g.node_caps is not None else None
    next_id = max(g.vertices, default=-1) + 1
    counts: dict[int, int] = defaultdict(int)
    for s, t in instance.pairs.values():
        counts[s] += 1
        counts[t] += 1

    occurrences: dict[int, int] = defaultdict(int)
    for bag in decomposition.bags.values():
        for v in bag:
            occurrences[v] += 1

    def is_leaf_terminal(v):
        return (
            counts[v] == 1
            and g.degree(v) <= 1
            and occurrences[v] == 1
            and (caps is None or caps[v] == 1)
        )

    leaves: list[tuple[int, int]] = []
    origin = dict(instance.terminal_origin)
    pairs = {}
    for pid, (s, t) in instance.pairs.items():
        ends = []
        for v in (s, t):
            if not is_leaf_terminal(v):
                leaf = next_id
                next_id += 1
                leaves.append((leaf, v))
                origin[leaf] = origin.get(v, v)
                if caps is not None:
                    caps[leaf] = 1
                v = leaf
            ends.append(v)
        pairs[pid] = tuple(ends)
    if not leaves:
        return instance, decomposition
    graph = CapGraph.build(
        set(g.vertices) | {leaf for leaf, _ in leaves},
        [(u, v, c) for (u, v), c in g.edges.items()] + [(leaf, v, 1) for leaf, v in leaves],
        caps,
    )
    out = replace(instance, graph=graph, pairs=pairs, terminal_origin=origin)
    return out, attach_leaves(decomposition, leaves)


def translate_path(path: tuple[int, ...], origin: Mapping[int, int]) -> tuple[int, ...]:
    """Strip normalization leaves from both ends of ``path``."""
    path = tuple(path)
    while len(path) > 1 and path[0] in origin:
        path = path[1:]
    while len(path) > 1 and path[-1] in origin:
        path = path[:-1]
    return path
