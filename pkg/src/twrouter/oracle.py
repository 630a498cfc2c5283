"""Exhaustive exact solvers for tiny instances (test ground truth)."""

from __future__ import annotations

from collections import deque

from .graph import Instance, Mode, ekey
from .routing import Routing, assert_feasible


class GuardError(ValueError):
    """The instance exceeds the oracle's size guard."""


def _guard(inst: Instance, max_vertices, max_pairs):
    if inst.graph.n > max_vertices:
        raise GuardError(f"{inst.graph.n} vertices exceed the guard of {max_vertices}")
    if inst.k > max_pairs:
        raise GuardError(f"{inst.k} pairs exceed the guard of {max_pairs}")


class _Search:
    def __init__(self, inst: Instance, target):
        self.inst = inst
        self.g = inst.graph
        self.ndp = inst.mode is Mode.NDP
        self.edge_left = dict(self.g.edges)
        self.node_left = dict(self.g.node_caps) if self.ndp else None
        self.order = sorted(inst.pairs)
        self.target = target
        self.best = 0
        self.best_paths = {}
        self.current = {}

    def usable_edge(self, u, v):
        return self.ndp or self.edge_left[ekey(u, v)] > 0

    def usable_node(self, v):
        return not self.ndp or self.node_left[v] > 0

    def reachable(self, s, t, blocked):
        if s == t:
            return True
        seen = {s}
        q = deque([s])
        while q:
            v = q.popleft()
            for w in self.g.adj[v]:
                if w in seen or w in blocked or not self.usable_edge(v, w) or not self.usable_node(w):
                    continue
                if w == t:
                    return True
                seen.add(w)
                q.append(w)
        return False

    def paths(self, s, t):
        """Simple s-t paths in the residual graph, in lexicographic neighbour order."""
        if not (self.usable_node(s) and self.usable_node(t)):
            return
        path = [s]
        on = {s}

        def rec(v):
            if v == t:
                yield tuple(path)
                return
            for w in self.g.adj[v]:
                if w in on or not self.usable_edge(v, w) or not self.usable_node(w):
                    continue
                if w != t and not self.reachable(w, t, on):
                    continue
                path.append(w)
                on.add(w)
                yield from rec(w)
                on.discard(w)
                path.pop()

        yield from rec(s)

    def take(self, path, sign):
        for a, b in zip(path, path[1:]):
            if not self.ndp:
                self.edge_left[ekey(a, b)] -= sign
        if self.ndp:
            for v in path:
                self.node_left[v] -= sign

    def done(self):
        return self.target is not None and self.best >= self.target

    def run(self, i=0):
        count = len(self.current)
        if count > self.best:
            self.best = count
            self.best_paths = dict(self.current)
        if self.done() or i == len(self.order):
            return
        need = self.best + 1 if self.target is None else max(self.best + 1, self.target)
        if count + len(self.order) - i < need:
            return
        p = self.order[i]
        s, t = self.inst.pairs[p]
        last = i == len(self.order) - 1
        for path in self.paths(s, t):
            self.take(path, 1)
            self.current[p] = path
            self.run(i + 1)
            del self.current[p]
            self.take(path, -1)
            if self.done() or last:
                # one path for the final pair decides everything below it
                break
        if not self.done():
            self.run(i + 1)


def _exact(inst: Instance, max_vertices, max_pairs, target):
    _guard(inst, max_vertices, max_pairs)
    search = _Search(inst, target)
    search.run()
    witness = assert_feasible(Routing(dict(search.best_paths)), inst)
    return search.best, witness


def exact_maxedp(inst: Instance, *, max_vertices: int = 30, max_pairs: int = 8, target: int | None = None):
    """Maximum number of pairs routable under edge capacities; returns ``(opt, Routing)``.

    With ``target`` the search stops as soon as that many pairs are routed, so
    the returned value is ``min(opt, target)``.
    """
    if inst.mode is not Mode.EDP:
        raise ValueError("exact_maxedp expects an edge-capacitated instance")
    return _exact(inst, max_vertices, max_pairs, target)


def exact_maxndp(inst: Instance, *, max_vertices: int = 30, max_pairs: int = 8, target: int | None = None):
    """Node-capacitated analogue of :func:`exact_maxedp` (every path vertex uses one unit)."""
    if inst.mode is not Mode.NDP:
        raise ValueError("exact_maxndp expects a node-capacitated instance")
    return _exact(inst, max_vertices, max_pairs, target)


def exact(inst: Instance, **kw):
    return (exact_maxndp if inst.mode is Mode.NDP else exact_maxedp)(inst, **kw)
