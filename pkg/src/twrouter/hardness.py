"""Reduction from Multicolored Clique to node-disjoint paths on graphs of small treedepth."""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from pathlib import Path

from .graph import CapGraph, InputError, Instance, Mode
from .oracle import exact_maxndp
from .routing import Routing, assert_feasible


@dataclass
class MCCInstance:
    """k colour classes of equal size n over vertices of G; ``edges`` are the cross-class edges."""

    k: int
    classes: list
    edges: list

    def __post_init__(self):
        self.classes = [list(c) for c in self.classes]
        self.edges = [tuple(e) for e in self.edges]
        if self.k < 2 or len(self.classes) != self.k:
            raise InputError(f"need k >= 2 classes, got k={self.k} with {len(self.classes)} classes")
        sizes = {len(c) for c in self.classes}
        if len(sizes) != 1 or min(sizes) < 2:
            raise InputError(f"classes must share one size n >= 2, got sizes {sorted(sizes)}")
        flat = [v for c in self.classes for v in c]
        if len(set(flat)) != len(flat):
            raise InputError("classes overlap")
        cls = self.color
        for u, v in self.edges:
            if u not in cls or v not in cls:
                raise InputError(f"edge ({u}, {v}) uses a vertex outside the classes")
            if cls[u] == cls[v]:
                raise InputError(f"edge ({u}, {v}) joins a class to itself")

    @property
    def n(self) -> int:
        return len(self.classes[0])

    @property
    def color(self) -> dict:
        return {v: i for i, c in enumerate(self.classes) for v in c}

    @classmethod
    def padded(cls, k, classes, edges):
        """Pad smaller classes with fresh isolated dummy vertices."""
        n = max(2, max(len(c) for c in classes))
        nxt = max((v for c in classes for v in c), default=-1) + 1
        out = []
        for c in classes:
            c = list(c)
            while len(c) < n:
                c.append(nxt)
                nxt += 1
            out.append(c)
        return cls(k, out, edges)

    def to_dict(self):
        return {"k": self.k, "classes": self.classes, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls.padded(int(data["k"]), data["classes"], data.get("edges", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed clique instance: {exc}") from exc


def read_mcc(path) -> MCCInstance:
    try:
        return MCCInstance.from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}") from exc


def has_multicolored_clique(mcc: MCCInstance):
    """Brute force over one vertex per class; returns the clique (class order) or None."""
    adj = {frozenset(e) for e in mcc.edges}
    for pick in itertools.product(*mcc.classes):
        if all(frozenset((a, b)) in adj for a, b in itertools.combinations(pick, 2)):
            return pick
    return None


@dataclass
class GadgetOutput:
    """The routing instance, the target path count and the role of every vertex.

    Classes are numbered 1..k in roles, matching the usual indexing; ``x``
    maps (i, v, j) to the vertex of X_v^i at index j, ``cut_set`` maps (i, j)
    to the hub vertex joining classes i < j.
    """

    instance: Instance
    ell: int
    roles: dict
    x: dict
    s: dict
    t: dict
    cut_set: dict
    u: dict
    st_pairs: dict
    x_pairs: dict = field(default_factory=dict)
    mcc: MCCInstance | None = None

    def role_table(self) -> dict:
        return {str(v): name for v, name in sorted(self.roles.items())}


def build_gadget(mcc: MCCInstance) -> GadgetOutput:
    k = mcc.k
    roles, x, s, t, hub, u = {}, {}, {}, {}, {}, {}
    edges = []
    nxt = 0

    def new(name):
        nonlocal nxt
        roles[nxt] = name
        nxt += 1
        return nxt - 1

    for i in range(1, k + 1):
        idx = [j for j in range(1, k + 1) if j != i]
        for v in mcc.classes[i - 1]:
            prev = None
            for j in idx:
                w = new(f"x^{i}_{v},{j}")
                x[(i, v, j)] = w
                if prev is not None:
                    edges.append((prev, w))
                prev = w
        u[i] = min(mcc.classes[i - 1])
    pairs = {}
    st_pairs = {}
    for i in range(1, k + 1):
        first = 2 if i == 1 else 1
        last = k - 1 if i == k else k
        ui = u[i]
        for v in sorted(mcc.classes[i - 1]):
            if v == ui:
                continue
            sv = new(f"s^{i}_{v}")
            tv = new(f"t^{i}_{v}")
            s[(i, v)], t[(i, v)] = sv, tv
            edges += [(sv, x[(i, v, first)]), (sv, x[(i, ui, first)])]
            edges += [(tv, x[(i, v, last)]), (tv, x[(i, ui, last)])]
            pid = len(pairs)
            pairs[pid] = (sv, tv)
            st_pairs[pid] = (i, v)
    for i, j in itertools.combinations(range(1, k + 1), 2):
        p = new(f"p_{i},{j}")
        hub[(i, j)] = p
        edges += [(p, x[(i, v, j)]) for v in mcc.classes[i - 1]]
        edges += [(p, x[(j, w, i)]) for w in mcc.classes[j - 1]]
    color = mcc.color
    x_pairs = {}
    for a, b in sorted(mcc.edges, key=lambda e: tuple(sorted(e))):
        i, j = color[a] + 1, color[b] + 1
        if i > j:
            a, b, i, j = b, a, j, i
        pid = len(pairs)
        pairs[pid] = (x[(i, a, j)], x[(j, b, i)])
        x_pairs[pid] = (a, b)
    g = CapGraph.build(range(nxt), edges, {v: 1 for v in range(nxt)})
    inst = Instance(g, pairs, Mode.NDP, labels=dict(roles))
    ell = k * (mcc.n - 1) + comb(k, 2)
    out = GadgetOutput(inst, ell, roles, x, s, t, hub, u, st_pairs, x_pairs, mcc)
    expected = k * (mcc.n * (k - 1) + 2 * (mcc.n - 1)) + comb(k, 2)
    if g.n != expected:
        raise AssertionError(f"gadget has {g.n} vertices, closed form gives {expected}")
    return out


def clique_to_routing(out: GadgetOutput, clique) -> Routing:
    """The explicit family of ell disjoint paths for a clique given as one vertex per class (class order)."""
    mcc = out.mcc
    k = mcc.k
    if len(clique) != k:
        raise InputError(f"need one vertex per class, got {len(clique)}")
    for i, v in enumerate(clique, 1):
        if v not in mcc.classes[i - 1]:
            raise InputError(f"vertex {v} is not in class {i}")
    chosen = dict(enumerate(clique, 1))
    paths = {}
    for pid, (i, v) in out.st_pairs.items():
        via = out.u[i] if v == chosen[i] else v
        idx = [j for j in range(1, k + 1) if j != i]
        paths[pid] = (out.s[(i, v)],) + tuple(out.x[(i, via, j)] for j in idx) + (out.t[(i, v)],)
    lookup = {}
    for pid, (a, b) in out.x_pairs.items():
        lookup[frozenset((a, b))] = pid
    for i, j in itertools.combinations(range(1, k + 1), 2):
        a, b = chosen[i], chosen[j]
        pid = lookup.get(frozenset((a, b)))
        if pid is None:
            raise InputError(f"({a}, {b}) is not an edge, so the input is not a clique")
        paths[pid] = (out.x[(i, a, j)], out.cut_set[(i, j)], out.x[(j, b, i)])
    routing = assert_feasible(Routing(paths), out.instance)
    if routing.size != out.ell:
        raise AssertionError(f"built {routing.size} paths, expected {out.ell}")
    return routing


def verify_equivalence(mcc: MCCInstance, *, max_vertices: int = 40, max_ell: int = 8) -> bool:
    """Exhaustive check that ell disjoint paths exist iff a multicolored clique exists."""
    out = build_gadget(mcc)
    if out.instance.graph.n > max_vertices or out.ell > max_ell:
        raise ValueError(f"gadget too large for exhaustive search: |V|={out.instance.graph.n}, ell={out.ell}")
    value, _ = exact_maxndp(out.instance, max_vertices=max_vertices, max_pairs=max(out.instance.k, 1), target=out.ell)
    routable = value >= out.ell
    clique = has_multicolored_clique(mcc)
    return routable == (clique is not None)


# ---------------------------------------------------------------- structural checks


def _bfs_dist(g: CapGraph, s, t, allowed) -> int | None:
    dist = {s: 1}
    q = deque([s])
    while q:
        v = q.popleft()
        if v == t:
            return dist[v]
        for w in g.adj[v]:
            if w in allowed and w not in dist:
                dist[w] = dist[v] + 1
                q.append(w)
    return None


def gadget_components(out: GadgetOutput) -> list:
    """Vertex sets of the class gadgets (the components left after deleting the hubs)."""
    hubs = set(out.cut_set.values())
    g = out.instance.graph
    rest = g.vertices - hubs
    seen, comps = set(), []
    for v in sorted(rest):
        if v in seen:
            continue
        comp, q = {v}, deque([v])
        while q:
            a = q.popleft()
            for w in g.adj[a]:
                if w in rest and w not in comp:
                    comp.add(w)
                    q.append(w)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def check_structure(out: GadgetOutput) -> list:
    """Shortest-path lengths and hub separation; returns the violated facts."""
    g = out.instance.graph
    k = out.mcc.k
    bad = []
    hubs = set(out.cut_set.values())
    comps = gadget_components(out)
    where = {v: c for c in comps for v in c}
    for pid, _ in out.st_pairs.items():
        s, t = out.instance.pairs[pid]
        dist = _bfs_dist(g, s, t, where[s])
        if dist != k + 1:
            bad.append(("st path length", pid, dist))
    for pid in out.x_pairs:
        s, t = out.instance.pairs[pid]
        if _bfs_dist(g, s, t, g.vertices) != 3:
            bad.append(("x path length", pid))
        if _bfs_dist(g, s, t, g.vertices - hubs) is not None:
            bad.append(("hubs do not separate", pid))
    if len(comps) != k:
        bad.append(("gadget count", len(comps)))
    return bad


# ---------------------------------------------------------------- treedepth


def is_elimination_forest(g: CapGraph, parent: dict) -> bool:
    """Every edge joins a vertex to one of its ancestors."""
    if set(parent) != set(g.vertices):
        return False

    def ancestors(v):
        out = set()
        while parent[v] is not None:
            v = parent[v]
            if v in out:
                return None
            out.add(v)
        return out

    anc = {}
    for v in g.vertices:
        a = ancestors(v)
        if a is None:
            return False
        anc[v] = a
    return all(u in anc[v] or v in anc[u] for u, v in g.edges)


def forest_depth(parent: dict) -> int:
    depth = {}

    def d(v):
        if v not in depth:
            depth[v] = 1 if parent[v] is None else 1 + d(parent[v])
        return depth[v]

    return max((d(v) for v in parent), default=0)


def _chain(order, top, parent):
    for v in order:
        parent[v] = top
        top = v
    return top


def _path_halving(vertices, adj, top, parent):
    """Eliminate a path by repeatedly removing its middle vertex."""
    order = [v for v in vertices]
    if not order:
        return
    # walk the path from one end
    ends = [v for v in order if sum(1 for w in adj[v] if w in vertices) <= 1]
    start = min(ends) if ends else min(order)
    line, seen = [start], {start}
    while True:
        nxt = [w for w in adj[line[-1]] if w in vertices and w not in seen]
        if not nxt:
            break
        line.append(nxt[0])
        seen.add(nxt[0])

    def rec(seg, top):
        if not seg:
            return
        mid = len(seg) // 2
        parent[seg[mid]] = top
        rec(seg[:mid], seg[mid])
        rec(seg[mid + 1 :], seg[mid])

    rec(line, top)


def treedepth_witness(out: GadgetOutput):
    """Elimination forest from the hub set, then two path ends per gadget, then the leftover paths.

    Returns ``(depth, parent map)``; the depth is asserted to be at most
    C(k,2) + k + 3 and the forest is validated edge by edge.
    """
    g = out.instance.graph
    k = out.mcc.k
    parent = {}
    top = _chain([out.cut_set[key] for key in sorted(out.cut_set)], None, parent)
    idx = {i: [j for j in range(1, k + 1) if j != i] for i in range(1, k + 1)}
    for comp in gadget_components(out):
        i = next(i for i in range(1, k + 1) if out.x[(i, out.u[i], idx[i][0])] in comp)
        ends = [out.x[(i, out.u[i], idx[i][0])], out.x[(i, out.u[i], idx[i][-1])]]
        ends = list(dict.fromkeys(ends))
        ctop = _chain(ends, top, parent)
        rest = comp - set(ends)
        seen = set()
        for v in sorted(rest):
            if v in seen:
                continue
            piece, q = {v}, deque([v])
            while q:
                a = q.popleft()
                for w in g.adj[a]:
                    if w in rest and w not in piece:
                        piece.add(w)
                        q.append(w)
            seen |= piece
            if len(piece) > k + 1:
                raise AssertionError(f"leftover piece has {len(piece)} > k+1 vertices")
            _path_halving(piece, g.adj, ctop, parent)
    if not is_elimination_forest(g, parent):
        raise AssertionError("witness is not an elimination forest")
    depth = forest_depth(parent)
    limit = comb(k, 2) + k + 3
    if depth > limit:
        raise AssertionError(f"witness depth {depth} exceeds {limit}")
    return depth, parent


def treedepth_exact(g: CapGraph, limit: int = 16) -> int:
    """Treedepth by the recursive definition (exponential; tiny graphs only)."""
    if g.n > limit:
        raise ValueError(f"exact treedepth is limited to {limit} vertices")
    adj = {v: frozenset(g.adj[v]) for v in g.vertices}

    def comps(vs):
        out, seen = [], set()
        for v in sorted(vs):
            if v in seen:
                continue
            c, q = {v}, [v]
            while q:
                a = q.pop()
                for w in adj[a]:
                    if w in vs and w not in c:
                        c.add(w)
                        q.append(w)
            seen |= c
            out.append(frozenset(c))
        return out

    @lru_cache(maxsize=None)
    def td(vs):
        if not vs:
            return 0
        cs = comps(vs)
        if len(cs) > 1:
            return max(td(c) for c in cs)
        return 1 + min(td(vs - {v}) for v in vs)

    return td(frozenset(g.vertices))
