"""Rooted tree and path decompositions."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .graph import CapGraph, InputError, Instance, ekey, induced_subgraph


class DecompositionError(InputError):
    def __init__(self, prop: str, witness):
        super().__init__(f"{prop}: {witness}")
        self.prop = prop
        self.witness = witness


class RootedDecomposition:
    """A rooted tree (or path) of bags.

    ``parent`` maps each node to its parent (``None`` at the root).  Derived
    maps (children, depth, parent adhesions ``sigma``, cones ``gamma`` and
    ``alpha = gamma - sigma``) are computed lazily and cached.
    """

    def __init__(self, parent: Mapping[int, int | None], bags: Mapping[int, Iterable[int]]):
        self.parent = dict(parent)
        self.bags = {t: frozenset(b) for t, b in bags.items()}
        if set(self.parent) != set(self.bags):
            raise InputError("parent map and bag map disagree on the node set")
        roots = [t for t, p in self.parent.items() if p is None]
        if len(self.bags) and len(roots) != 1:
            raise InputError(f"expected exactly one root, found {roots}")
        self.root = roots[0] if roots else None
        for t, p in self.parent.items():
            if p is not None and p not in self.bags:
                raise InputError(f"node {t} has unknown parent {p}")
        if len(self.preorder) != len(self.bags):
            raise InputError("parent map contains a cycle")

    def __repr__(self):
        return f"RootedDecomposition(nodes={len(self.bags)}, width={self.width}, path={self.is_path})"

    @property
    def nodes(self):
        return self.bags.keys()

    @cached_property
    def children(self) -> dict[int, tuple[int, ...]]:
        ch: dict[int, list[int]] = {t: [] for t in self.bags}
        for t, p in self.parent.items():
            if p is not None:
                ch[p].append(t)
        return {t: tuple(sorted(c)) for t, c in ch.items()}

    @cached_property
    def preorder(self) -> tuple[int, ...]:
        if self.root is None:
            return ()
        ch: dict[int, list[int]] = {t: [] for t in self.bags}
        for t, p in self.parent.items():
            if p is not None and p in ch:
                ch[p].append(t)
        order, stack, seen = [], [self.root], set()
        while stack:
            t = stack.pop()
            if t in seen:
                break
            seen.add(t)
            order.append(t)
            stack.extend(sorted(ch[t], reverse=True))
        return tuple(order)

    @cached_property
    def depth(self) -> dict[int, int]:
        d = {}
        for t in self.preorder:
            p = self.parent[t]
            d[t] = 0 if p is None else d[p] + 1
        return d

    @cached_property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    @cached_property
    def is_path(self) -> bool:
        return all(len(c) <= 1 for c in self.children.values())

    @cached_property
    def sigma(self) -> dict[int, frozenset]:
        return {
            t: frozenset() if p is None else self.bags[t] & self.bags[p]
            for t, p in self.parent.items()
        }

    @cached_property
    def gamma(self) -> dict[int, frozenset]:
        out: dict[int, frozenset] = {}
        for t in reversed(self.preorder):
            acc = set(self.bags[t])
            for c in self.children[t]:
                acc |= out[c]
            out[t] = frozenset(acc)
        return out

    @cached_property
    def alpha(self) -> dict[int, frozenset]:
        return {t: self.gamma[t] - self.sigma[t] for t in self.bags}

    def is_descendant(self, s: int, t: int) -> bool:
        """s is a (non-strict) descendant of t."""
        while s is not None:
            if s == t:
                return True
            s = self.parent[s]
        return False

    def restricted(self, vertices: Iterable[int]) -> "RootedDecomposition":
        """Same tree, every bag intersected with ``vertices``."""
        vs = frozenset(vertices)
        return RootedDecomposition(self.parent, {t: b & vs for t, b in self.bags.items()})


def adhesion_maps(d: RootedDecomposition):
    return d.sigma, d.gamma, d.alpha


def subgraph_at(d: RootedDecomposition, g: CapGraph, t: int) -> CapGraph:
    """G(t): the graph induced on gamma(t) minus the edges inside sigma(t)."""
    sub = induced_subgraph(g, d.gamma[t])
    sig = d.sigma[t]
    if len(sig) < 2:
        return sub
    return sub.without_edges(e for e in sub.edges if e[0] in sig and e[1] in sig)


def validate(d: RootedDecomposition, g: CapGraph, r: int | None = None) -> int:
    """Check both decomposition properties; return the width."""
    where: dict[int, list[int]] = {v: [] for v in g.vertices}
    for t, bag in d.bags.items():
        for v in bag:
            if v not in where:
                raise DecompositionError("unknown vertex in bag", (t, v))
            where[v].append(t)
    for u, v in g.edges:
        if not any(v in d.bags[t] for t in where[u]):
            raise DecompositionError("uncovered edge", (u, v))
    for v, ts in where.items():
        if not ts:
            raise DecompositionError("vertex in no bag", v)
        # occurrences are connected iff exactly one of them has its parent outside the set
        occ = set(ts)
        tops = [t for t in ts if d.parent[t] not in occ]
        if len(tops) != 1:
            raise DecompositionError("disconnected occurrence set", (v, sorted(ts)))
    width = d.width
    if r is not None and width >= r:
        raise DecompositionError("width not below r", (width, r))
    return width


def remove_empty_bags(d: RootedDecomposition) -> RootedDecomposition:
    """Delete empty bags, re-attaching children to their nearest nonempty ancestor."""
    keep = [t for t in d.preorder if d.bags[t]]
    if not keep:
        return RootedDecomposition({}, {})
    keep_set = set(keep)
    parent: dict[int, int | None] = {}
    for t in keep:
        p = d.parent[t]
        while p is not None and p not in keep_set:
            p = d.parent[p]
        parent[t] = p
    roots = [t for t in keep if parent[t] is None]
    # disjoint nonempty subtrees share no vertex, so hanging them under the first root is safe
    for extra in roots[1:]:
        parent[extra] = roots[0]
    return RootedDecomposition(parent, {t: d.bags[t] for t in keep})


def preprocess(instance: Instance, d: RootedDecomposition, f=None):
    """Split into connected components with their own decompositions and flows.

    Empty bags are removed and each component's root moves to its topmost
    nonempty bag.  Components without any pair or flow are still returned.
    """
    from .pathflow import PathFlow

    f = f if f is not None else PathFlow()
    out = []
    for comp in instance.graph.components():
        sub = instance.restricted(induced_subgraph(instance.graph, comp))
        sd = remove_empty_bags(d.restricted(comp))
        out.append((sub, sd, f.restrict_to_vertices(comp)))
    return out


def torso(d: RootedDecomposition, g: CapGraph, t: int) -> CapGraph:
    bag = d.bags[t]
    sub = induced_subgraph(g, bag)
    adhesions = [d.sigma[t]] + [d.sigma[c] for c in d.children[t]]
    extra = []
    for adh in adhesions:
        for u, v in itertools.combinations(sorted(adh), 2):
            if not sub.has_edge(u, v):
                extra.append((u, v, 1))
    if not extra:
        return sub
    return CapGraph.build(sub.vertices, [(u, v, c) for (u, v), c in sub.edges.items()] + extra, sub.node_caps)


def attach_leaves(d: RootedDecomposition, leaves: list[tuple[int, int]]) -> RootedDecomposition:
    """Extend ``d`` to cover new degree-1 vertices ``leaf`` hanging off ``v``.

    Tree decompositions get a child bag ``{v, leaf}``.  Path decompositions get
    the new bag spliced into the path where it adds the fewest vertices, which
    may raise the width by one.
    """
    if d.root is None:
        raise InputError("cannot attach leaves to an empty decomposition")
    parent = dict(d.parent)
    bags = {t: set(b) for t, b in d.bags.items()}
    nxt = max(bags) + 1
    path_mode = d.is_path
    for leaf, v in leaves:
        if not path_mode:
            host = min(t for t, b in bags.items() if v in b)
            parent[nxt] = host
            bags[nxt] = {v, leaf}
            nxt += 1
            continue
        order = _path_order(parent)
        best = None
        for i, t in enumerate(order):
            if v not in bags[t]:
                continue
            if i == 0:
                cand = ({v, leaf}, ("before", t))
                best = cand if best is None or len(cand[0]) < len(best[0]) else best
            nxt_node = order[i + 1] if i + 1 < len(order) else None
            bag = {v, leaf} | (bags[t] & bags[nxt_node] if nxt_node is not None else set())
            cand = (bag, ("after", t))
            if best is None or len(cand[0]) < len(best[0]):
                best = cand
        if best is None:
            raise InputError(f"vertex {v} occurs in no bag")
        bag, (where, t) = best
        if where == "before":
            parent[t] = nxt
            parent[nxt] = None
        else:
            for c, p in list(parent.items()):
                if p == t:
                    parent[c] = nxt
            parent[nxt] = t
        bags[nxt] = bag
        nxt += 1
    return RootedDecomposition(parent, bags)


def _path_order(parent: Mapping[int, int | None]) -> list[int]:
    child = {p: c for c, p in parent.items() if p is not None}
    t = next(t for t, p in parent.items() if p is None)
    order = [t]
    while t in child:
        t = child[t]
        order.append(t)
    return order


# --------------------------------------------------------------------------- heuristics


def min_fill_order(g: CapGraph) -> list[int]:
    nbrs = {v: set(g.adj[v]) for v in g.vertices}
    order = []
    while nbrs:
        best, best_key = None, None
        for v in sorted(nbrs):
            ns = nbrs[v]
            fill = sum(1 for a, b in itertools.combinations(ns, 2) if b not in nbrs[a])
            key = (fill, len(ns), v)
            if best_key is None or key < best_key:
                best, best_key = v, key
        ns = nbrs.pop(best)
        for a in ns:
            nbrs[a].discard(best)
            nbrs[a] |= ns - {a}
        order.append(best)
    return order


def decomposition_from_order(g: CapGraph, order: list[int]) -> RootedDecomposition:
    """Tree decomposition from an elimination ordering."""
    if not order:
        return RootedDecomposition({0: None}, {0: ()})
    pos = {v: i for i, v in enumerate(order)}
    nbrs = {v: set(g.adj[v]) for v in g.vertices}
    bags: dict[int, frozenset] = {}
    later: dict[int, set] = {}
    for v in order:
        ns = nbrs.pop(v)
        for a in ns:
            nbrs[a].discard(v)
            nbrs[a] |= ns - {a}
        bags[v] = frozenset(ns | {v})
        later[v] = ns
    parent_v: dict[int, int | None] = {}
    for v in order:
        parent_v[v] = min(later[v], key=pos.__getitem__) if later[v] else None
    roots = [v for v in order if parent_v[v] is None]
    top = roots[-1]
    for v in roots[:-1]:
        parent_v[v] = top
    # merge bags contained in their parent, bottom-up
    for v in order:
        p = parent_v[v]
        if p is not None and bags[v] <= bags[p]:
            for c in [c for c, q in parent_v.items() if q == v]:
                parent_v[c] = p
            del parent_v[v]
    ids = {v: i + 1 for i, v in enumerate(sorted(parent_v, key=lambda v: -pos[v]))}
    return RootedDecomposition(
        {ids[v]: (ids[p] if p is not None else None) for v, p in parent_v.items()},
        {ids[v]: bags[v] for v in parent_v},
    )


def path_decomposition_from_order(g: CapGraph, order: list[int]) -> RootedDecomposition:
    if not order:
        return RootedDecomposition({0: None}, {0: ()})
    pos = {v: i for i, v in enumerate(order)}
    end = {v: max([pos[v]] + [pos[w] for w in g.adj[v]]) for v in order}
    raw = [frozenset(v for v in order if pos[v] <= i <= end[v]) for i in range(len(order))]
    bags: list[frozenset] = []
    for b in raw:
        if bags and b <= bags[-1]:
            continue
        while bags and bags[-1] <= b:
            bags.pop()
        bags.append(b)
    parent = {i + 1: (i if i else None) for i in range(len(bags))}
    return RootedDecomposition(parent, {i + 1: b for i, b in enumerate(bags)})


def heuristic_decomposition(g: CapGraph, want_path: bool = False) -> RootedDecomposition:
    """Min-fill tree decomposition, or the best of a few ordering-based path decompositions."""
    mf = min_fill_order(g)
    if not want_path:
        d = decomposition_from_order(g, mf)
    else:
        candidates = [mf, mf[::-1]]
        starts = sorted(g.vertices, key=lambda v: (g.degree(v), v))[:4]
        for s in starts:
            candidates.append(_bfs_order(g, s))
        d = min((path_decomposition_from_order(g, o) for o in candidates), key=lambda x: (x.width, len(x.bags)))
    validate(d, g)
    return d


def _bfs_order(g: CapGraph, start: int) -> list[int]:
    seen, order = set(), []
    for s in [start] + sorted(g.vertices):
        if s in seen:
            continue
        seen.add(s)
        q = deque([s])
        while q:
            v = q.popleft()
            order.append(v)
            for w in g.adj[v]:
                if w not in seen:
                    seen.add(w)
                    q.append(w)
    return order


# --------------------------------------------------------------------------- PACE .td


@dataclass
class TDFile:
    """A PACE-2017 ``.td`` document, kept in file order so it re-emits verbatim."""

    n_vertices: int
    bags: list[tuple[int, tuple[int, ...]]]
    edges: list[tuple[int, int]]
    declared_max: int | None = None
    comments: list[tuple[int, str]] = field(default_factory=list)

    @classmethod
    def parse(cls, text: str) -> "TDFile":
        header = None
        bags, edges, comments = [], [], []
        body = 0
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            tok = line.split()
            if tok[0] == "c":
                comments.append((body, line))
                continue
            body += 1
            if tok[0] == "s":
                if len(tok) != 5 or tok[1] != "td":
                    raise InputError(f"bad .td header: {line!r}")
                header = tuple(int(x) for x in tok[2:])
            elif tok[0] == "b":
                bags.append((int(tok[1]), tuple(int(x) for x in tok[2:])))
            else:
                if len(tok) != 2:
                    raise InputError(f"bad .td line: {line!r}")
                edges.append((int(tok[0]), int(tok[1])))
        if header is None:
            raise InputError("missing 's td' header")
        nb, maxb, n = header
        if nb != len(bags):
            raise InputError(f"header declares {nb} bags, found {len(bags)}")
        return cls(n, bags, edges, maxb, comments)

    def emit(self) -> str:
        maxb = self.declared_max
        if maxb is None:
            maxb = max((len(b) for _, b in self.bags), default=0)
        body = [f"s td {len(self.bags)} {maxb} {self.n_vertices}"]
        body += ["b " + " ".join(str(x) for x in (i, *b)) for i, b in self.bags]
        body += [f"{a} {b}" for a, b in self.edges]
        out, ci = [], 0
        for i, line in enumerate(body + [None]):
            while ci < len(self.comments) and self.comments[ci][0] <= i:
                out.append(self.comments[ci][1])
                ci += 1
            if line is not None:
                out.append(line)
        return "\n".join(out) + "\n"

    def to_decomposition(self, root: int | None = None, offset: int = 1) -> RootedDecomposition:
        """Root the tree; vertex ``v`` in the file becomes internal id ``v - offset``.

        Node 1 (or the first bag) is the root; when the tree is a path and that
        node is not an endpoint, the smallest-id endpoint is used instead.
        """
        ids = [i for i, _ in self.bags]
        if not ids:
            raise InputError("decomposition has no bags")
        nbr: dict[int, list[int]] = {i: [] for i in ids}
        for a, b in self.edges:
            if a not in nbr or b not in nbr:
                raise InputError(f"tree edge ({a}, {b}) names an unknown bag")
            nbr[a].append(b)
            nbr[b].append(a)
        if root is None:
            root = 1 if 1 in nbr else ids[0]
            if all(len(v) <= 2 for v in nbr.values()) and len(nbr[root]) > 1:
                root = min(i for i in ids if len(nbr[i]) <= 1)
        parent: dict[int, int | None] = {root: None}
        q = deque([root])
        while q:
            t = q.popleft()
            for c in nbr[t]:
                if c not in parent:
                    parent[c] = t
                    q.append(c)
        if len(parent) != len(ids) or len(self.edges) != len(ids) - 1:
            raise InputError("decomposition tree is not a tree")
        return RootedDecomposition(parent, {i: [v - offset for v in b] for i, b in self.bags})

    @classmethod
    def from_decomposition(cls, d: RootedDecomposition, n_vertices: int, offset: int = 1) -> "TDFile":
        bags = [(t, tuple(sorted(v + offset for v in d.bags[t]))) for t in sorted(d.bags)]
        edges = [(d.parent[t], t) for t in d.preorder if d.parent[t] is not None]
        return cls(n_vertices, bags, edges)


def read_td(path) -> RootedDecomposition:
    with open(path) as fh:
        return TDFile.parse(fh.read()).to_decomposition()


def write_td(d: RootedDecomposition, n_vertices: int, path) -> None:
    with open(path, "w") as fh:
        fh.write(TDFile.from_decomposition(d, n_vertices).emit())


def is_path_decomposition(d: RootedDecomposition) -> bool:
    return d.is_path


def edge_cover_check(d: RootedDecomposition, g: CapGraph) -> list[tuple[int, int]]:
    covered = set()
    for b in d.bags.values():
        for u, v in itertools.combinations(sorted(b), 2):
            covered.add(ekey(u, v))
    return [e for e in g.edges if e not in covered]
