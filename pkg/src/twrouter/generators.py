"""Seeded instance generators."""

from __future__ import annotations

import itertools
import random
from dataclasses import replace

from .decomp import RootedDecomposition, attach_leaves, heuristic_decomposition
from .graph import CapGraph, Instance, Mode


def gen_grid_gap(k: int) -> Instance:
    """k x k grid where every crossing is split into two degree-3 vertices.

    Grid vertex (i, j) becomes ``a`` (west and north edges) joined to ``b``
    (east and south edges).  Pair i starts on a leaf west of row i and ends on
    a leaf south of column i.  The canonical L-shaped paths (east along row i,
    then south along column i) meet pairwise on the a-b edges, so halving them
    sends 1/2 per pair and the LP is at least k/2.  The graph is planar with
    maximum degree 3 and all terminals sit on the outer face in crossing
    order, so no two pairs can be routed together.
    ``2k^2 + 2k`` vertices.
    """
    if k < 1:
        raise ValueError("k must be positive")

    def a(i, j):
        return 2 * (i * k + j)

    def b(i, j):
        return 2 * (i * k + j) + 1

    edges = []
    for i in range(k):
        for j in range(k):
            edges.append((a(i, j), b(i, j), 1))
            if j + 1 < k:
                edges.append((b(i, j), a(i, j + 1), 1))
            if i + 1 < k:
                edges.append((b(i, j), a(i + 1, j), 1))
    base = 2 * k * k
    pairs = {}
    for i in range(k):
        s, t = base + 2 * i, base + 2 * i + 1
        edges.append((s, a(i, 0), 1))
        edges.append((t, b(k - 1, i), 1))
        pairs[i] = (s, t)
    g = CapGraph.build(range(base + 2 * k), edges)
    labels = {}
    for i in range(k):
        for j in range(k):
            labels[a(i, j)] = f"a{i}_{j}"
            labels[b(i, j)] = f"b{i}_{j}"
        labels[base + 2 * i] = f"s{i}"
        labels[base + 2 * i + 1] = f"t{i}"
    return Instance(g, pairs, Mode.EDP, labels=labels)


def grid_gap_canonical_paths(k: int) -> dict[int, tuple[int, ...]]:
    """The L-shaped path of every pair in :func:`gen_grid_gap`."""
    base = 2 * k * k
    out = {}
    for i in range(k):
        path = [base + 2 * i]
        for j in range(i + 1):
            path += [2 * (i * k + j), 2 * (i * k + j) + 1]
        for row in range(i + 1, k):
            path += [2 * (row * k + i), 2 * (row * k + i) + 1]
        path.append(base + 2 * i + 1)
        out[i] = tuple(path)
    return out


def gen_partial_ktree(n: int, width: int, k_pairs: int, seed: int, keep: float = 0.75, max_cap: int = 3):
    """Random partial ``width``-tree with its natural tree decomposition.

    Start from a (width+1)-clique; every further vertex is joined to a random
    width-clique created earlier.  Edges are then kept with probability
    ``keep`` and given capacities in [1, max_cap]; terminals are 2*k_pairs
    distinct random vertices.  Returns ``(Instance, RootedDecomposition)``.
    """
    rng = random.Random(seed)
    n = max(n, width + 1)
    first = list(range(width + 1))
    all_edges = set(itertools.combinations(first, 2))
    bags = {1: frozenset(first)}
    parent = {1: None}
    cliques = [(frozenset(c), 1) for c in itertools.combinations(first, width)] if width > 0 else [(frozenset(), 1)]
    for v in range(width + 1, n):
        clique, host = cliques[rng.randrange(len(cliques))]
        node = len(bags) + 1
        bags[node] = clique | {v}
        parent[node] = host
        for u in clique:
            all_edges.add((u, v))
        if width > 0:
            for u in clique:
                cliques.append((clique - {u} | {v}, node))
        else:
            cliques.append((frozenset(), node))
    edges = [(u, v, rng.randint(1, max_cap)) for u, v in sorted(all_edges) if rng.random() < keep]
    g = CapGraph.build(range(n), edges)
    k_pairs = min(k_pairs, n // 2)
    terms = rng.sample(range(n), 2 * k_pairs)
    pairs = {i: (terms[2 * i], terms[2 * i + 1]) for i in range(k_pairs)}
    return Instance(g, pairs, Mode.EDP), RootedDecomposition(parent, bags)


def gen_pathwidth_ndp(n_core: int, width: int, k_pairs: int, seed: int, caterpillar: bool = False, max_cap: int = 2):
    """Random node-capacitated instance with a path decomposition of width <= ``width``.

    The core is built on vertices 0..n_core-1 where each vertex links to a
    random subset of the previous ``width - 1`` vertices (a caterpillar when
    ``caterpillar``: a spine with pendant legs).  Every terminal is a fresh
    capacity-1 leaf hanging off a core vertex.  Returns ``(Instance, decomposition)``.
    """
    rng = random.Random(seed)
    core_w = max(1, width - 1)
    edges = []
    if caterpillar:
        spine = max(2, n_core // 2)
        for v in range(1, spine):
            edges.append((v - 1, v))
        legs = []
        for v in range(spine, n_core):
            host = rng.randrange(spine)
            edges.append((host, v))
            legs.append((host, v))
        # bags: {i, i+1} along the spine, leg bags {host, leg} spliced after the host
        parent, bags = {}, {}
        node = 0
        prev = None
        for i in range(spine):
            for host, leg in legs:
                if host == i:
                    node += 1
                    bags[node] = frozenset({i, leg})
                    parent[node] = prev
                    prev = node
            if i + 1 < spine:
                node += 1
                bags[node] = frozenset({i, i + 1})
                parent[node] = prev
                prev = node
        if not bags:
            bags[1] = frozenset({0})
            parent[1] = None
        d = RootedDecomposition(parent, bags)
    else:
        for v in range(1, n_core):
            lo = max(0, v - core_w)
            nbrs = [u for u in range(lo, v) if rng.random() < 0.6]
            if not nbrs:
                nbrs = [v - 1]
            edges += [(u, v) for u in nbrs]
        bags = {}
        parent = {}
        for v in range(n_core):
            bags[v + 1] = frozenset(range(max(0, v - core_w), v + 1))
            parent[v + 1] = v if v else None
        d = RootedDecomposition(parent, bags)
    caps = {v: rng.randint(1, max_cap) for v in range(n_core)}
    k_pairs = min(k_pairs, n_core)
    hosts = [rng.randrange(n_core) for _ in range(2 * k_pairs)]
    leaves = []
    nxt = n_core
    pairs = {}
    for i in range(k_pairs):
        ends = []
        for h in hosts[2 * i : 2 * i + 2]:
            edges.append((nxt, h))
            caps[nxt] = 1
            leaves.append((nxt, h))
            ends.append(nxt)
            nxt += 1
        pairs[i] = tuple(ends)
    g = CapGraph.build(range(nxt), edges, caps)
    d = attach_leaves(d, leaves)
    return Instance(g, pairs, Mode.NDP), d


def random_instance_with_decomposition(n, m, k_pairs, seed, mode=Mode.EDP, want_path=False):
    """Small random connected-ish graph plus a heuristic decomposition (for property tests)."""
    rng = random.Random(seed)
    m = min(m, n * (n - 1) // 2)
    edges = set()
    for v in range(1, n):
        edges.add((rng.randrange(v), v))
    while len(edges) < m:
        u, v = rng.sample(range(n), 2)
        edges.add((min(u, v), max(u, v)))
    g = CapGraph.build(range(n), [(u, v, rng.randint(1, 2)) for u, v in sorted(edges)],
                       {v: rng.randint(1, 2) for v in range(n)} if Mode(mode) is Mode.NDP else None)
    terms = rng.sample(range(n), 2 * min(k_pairs, n // 2))
    pairs = {i: (terms[2 * i], terms[2 * i + 1]) for i in range(len(terms) // 2)}
    return Instance(g, pairs, mode), heuristic_decomposition(g, want_path)


def gen_unsafe_blob(seed: int, width: int = 2, n_base: int = 12, blob_pairs: int | None = None, mode=Mode.EDP, path: bool = False):
    """Instance with a dense cluster of short pairs behind a capacity-1 bridge.

    A random tree ("blob") whose pairs are adjacent vertices hangs off a
    partial ``width``-tree through one bridge edge.  With enough blob pairs the
    node whose bag is the bridge is unsafe.  Returns ``(Instance,
    RootedDecomposition, PathFlow)`` where the flow routes every blob pair
    along its edge.  With ``path`` the base and the blob are paths and the
    decomposition is a path decomposition rooted at an end.  Node mode sets
    every capacity to 1 and moves terminals onto leaves as the router does,
    so no terminal sits in an adhesion.
    """
    from .graph import attach_terminal_leaves
    from .pathflow import PathFlow
    from .router import lift_to_leaves

    rng = random.Random(seed)
    if path:
        bg = CapGraph.build(range(n_base), [(i, i + 1, 1) for i in range(n_base - 1)])
        base = Instance(bg, {}, Mode.EDP)
        bd = RootedDecomposition(
            {i + 1: (i if i else None) for i in range(max(1, n_base - 1))},
            {i + 1: frozenset({i, min(i + 1, n_base - 1)}) for i in range(max(1, n_base - 1))},
        )
        width = 1
    else:
        base, bd = gen_partial_ktree(n_base, width, 0, seed, keep=1.0)
    ndp = Mode(mode) is Mode.NDP
    # leaves can raise the width by one in node mode
    r = width + 2 if ndp else width + 1
    if blob_pairs is None:
        blob_pairs = 2 * r + 1 + rng.randrange(3)
    start = base.graph.n
    m = 2 * blob_pairs
    blob = list(range(start, start + m))
    edges = [(u, v, c) for (u, v), c in base.graph.edges.items()]
    parent_of = {}
    pairs, flow = {}, []
    # pair i is the edge (blob[2i], blob[2i+1]); pairs hang off earlier blob vertices
    for i in range(blob_pairs):
        a, b = blob[2 * i], blob[2 * i + 1]
        edges.append((a, b, rng.randint(1, 2)))
        parent_of[b] = a
        if i:
            host = blob[2 * i - 1] if path else blob[rng.randrange(2 * i)]
            edges.append((host, a, rng.randint(1, 2)))
            parent_of[a] = host
        pairs[i] = (a, b)
        flow.append((i, (a, b), 1.0))
    anchor = start - 1 if path else rng.randrange(start)
    edges.append((anchor, blob[0], 1))
    g = CapGraph.build(range(start + m), edges)
    bags = dict(bd.bags)
    parent = dict(bd.parent)
    host_node = max(bags) if path else min(t for t, bag in bags.items() if anchor in bag)
    nid = max(bags) + 1
    bags[nid] = frozenset({anchor, blob[0]})
    parent[nid] = host_node
    node_of = {blob[0]: nid}
    for v in blob[1:]:
        nid += 1
        p = parent_of[v]
        bags[nid] = frozenset({p, v})
        parent[nid] = node_of[p]
        node_of[v] = nid
    d = RootedDecomposition(parent, bags)
    if not ndp:
        return Instance(g, pairs, mode), d, PathFlow(flow)
    g = CapGraph.build(g.vertices, [(u, v, 1) for (u, v) in g.edges], {v: 1 for v in g.vertices})
    inst = Instance(g, pairs, Mode.NDP)
    leafed, d = attach_terminal_leaves(inst, d)
    f = lift_to_leaves(PathFlow(flow), inst, leafed)
    # the leaves are the terminals of the generated instance
    return replace(leafed, terminal_origin={}), d, f
