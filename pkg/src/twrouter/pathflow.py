"""Multicommodity flows in path form."""

from __future__ import annotations

from collections import defaultdict
from functools import cached_property
from typing import Callable, Iterable, NamedTuple

from . import _config
from .graph import CapGraph, Mode, ekey


class FlowPath(NamedTuple):
    commodity: object
    path: tuple
    weight: float


class FlowError(ValueError):
    """A flow violates capacities or its own bookkeeping."""


class PathFlow:
    """Weighted paths grouped by commodity.

    A commodity is a pair id for the main flow and the source vertex for the
    single-sink auxiliary flows.  Identical (commodity, path) entries are merged
    and zero-weight entries dropped on construction.
    """

    def __init__(self, entries: Iterable = ()):
        acc: dict[tuple, float] = {}
        order: list[tuple] = []
        for e in entries:
            c, p, w = e
            p = tuple(p)
            if w < 0:
                raise FlowError(f"negative weight {w} on {p}")
            key = (c, p)
            if key not in acc:
                acc[key] = 0.0
                order.append(key)
            acc[key] += float(w)
        self.entries: tuple[FlowPath, ...] = tuple(
            FlowPath(c, p, acc[(c, p)]) for c, p in order if acc[(c, p)] > 0
        )

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __bool__(self):
        return bool(self.entries)

    def __repr__(self):
        return f"PathFlow(paths={len(self.entries)}, value={self.value:.6g})"

    @cached_property
    def value(self) -> float:
        return sum(e.weight for e in self.entries)

    @cached_property
    def marginals(self) -> dict[int, float]:
        """x(v): total weight of paths having v as an endpoint (a closed path counts twice)."""
        x: dict[int, float] = defaultdict(float)
        for _, p, w in self.entries:
            x[p[0]] += w
            x[p[-1]] += w
        return dict(x)

    @cached_property
    def sources(self) -> dict[int, float]:
        out: dict[int, float] = defaultdict(float)
        for _, p, w in self.entries:
            out[p[0]] += w
        return dict(out)

    @cached_property
    def sinks(self) -> dict[int, float]:
        out: dict[int, float] = defaultdict(float)
        for _, p, w in self.entries:
            out[p[-1]] += w
        return dict(out)

    @cached_property
    def commodity_values(self) -> dict[object, float]:
        out: dict[object, float] = defaultdict(float)
        for c, _, w in self.entries:
            out[c] += w
        return dict(out)

    @cached_property
    def edge_loads(self) -> dict[tuple[int, int], float]:
        load: dict[tuple[int, int], float] = defaultdict(float)
        for _, p, w in self.entries:
            for a, b in zip(p, p[1:]):
                load[ekey(a, b)] += w
        return dict(load)

    @cached_property
    def vertex_loads(self) -> dict[int, float]:
        load: dict[int, float] = defaultdict(float)
        for _, p, w in self.entries:
            for v in set(p):
                load[v] += w
        return dict(load)

    @cached_property
    def vertices(self) -> frozenset:
        return frozenset(v for _, p, _ in self.entries for v in p)

    # algebra ------------------------------------------------------------

    def scale(self, c: float) -> "PathFlow":
        if c < 0:
            raise FlowError("negative scale factor")
        return PathFlow((e.commodity, e.path, e.weight * c) for e in self.entries)

    def __add__(self, other: "PathFlow") -> "PathFlow":
        return PathFlow(list(self.entries) + list(other.entries))

    add = __add__

    def subtract(self, other: "PathFlow", eps: float | None = None) -> "PathFlow":
        """self - other; ``other`` must be a subflow of self."""
        eps = _config.EPS if eps is None else eps
        have = {(e.commodity, e.path): e.weight for e in self.entries}
        for c, p, w in other.entries:
            cur = have.get((c, p), 0.0)
            if w > cur + eps:
                raise FlowError(f"subtrahend is not a subflow at {(c, p)}")
            have[(c, p)] = cur - w
        return PathFlow((c, p, w) for (c, p), w in have.items() if w > eps)

    __sub__ = subtract

    def restrict(self, pred: Callable[[FlowPath], bool]) -> "PathFlow":
        return PathFlow(e for e in self.entries if pred(e))

    def restrict_to_vertices(self, vertices: Iterable[int]) -> "PathFlow":
        vs = frozenset(vertices)
        return self.restrict(lambda e: all(v in vs for v in e.path))

    def restrict_to_subgraph(self, g: CapGraph) -> "PathFlow":
        def inside(e):
            return all(v in g.vertices for v in e.path) and all(
                g.has_edge(a, b) for a, b in zip(e.path, e.path[1:])
            )

        return self.restrict(inside)

    def restrict_to_pairs(self, ids: Iterable) -> "PathFlow":
        keep = set(ids)
        return self.restrict(lambda e: e.commodity in keep)

    def scale_commodities(self, factors: dict) -> "PathFlow":
        """Multiply each commodity by its factor (missing commodities are dropped)."""
        return PathFlow(
            (e.commodity, e.path, e.weight * factors[e.commodity])
            for e in self.entries
            if factors.get(e.commodity, 0) > 0
        )

    # checks -------------------------------------------------------------

    def violations(self, g: CapGraph, mode: Mode, eps: float | None = None) -> list:
        """Capacity violations and broken paths, empty when the flow is feasible."""
        eps = _config.EPS if eps is None else eps
        bad = []
        for c, p, w in self.entries:
            for v in p:
                if v not in g.vertices:
                    bad.append(("unknown vertex", c, v))
            for a, b in zip(p, p[1:]):
                if not g.has_edge(a, b):
                    bad.append(("missing edge", c, (a, b)))
        if bad:
            return bad
        if Mode(mode) is Mode.EDP:
            for e, load in self.edge_loads.items():
                if load > g.edges[e] + eps * max(1.0, load):
                    bad.append(("edge overload", e, load, g.edges[e]))
        else:
            for v, load in self.vertex_loads.items():
                if load > g.vcap(v) + eps * max(1.0, load):
                    bad.append(("vertex overload", v, load, g.vcap(v)))
        return bad

    def is_feasible(self, g: CapGraph, mode: Mode, eps: float | None = None) -> bool:
        return not self.violations(g, mode, eps)

    def to_dict(self) -> dict:
        return {
            "paths": [
                {"commodity": c, "path": list(p), "weight": repr(w)} for c, p, w in self.entries
            ],
            "value": repr(self.value),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PathFlow":
        return cls((d["commodity"], tuple(d["path"]), float(d["weight"])) for d in data["paths"])


def flow_value(f: PathFlow, eps: float | None = None) -> float:
    """|f| as the sum of weights, cross-checked against half the marginal sum."""
    v = f.value
    half = 0.5 * sum(f.marginals.values())
    if not _config.close(v, half, eps):
        raise FlowError(f"flow value {v} disagrees with half marginal sum {half}")
    return v


def shortcut(walk: Iterable[int]) -> tuple[int, ...]:
    """Turn a walk into a simple path with the same endpoints by cutting loops."""
    out: list[int] = []
    pos: dict[int, int] = {}
    for v in walk:
        if v in pos:
            i = pos[v]
            for w in out[i + 1 :]:
                del pos[w]
            del out[i + 1 :]
        else:
            pos[v] = len(out)
            out.append(v)
    return tuple(out)
