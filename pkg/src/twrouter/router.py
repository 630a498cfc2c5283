"""Recursive routing on tree decompositions (edge mode) and path decompositions (node mode)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import _config
from .decomp import RootedDecomposition, preprocess, subgraph_at, validate
from .flowkit import (
    ContractError,
    ell_values,
    extract_violating_set,
    inside_flow,
    is_safe,
    prefix_to_set,
)
from .graph import (
    InputError,
    Instance,
    Mode,
    attach_terminal_leaves,
    induced_subgraph,
    normalize_terminals,
    vertex_boundary,
)
from .lp import fractional_solution
from .pathflow import PathFlow
from .rounding import route_via_small_cut
from .routing import Routing, assert_feasible

log = logging.getLogger(__name__)

PAPER_EDP_CONSTANT = 144


class BoundError(AssertionError):
    """The routing fell short of the guaranteed size."""


@dataclass
class RouterReport:
    mode: str = "edp"
    lp: float | None = None
    flow: float = 0.0
    routed: int = 0
    r: int = 0
    l1: int = 0
    l2: int = 0
    d_max: int = 1
    round_constant: float = 60.0
    constant: float = 240.0
    bound: float = 0.0
    paper_bound: float | None = None
    rounding_calls: int = 0
    steps: list = field(default_factory=list)

    def as_dict(self):
        return dict(self.__dict__)


def theorem_bound(flow: float, r: int, l1: int, l2: int, c: float) -> float:
    return flow * (1 - 1 / r) ** (l1 + l2) / (c * r**3)


class _Run:
    def __init__(self, r: int, mode: Mode):
        self.r = r
        self.mode = mode
        self.traces = []
        self.steps = []

    def round(self, inst, f, g, S, alpha):
        res = route_via_small_cut(inst, f, g, S, alpha)
        self.traces.append(res.trace)
        return res.routing

    # ---------------------------------------------------------------- recursion

    def solve(self, inst: Instance, d: RootedDecomposition, f: PathFlow, depth: int = 0, bound=None) -> Routing:
        if f.value <= _config.EPS:
            return Routing()
        out = Routing()
        for sub, sd, sf in preprocess(inst, d, f):
            if sf.value <= _config.EPS:
                continue
            out = out.union(self.solve_connected(sub, sd, sf, depth, bound))
        return out

    def solve_connected(self, inst, d, f, depth, bound):
        r = self.r
        l1, l2, unsafe, bad = ell_values(f, d, r, inst)
        if l1 > l2:
            raise AssertionError(f"l1={l1} exceeds l2={l2}")
        if bound is not None:
            lim = bound
            if l1 + l2 > lim[0] or (l1 + l2 == lim[0] and inst.graph.n >= lim[1]):
                raise AssertionError("recursion measure did not decrease")
        measure = (l1 + l2, inst.graph.n)
        if l2 == 0:
            return self.base_case(inst, d, f, depth)
        if l1 < l2:
            return self.step_unequal(inst, d, f, l1, l2, bad, depth, measure)
        return self.step_equal(inst, d, f, l1, unsafe, depth, measure)

    def base_case(self, inst, d, f, depth):
        S = d.bags[d.root]
        g = prefix_to_set(f, S)
        alpha = 1.0
        if not g.is_feasible(inst.graph, inst.mode):
            # in node mode the two prefixes of one path may meet in the same vertex
            g, alpha = g.scale(0.5), 2.0
        pairs = {p: inst.pairs[p] for p in f.commodity_values}
        routing = self.round(Instance(inst.graph, pairs, inst.mode), f, g, S, alpha)
        self.steps.append({"depth": depth, "case": "base", "flow": f.value, "S": len(S), "routed": routing.size})
        return routing

    def step_unequal(self, inst, d, f, l1, l2, bad, depth, measure):
        bad_set = set(bad)
        tops = []
        stack = [d.root]
        while stack:
            t = stack.pop()
            if d.parent[t] is not None and t in bad_set and len(d.sigma[t]) == l2:
                tops.append(t)
                continue
            stack.extend(reversed(d.children[t]))
        if self.mode is Mode.NDP and len(tops) > 1:
            raise AssertionError("a path decomposition has a single topmost bad node")
        routing = Routing()
        removed = PathFlow()
        inside_total = 0.0
        for t in sorted(tops):
            fin = inside_flow(t, f, d)
            if fin.value <= 0:
                continue
            rep = is_safe(t, f, d, self.r, inst)
            if not rep.safe:
                raise ContractError(f"topmost bad node {t} is unsafe although l1 < l2")
            gt = subgraph_at(d, inst.graph, t)
            pairs = {p: inst.pairs[p] for p in fin.commodity_values}
            sub = Instance(gt, pairs, inst.mode)
            routing = routing.union(self.round(sub, fin, rep.witness, d.sigma[t], 4 * self.r))
            removed = removed + fin
            inside_total += fin.value
        self.steps.append(
            {"depth": depth, "case": "unequal", "l1": l1, "l2": l2, "tops": len(tops),
             "inside": inside_total, "flow": f.value, "routed": routing.size}
        )
        if inside_total > f.value / self.r:
            return assert_feasible(routing, inst)
        rest = f.subtract(removed)
        return self.solve(inst, d, rest, depth + 1, measure)

    def step_equal(self, inst, d, f, l1, unsafe, depth, measure):
        cands = [t for t in unsafe if d.parent[t] is not None and len(d.sigma[t]) == l1]
        t0 = min(cands, key=lambda t: (-d.depth[t], t))
        U = extract_violating_set(t0, f, d, self.r, inst)
        V = inst.graph.vertices
        V1 = U
        V2 = V - U if inst.mode is Mode.EDP else V - U - vertex_boundary(inst.graph, U)
        parts = []
        for Vi in (V1, V2):
            gi = induced_subgraph(inst.graph, Vi)
            parts.append((inst.restricted(gi), d.restricted(Vi), f.restrict_to_vertices(Vi)))
        f1, f2 = parts[0][2], parts[1][2]
        lost = f.value - f1.value - f2.value
        if lost > f1.value / self.r + _config.EPS * max(1.0, f.value):
            raise AssertionError(f"split loses {lost} > |f1|/r = {f1.value / self.r}")
        self.steps.append(
            {"depth": depth, "case": "equal", "l1": l1, "node": t0, "U": len(U),
             "f1": f1.value, "f2": f2.value, "lost": lost}
        )
        out = Routing()
        for sub, sd, sf in parts:
            validate(sd, sub.graph)
            out = out.union(self.solve(sub, sd, sf, depth + 1, measure))
        return out


def lift_to_leaves(f: PathFlow, old: Instance, new: Instance) -> PathFlow:
    """Extend every path of ``f`` onto the terminal leaves that ``new`` added to ``old``."""
    entries = []
    for p, path, w in f.entries:
        s0, t0 = old.pairs[p]
        s1, t1 = new.pairs[p]
        if path[0] != s0:
            path = path[::-1]
        if s1 != s0:
            path = (s1,) + path
        if t1 != t0:
            path = path + (t1,)
        entries.append((p, path, w))
    return PathFlow(entries)


def _solve(instance: Instance, d: RootedDecomposition, f, r, mode: Mode, lp_method: str):
    if instance.mode is not mode:
        raise InputError(f"expected a {mode.value} instance")
    width = validate(d, instance.graph)
    lp_value = None
    if not instance.is_matching():
        if f is not None:
            raise InputError("a supplied flow requires the pairs to form a matching")
        instance, d = normalize_terminals(instance, d)
    if mode is Mode.NDP:
        if not d.is_path:
            raise InputError("node mode requires a path decomposition")
        leafed, d = attach_terminal_leaves(instance, d)
        if f is not None and leafed is not instance:
            f = lift_to_leaves(f, instance, leafed)
        instance = leafed
        width = validate(d, instance.graph)
    if r is None:
        r = width + 1
    r = max(r, width + 1)
    if f is None:
        sol, f = fractional_solution(instance, lp_method)
        lp_value = sol.objective
    elif f.violations(instance.graph, instance.mode):
        raise InputError(f"supplied flow is infeasible: {f.violations(instance.graph, instance.mode)[:3]}")
    run = _Run(r, mode)
    l1 = l2 = 0
    for sub, sd, sf in preprocess(instance, d, f):
        if sf.value > _config.EPS:
            a, b, _, _ = ell_values(sf, sd, r, sub)
            l1, l2 = max(l1, a), max(l2, b)
    routing = run.solve(instance, d, f)
    assert_feasible(routing, instance)
    routing = routing.translated(instance.terminal_origin)
    d_max = max((t.d for t in run.traces), default=1) or 1
    c_round = 60.0 * (2 * d_max - 1)
    rep = RouterReport(
        mode=mode.value,
        lp=lp_value,
        flow=f.value,
        routed=routing.size,
        r=r,
        l1=l1,
        l2=l2,
        d_max=d_max,
        round_constant=c_round,
        constant=4 * c_round,
        rounding_calls=len(run.traces),
        steps=run.steps,
    )
    rep.bound = theorem_bound(f.value, r, l1, l2, rep.constant)
    if mode is Mode.EDP:
        rep.paper_bound = theorem_bound(f.value, r, l1, l2, PAPER_EDP_CONSTANT)
    return routing, rep, instance


def solve_edp(instance: Instance, d: RootedDecomposition, f: PathFlow | None = None, r: int | None = None, *, lp_method: str = "highs", check_bound: bool = True):
    """Route on a tree decomposition; returns ``(Routing, RouterReport)``.

    Without ``f`` the relaxation is solved first.  The routing is audited
    against the original instance.
    """
    routing, rep, _ = _solve(instance, d, f, r, Mode.EDP, lp_method)
    _final_checks(routing, rep, instance, check_bound)
    return routing, rep


def solve_ndp(instance: Instance, d: RootedDecomposition, f: PathFlow | None = None, r: int | None = None, *, lp_method: str = "highs", check_bound: bool = True):
    """Route on a path decomposition in node-capacitated mode; returns ``(Routing, RouterReport)``."""
    routing, rep, _ = _solve(instance, d, f, r, Mode.NDP, lp_method)
    _final_checks(routing, rep, instance, check_bound)
    return routing, rep


def _final_checks(routing, rep, original, check_bound):
    assert_feasible(routing, original)
    if check_bound:
        need = max(rep.bound, rep.paper_bound or 0.0)
        if routing.size + _config.EPS < need:
            raise BoundError(f"routed {routing.size} < bound {need}")
