"""The multicommodity flow relaxation in compact arc form, and path decomposition."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from . import _config
from .graph import Instance, Mode
from .maxflow import decompose_arc_flow
from .pathflow import PathFlow
from .simplex import solve_lp


class LPError(ArithmeticError):
    """The solver failed or returned a point outside the feasible region."""


@dataclass
class LPSolution:
    arc_flows: dict  # pair id -> {(u, v): value}
    x: dict  # pair id -> value in [0, 1]
    objective: float
    method: str = "highs"
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "objective": repr(self.objective),
            "x": {str(p): repr(v) for p, v in self.x.items()},
            "arc_flows": {
                str(p): [[u, v, repr(w)] for (u, v), w in sorted(fl.items())]
                for p, fl in self.arc_flows.items()
            },
        }


def _build(instance: Instance):
    g = instance.graph
    comp_of = {}
    for i, comp in enumerate(g.components()):
        for v in comp:
            comp_of[v] = i
    arcs = []
    for u, v in g.edges:
        arcs += [(u, v), (v, u)]
    pids = sorted(instance.pairs)
    var = {}
    cols = 0
    for p in pids:
        s, t = instance.pairs[p]
        if comp_of[s] != comp_of[t]:
            continue
        c = comp_of[s]
        var[("x", p)] = cols
        cols += 1
        for a in arcs:
            if comp_of[a[0]] == c:
                var[(p, a)] = cols
                cols += 1
    eq_r, eq_c, eq_v = [], [], []
    nrow = 0
    for p in pids:
        if ("x", p) not in var:
            continue
        s, t = instance.pairs[p]
        rows = {}
        verts = sorted(v for v in g.vertices if comp_of[v] == comp_of[s])
        for v in verts:
            rows[v] = nrow
            nrow += 1
        for a in arcs:
            j = var.get((p, a))
            if j is None:
                continue
            eq_r += [rows[a[0]], rows[a[1]]]
            eq_c += [j, j]
            eq_v += [1.0, -1.0]
        xj = var[("x", p)]
        eq_r += [rows[s], rows[t]]
        eq_c += [xj, xj]
        eq_v += [-1.0, 1.0]
    A_eq = coo_matrix((eq_v, (eq_r, eq_c)), shape=(nrow, cols)).tocsr()
    b_eq = np.zeros(nrow)

    ub_r, ub_c, ub_v, b_ub = [], [], [], []
    if instance.mode is Mode.EDP:
        for i, (u, v) in enumerate(g.edges):
            b_ub.append(g.edges[(u, v)])
            for p in pids:
                for a in ((u, v), (v, u)):
                    j = var.get((p, a))
                    if j is not None:
                        ub_r.append(i)
                        ub_c.append(j)
                        ub_v.append(1.0)
    else:
        vidx = {v: i for i, v in enumerate(sorted(g.vertices))}
        b_ub = [g.vcap(v) for v in sorted(g.vertices)]
        for p in pids:
            for a in arcs:
                j = var.get((p, a))
                if j is not None:
                    ub_r.append(vidx[a[1]])
                    ub_c.append(j)
                    ub_v.append(1.0)
            if ("x", p) in var:
                ub_r.append(vidx[instance.pairs[p][0]])
                ub_c.append(var[("x", p)])
                ub_v.append(1.0)
    A_ub = coo_matrix((ub_v, (ub_r, ub_c)), shape=(len(b_ub), cols)).tocsr()
    c = np.zeros(cols)
    upper = [None] * cols
    for p in pids:
        j = var.get(("x", p))
        if j is not None:
            c[j] = 1.0
            upper[j] = 1.0
    return var, c, A_ub, np.array(b_ub, dtype=float), A_eq, b_eq, upper


def solve_relaxation(instance: Instance, method: str = "highs") -> LPSolution:
    """Maximize the total fractional throughput.

    ``method`` is ``"highs"`` (scipy), ``"simplex"`` (internal float tableau)
    or ``"exact"`` (internal tableau over fractions; small instances only).
    """
    var, c, A_ub, b_ub, A_eq, b_eq, upper = _build(instance)
    cols = len(c)
    if cols == 0:
        return LPSolution({p: {} for p in instance.pairs}, {p: 0.0 for p in instance.pairs}, 0.0, method)
    if method == "highs":
        res = linprog(
            -c,
            A_ub=A_ub if A_ub.shape[0] else None,
            b_ub=b_ub if A_ub.shape[0] else None,
            A_eq=A_eq,
            b_eq=b_eq,
            bounds=[(0, u) for u in upper],
            method="highs",
        )
        if res.status != 0:
            raise LPError(f"HiGHS failed: {res.message}")
        sol = np.maximum(res.x, 0.0)
    elif method in ("simplex", "exact"):
        res = solve_lp(
            c.tolist(),
            A_ub.toarray().tolist(),
            b_ub.tolist(),
            A_eq.toarray().tolist(),
            b_eq.tolist(),
            upper=upper,
            exact=method == "exact",
        )
        if res.status != "optimal":
            raise LPError(f"internal simplex: {res.status}")
        sol = np.array([float(v) for v in res.x])
    else:
        raise ValueError(f"unknown LP method {method!r}")
    flows: dict = {p: {} for p in instance.pairs}
    xs = {p: 0.0 for p in instance.pairs}
    for key, j in var.items():
        val = float(sol[j])
        if key[0] == "x":
            xs[key[1]] = min(1.0, val)
        elif val > 1e-12:
            flows[key[0]][key[1]] = val
    _check(instance, flows, xs)
    return LPSolution(flows, xs, float(sum(xs.values())), method)


def _check(instance, flows, xs, eps=1e-6):
    g = instance.graph
    for p, fl in flows.items():
        s, t = instance.pairs[p]
        bal = {}
        for (u, v), w in fl.items():
            bal[u] = bal.get(u, 0.0) + w
            bal[v] = bal.get(v, 0.0) - w
        for v, b in bal.items():
            want = xs[p] if v == s else -xs[p] if v == t else 0.0
            if abs(b - want) > eps:
                raise LPError(f"conservation violated for pair {p} at vertex {v}: {b} vs {want}")


def decompose_to_paths(instance: Instance, sol: LPSolution) -> PathFlow:
    """Per pair, cancel cycles and strip s-t paths; then scale away float overload."""
    entries = []
    for p in sorted(sol.arc_flows):
        s, t = instance.pairs[p]
        for path, w in decompose_arc_flow(sol.arc_flows[p], s, t):
            entries.append((p, path, w))
    f = PathFlow(entries)
    return make_feasible(instance, f)


def make_feasible(instance: Instance, f: PathFlow) -> PathFlow:
    """Scale f down by its worst load/capacity ratio when that exceeds one, and cap per-pair values at 1."""
    g = instance.graph
    over = 1.0
    if instance.mode is Mode.EDP:
        for e, load in f.edge_loads.items():
            over = max(over, load / g.edges[e])
    else:
        for v, load in f.vertex_loads.items():
            over = max(over, load / g.vcap(v))
    for val in f.commodity_values.values():
        over = max(over, val)
    if over > 1.0:
        if over > 1.0 + 1e-5:
            raise LPError(f"flow overloads capacity by factor {over}")
        f = f.scale(1.0 / over)
    return f


def fractional_solution(instance: Instance, method: str = "highs"):
    """Solve the relaxation and return ``(LPSolution, PathFlow)``."""
    sol = solve_relaxation(instance, method)
    return sol, decompose_to_paths(instance, sol)
