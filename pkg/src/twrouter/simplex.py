"""Dense two-phase tableau simplex with Bland's rule.

Works over floats or ``fractions.Fraction``; with fractions the result is exact.
Intended for small LPs and for cross-checking the default HiGHS backend.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass
class SimplexResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list
    objective: object


def solve_lp(
    c: Sequence,
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    A_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
    upper: Sequence | None = None,
    exact: bool = False,
    tol: float = 1e-9,
) -> SimplexResult:
    """Maximize c.x subject to A_ub x <= b_ub, A_eq x = b_eq, 0 <= x <= upper."""
    num = Fraction if exact else float
    tol = 0 if exact else tol
    n = len(c)
    rows: list[list] = []
    rhs: list = []
    kinds: list[str] = []
    for a, b in zip(A_ub, b_ub):
        rows.append([num(v) for v in a])
        rhs.append(num(b))
        kinds.append("le")
    if upper is not None:
        for j, u in enumerate(upper):
            if u is None:
                continue
            a = [num(0)] * n
            a[j] = num(1)
            rows.append(a)
            rhs.append(num(u))
            kinds.append("le")
    for a, b in zip(A_eq, b_eq):
        rows.append([num(v) for v in a])
        rhs.append(num(b))
        kinds.append("eq")
    m = len(rows)
    n_slack = sum(1 for k in kinds if k == "le")
    total = n + n_slack + m  # structural, slack, artificial
    T = []
    basis = []
    si = n
    for i in range(m):
        row = rows[i] + [num(0)] * (n_slack + m) + [rhs[i]]
        if kinds[i] == "le":
            row[si] = num(1)
            si += 1
        if row[-1] < 0:
            row = [-v for v in row]
        row[n + n_slack + i] = num(1)
        T.append(row)
        basis.append(n + n_slack + i)
    art = set(range(n + n_slack, total))

    def pivot(r, col):
        pv = T[r][col]
        T[r] = [v / pv for v in T[r]]
        for i in range(m):
            if i != r and T[i][col] != 0:
                f = T[i][col]
                T[i] = [a - f * b for a, b in zip(T[i], T[r])]
        basis[r] = col

    def run(cost, allowed):
        # cost: objective to maximize, as a full-length list over columns
        while True:
            cb = [cost[b] for b in basis]
            enter = None
            for j in allowed:
                if j in basis:
                    continue
                red = cost[j] - sum(cb[i] * T[i][j] for i in range(m))
                if red > tol:
                    enter = j
                    break
            if enter is None:
                return "optimal"
            leave, best = None, None
            for i in range(m):
                if T[i][enter] > tol:
                    ratio = T[i][-1] / T[i][enter]
                    if best is None or ratio < best - tol or (abs(ratio - best) <= tol and basis[i] < basis[leave]):
                        leave, best = i, ratio
            if leave is None:
                return "unbounded"
            pivot(leave, enter)

    phase1 = [num(0)] * total
    for j in art:
        phase1[j] = num(-1)
    run(phase1, range(total))
    infeas = sum(T[i][-1] for i in range(m) if basis[i] in art)
    if infeas > (tol * 10 if not exact else 0):
        return SimplexResult("infeasible", [], None)
    # drive remaining artificials out of the basis
    for i in range(m):
        if basis[i] in art:
            for j in range(n + n_slack):
                if abs(T[i][j]) > tol and j not in basis:
                    pivot(i, j)
                    break
    cost = [num(v) for v in c] + [num(0)] * (n_slack + m)
    status = run(cost, range(n + n_slack))
    if status != "optimal":
        return SimplexResult(status, [], None)
    x = [num(0)] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = T[i][-1]
    obj = sum(num(ci) * xi for ci, xi in zip(c, x))
    return SimplexResult("optimal", x, obj)
