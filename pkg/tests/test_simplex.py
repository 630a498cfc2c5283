from fractions import Fraction
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from twrouter.simplex import solve_lp


@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 10**6), st.booleans())
def test_matches_scipy(n, m, seed, with_eq):
    rng = random.Random(seed)
    c = [rng.randint(-3, 5) for _ in range(n)]
    A = [[rng.randint(0, 4) for _ in range(n)] for _ in range(m)]
    b = [rng.randint(1, 10) for _ in range(m)]
    A_eq, b_eq = [], []
    if with_eq:
        A_eq = [[rng.randint(0, 2) for _ in range(n)]]
        b_eq = [rng.randint(0, 3)]
    upper = [rng.choice([None, 2, 5]) for _ in range(n)]
    ref = linprog(-np.array(c), A_ub=A, b_ub=b, A_eq=A_eq or None, b_eq=b_eq or None,
                  bounds=[(0, u) for u in upper], method="highs")
    res = solve_lp(c, A, b, A_eq, b_eq, upper=upper)
    exact = solve_lp(c, A, b, A_eq, b_eq, upper=upper, exact=True)
    if ref.status == 2:
        assert res.status == "infeasible" and exact.status == "infeasible"
    elif ref.status == 3:
        assert res.status == "unbounded"
    else:
        assert res.status == "optimal" and exact.status == "optimal"
        assert res.objective == pytest.approx(-ref.fun, abs=1e-7)
        assert float(exact.objective) == pytest.approx(-ref.fun, abs=1e-7)
        assert all(isinstance(v, Fraction) for v in exact.x)


def test_textbook_example():
    # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
    res = solve_lp([3, 5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18], exact=True)
    assert res.objective == 36 and res.x == [2, 6]


def test_unbounded_and_infeasible():
    assert solve_lp([1], [[-1]], [1]).status == "unbounded"
    assert solve_lp([1], [[1]], [1], [[1]], [3]).status == "infeasible"
