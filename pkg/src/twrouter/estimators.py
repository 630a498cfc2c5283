"""Estimator-style wrappers around the solvers.

Routing has no training phase, so ``fit`` solves the given instance and
``predict`` solves a new one with the same parameters.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .decomp import RootedDecomposition, heuristic_decomposition
from .graph import InputError, Instance, Mode
from .router import solve_edp, solve_ndp
from .wl import wl_decompose


def check_problem(X, mode: Mode | None = None, want_path: bool = False):
    """Accept an Instance or an ``(Instance, decomposition)`` pair; fill in a heuristic decomposition."""
    if isinstance(X, Instance):
        inst, d = X, None
    elif isinstance(X, tuple) and len(X) == 2 and isinstance(X[0], Instance):
        inst, d = X
    else:
        raise InputError(f"expected an Instance or (Instance, decomposition), got {type(X).__name__}")
    if mode is not None and inst.mode is not mode:
        raise InputError(f"expected a {mode.value} instance, got {inst.mode.value}")
    if d is None:
        d = heuristic_decomposition(inst.graph, want_path)
    elif not isinstance(d, RootedDecomposition):
        raise InputError(f"expected a RootedDecomposition, got {type(d).__name__}")
    return inst, d


class _RouterBase(BaseEstimator):
    _mode = Mode.EDP

    def __init__(self, r=None, lp_method="highs", check_bound=True):
        self.r = r
        self.lp_method = lp_method
        self.check_bound = check_bound

    def _solve(self, X):
        inst, d = check_problem(X, self._mode, want_path=self._mode is Mode.NDP)
        solver = solve_ndp if self._mode is Mode.NDP else solve_edp
        return solver(inst, d, r=self.r, lp_method=self.lp_method, check_bound=self.check_bound)

    def fit(self, X, y=None):
        self.routing_, self.report_ = self._solve(X)
        self.n_routed_ = self.routing_.size
        return self

    def predict(self, X):
        check_is_fitted(self, "routing_")
        return self._solve(X)[0]

    def fit_predict(self, X, y=None):
        return self.fit(X).routing_

    def score(self, X, y=None):
        """Routed pairs per unit of fractional flow."""
        routing, rep = self._solve(X)
        return routing.size / rep.flow if rep.flow > 0 else 1.0


class EDPRouter(_RouterBase):
    _mode = Mode.EDP


class NDPRouter(_RouterBase):
    _mode = Mode.NDP


class WellLinkedDecomposer(TransformerMixin, BaseEstimator):
    def __init__(self, r=None, lp_method="highs", check_bound=True):
        self.r = r
        self.lp_method = lp_method
        self.check_bound = check_bound

    def fit(self, X, y=None):
        self.components_, self.report_ = self._run(X)
        return self

    def _run(self, X):
        inst, d = check_problem(X, Mode.EDP)
        return wl_decompose(inst, d, r=self.r, lp_method=self.lp_method, check_bound=self.check_bound)

    def transform(self, X):
        check_is_fitted(self, "components_")
        return self._run(X)[0]
