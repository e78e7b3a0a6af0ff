"""Estimator-style wrappers so the greedy maximizers plug into sklearn tooling.

``fit`` takes an ``Instance`` (or a value oracle plus ``ground``) and stores
the result in trailing-underscore attributes; ``get_params``/``set_params``
and ``sklearn.base.clone`` work as usual.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .algorithms import (
    AlgorithmConfig,
    brute_force_opt,
    deterministic_greedy,
    exact_expectation,
    fill_unassigned,
    randomized_greedy,
)
from .validation import check_problem

__all__ = ["DeterministicGreedyMaximizer", "RandomizedGreedyMaximizer"]


class _GreedyMaximizer(BaseEstimator):
    def _config(self, ground, seed=None):
        order = None if self.element_order is None else tuple(self.element_order)
        return AlgorithmConfig(ground.k, order, seed)

    def _store(self, report, ground):
        self.report_ = report
        self.ground_ = ground
        self.solution_ = report.solution
        self.value_ = report.value
        self.n_queries_ = report.total_queries
        return self

    def fit_predict(self, X, ground=None):
        return self.fit(X, ground).solution_

    def predict(self, X=None):
        """The fitted solution as an ``{element: part}`` mapping."""
        check_is_fitted(self, "solution_")
        return self.ground_.mapping(self.solution_)

    def score(self, X, ground=None, budget=10**6):
        """Fitted value divided by the brute-force optimum of ``X``."""
        check_is_fitted(self, "solution_")
        f, ground = check_problem(X, ground)
        _, best = brute_force_opt(f, ground, budget)
        value = f(self.solution_)
        return 1.0 if best == 0 else float(value / best)


class DeterministicGreedyMaximizer(_GreedyMaximizer):
    """LP-derandomized greedy with a worst-case ``k / (2k - 1)`` guarantee.

    Parameters
    ----------
    element_order : sequence of int or str, optional
        Processing order of the ground elements; input order by default.
    certify : bool, default False
        Brute-force the optimum and record per-step certificate margins in
        ``report_.trace``.  Only feasible on small instances.
    """

    def __init__(self, element_order=None, certify=False):
        self.element_order = element_order
        self.certify = certify

    def fit(self, X, ground=None):
        f, ground = check_problem(X, ground)
        optimum = fill_unassigned(brute_force_opt(f, ground)[0]) if self.certify else None
        report = deterministic_greedy(f, ground, self._config(ground), optimum=optimum)
        self.support_sizes_ = [len(s) for s in report.supports]
        return self._store(report, ground)


class RandomizedGreedyMaximizer(_GreedyMaximizer):
    """Greedy that samples part ``i`` with probability proportional to ``gain_i ** (k-1)``."""

    def __init__(self, element_order=None, random_state=None):
        self.element_order = element_order
        self.random_state = random_state

    def fit(self, X, ground=None):
        f, ground = check_problem(X, ground)
        report = randomized_greedy(f, ground, self._config(ground, self.random_state))
        return self._store(report, ground)

    def expected_value(self, X, ground=None, budget=10**6):
        f, ground = check_problem(X, ground)
        return exact_expectation(f, ground, self._config(ground), budget)
