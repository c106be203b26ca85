"""Scikit-learn style facades over the solvers.

The estimators take a :class:`~resmute.netmodel.Scenario` in ``fit`` and
expose the solution through trailing-underscore attributes, so allocation
runs compose with sklearn tooling (``get_params``/``set_params``,
``clone``) even though the input is a domain object rather than a feature
matrix.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .asymptotics import asymptotic_report
from .flexduplex import SafpConfig, run_flexduplex_muting, safp
from .muting import SelectionStrategy, run_partial_muting
from .netmodel import Scenario, downlink_sif, per_bs_norm
from .sif import FixedPointConfig, fixed_point_solve


class MaxMinAllocator(BaseEstimator):
    """Max-min satisfaction allocation by normalized fixed-point iteration.

    Attributes after ``fit``: ``allocation_``, ``utility_``, ``n_iter_``,
    ``converged_``, ``report_`` (asymptotic limits and transition point).
    """

    def __init__(self, theta=1.0, tol=1e-9, max_iter=100_000):
        self.theta = theta
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, scenario: Scenario, y=None):
        T = downlink_sif(scenario)
        norm = per_bs_norm(scenario)
        sol = fixed_point_solve(T, norm, FixedPointConfig(
            theta=self.theta, tol=self.tol, max_iter=self.max_iter))
        self.allocation_ = sol.w_star
        self.utility_ = sol.c_star
        self.n_iter_ = sol.iterations
        self.converged_ = sol.converged
        self.report_ = asymptotic_report(scenario, T, norm)
        return self

    def score(self, scenario: Scenario, y=None):
        if not hasattr(self, "utility_"):
            raise NotFittedError("call fit first")
        return self.utility_


class PartialMutingAllocator(BaseEstimator):
    """Allocation with bottleneck muting.

    Attributes after ``fit``: ``allocation_``, ``utility_``, ``plan_``
    (full step trace), ``bottleneck_set_``, ``triggered_``.
    """

    def __init__(self, strategy="successive", candidate_count=8,
                 theta=1.0, tol=1e-9, max_iter=100_000):
        self.strategy = strategy
        self.candidate_count = candidate_count
        self.theta = theta
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, scenario: Scenario, y=None):
        plan = run_partial_muting(
            scenario,
            SelectionStrategy(self.strategy, self.candidate_count),
            FixedPointConfig(theta=self.theta, tol=self.tol, max_iter=self.max_iter))
        self.plan_ = plan
        self.allocation_ = plan.final_solution.w_star
        self.utility_ = plan.utility
        self.bottleneck_set_ = plan.bottleneck_set
        self.triggered_ = plan.triggered
        return self

    def score(self, scenario: Scenario, y=None):
        if not hasattr(self, "utility_"):
            raise NotFittedError("call fit first")
        return self.utility_


class FlexDuplexAllocator(BaseEstimator):
    """Joint uplink/downlink allocation by successive fixed-point
    approximation with restarts, optionally followed by muting.

    Attributes after ``fit``: ``allocation_``, ``utility_``, ``result_``
    (per-restart records) and, with muting, ``plan_``.
    """

    def __init__(self, restarts=8, eps=1e-6, seed=0, theta=1.0, tol=1e-9,
                 max_iter=100_000, muting=False, strategy="successive",
                 candidate_count=8):
        self.restarts = restarts
        self.eps = eps
        self.seed = seed
        self.theta = theta
        self.tol = tol
        self.max_iter = max_iter
        self.muting = muting
        self.strategy = strategy
        self.candidate_count = candidate_count

    def _config(self):
        inner = FixedPointConfig(theta=self.theta, tol=self.tol, max_iter=self.max_iter)
        return SafpConfig(restarts=self.restarts, eps=self.eps, inner=inner,
                          seed=self.seed)

    def fit(self, scenario: Scenario, y=None):
        cfg = self._config()
        if self.muting:
            plan = run_flexduplex_muting(
                scenario, SelectionStrategy(self.strategy, self.candidate_count), cfg)
            self.plan_ = plan
            self.allocation_ = plan.final_solution.w_star
            self.utility_ = plan.utility
            self.result_ = None
        else:
            res = safp(scenario, cfg)
            self.result_ = res
            self.allocation_ = res.w_star
            self.utility_ = res.utility
        return self

    def score(self, scenario: Scenario, y=None):
        if not hasattr(self, "utility_"):
            raise NotFittedError("call fit first")
        return self.utility_
