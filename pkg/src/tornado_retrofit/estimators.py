"""Estimator-style wrappers for use next to scikit-learn tooling.

The solver is not a learner, so only ``fit``/``predict`` and parameter
handling follow the convention: ``fit`` takes an :class:`Instance`,
``predict`` takes coverage vectors.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .ccg import CCGOptions, solve
from .model import Instance
from .params import cluster_blocks
from .second_stage import solve_q


class RobustRetrofitPlanner(BaseEstimator):
    def __init__(self, mode: str = "DEC", eps: float = 1e-6, max_iterations: int = 1000,
                 solver_cmd: Optional[str] = None):
        self.mode = mode
        self.eps = eps
        self.max_iterations = max_iterations
        self.solver_cmd = solver_cmd

    def fit(self, X: Instance, y=None):
        opts = CCGOptions(mode=self.mode, eps=self.eps, max_iterations=self.max_iterations,
                          solver_cmd=self.solver_cmd)
        self.report_ = solve(X, opts)
        self.instance_ = X
        self.plan_ = self.report_.plan
        self.value_ = self.report_.value
        self.worst_case_ = self.report_.worst_case.z_star
        return self

    def predict(self, Z) -> np.ndarray:
        """Total dislocation of the fitted plan for each coverage row of ``Z``."""
        Z = np.atleast_2d(np.asarray(Z, dtype=int))
        base = self.plan_.pre_dislocation(self.instance_)
        return np.array([base + solve_q(z, self.plan_, self.instance_).objective for z in Z])


class BlockClusterer(BaseEstimator):
    def __init__(self, n_clusters: int = 8, random_state: int = 0):
        self.n_clusters = n_clusters
        self.random_state = random_state

    def fit(self, X, y=None):
        self.locations_ = cluster_blocks(X, self.n_clusters, self.random_state)
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).locations_
