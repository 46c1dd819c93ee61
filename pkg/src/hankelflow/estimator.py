"""Scikit-learn style wrapper around the solver.

The transformer maps each row of X (a length-T series) to the nearest
rank-deficient Hankel vector found by the continuation solver.  Like
``sklearn.preprocessing.Normalizer`` it is stateless: ``fit`` only validates
input, so the estimator composes with pipelines and grid search through the
usual ``get_params`` / ``set_params`` machinery.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .driver import SolveParams, solve
from .flow import FlowParams


class HankelLowRankApproximator(BaseEstimator, TransformerMixin):
    """Project series onto (numerically) rank-deficient Hankel vectors.

    Parameters mirror :class:`hankelflow.driver.SolveParams` and
    :class:`hankelflow.flow.FlowParams`; ``m`` is the Hankel row count.
    """

    def __init__(
        self,
        m: int = 2,
        epsilon0: float = 1e-2,
        delta_increment: float = 1e-2,
        tol_rank: float = 1e-8,
        tol_stationary: float = 1e-8,
        h0: float = 0.1,
        gamma: float = 0.5,
        h_max: float = 1.0,
        max_inner_steps: int = 5000,
        max_outer_iters: int = 100,
        weights: str = "frobenius",
        distance_mode: str = "euclidean",
    ):
        self.m = m
        self.epsilon0 = epsilon0
        self.delta_increment = delta_increment
        self.tol_rank = tol_rank
        self.tol_stationary = tol_stationary
        self.h0 = h0
        self.gamma = gamma
        self.h_max = h_max
        self.max_inner_steps = max_inner_steps
        self.max_outer_iters = max_outer_iters
        self.weights = weights
        self.distance_mode = distance_mode

    def _solve_params(self) -> SolveParams:
        return SolveParams(
            epsilon0=self.epsilon0,
            delta_increment=self.delta_increment,
            flow=FlowParams(
                h0=self.h0,
                gamma=self.gamma,
                h_max=self.h_max,
                tol_stationary=self.tol_stationary,
                tol_rank=self.tol_rank,
                max_inner_steps=self.max_inner_steps,
            ),
            max_outer_iters=self.max_outer_iters,
            weights=self.weights,
            distance_mode=self.distance_mode,
        )

    def _validate(self, X) -> np.ndarray:
        X = np.asarray(X)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2:
            raise ValueError(f"expected a 1-D series or a 2-D stack, got shape {X.shape}")
        if X.shape[1] < 2 * self.m - 1:
            raise ValueError(
                f"series of length {X.shape[1]} too short for m={self.m} "
                f"(need at least {2 * self.m - 1})"
            )
        return X

    def fit(self, X, y=None):
        X = self._validate(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "n_features_in_")
        X = self._validate(X)
        params = self._solve_params()
        self.solutions_ = [solve(row, self.m, params=params) for row in X]
        return np.vstack([sol.p_tilde for sol in self.solutions_])
