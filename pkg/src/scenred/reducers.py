"""Estimator-style wrappers: fit a reduction, then assign/score new scenarios.

These follow the familiar clustering API: ``fit(X)`` runs a reduction on
the scenario matrix, ``labels_`` holds each scenario's covering reduced
scenario, ``transform(X)`` returns the scaling factor needed for each
reduced scenario to dominate each row of ``X`` (lower is better, like a
distance), and ``predict(X)`` picks the best-covering reduced scenario.
The full :class:`~scenred.model.ReductionResult` stays available as
``result_``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .onestage import (
    reduce_assignment,
    reduce_continuous,
    reduce_kmeans,
    reduce_midpoint,
    reduce_subset,
)
from .twostage import reduce_greedy_two_stage, reduce_subset_two_stage

__all__ = [
    "ContinuousReducer",
    "AssignmentReducer",
    "SubsetReducer",
    "KMeansReducer",
    "MidpointReducer",
    "TwoStageReducer",
]


def _check_scenarios(X) -> np.ndarray:
    X = check_array(X, dtype=np.float64, ensure_min_samples=1, ensure_min_features=1)
    if np.any(X < 0):
        raise ValueError("scenario costs must be non-negative")
    return X


def _cover_scales(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """(M, K) matrix of smallest s with ``X[i] <= s * centers[k]``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        r = X[:, None, :] / centers[None, :, :]
        r = np.where(X[:, None, :] > 0, r, 0.0)
        return np.nan_to_num(r, nan=np.inf, posinf=np.inf).max(axis=2)


class _BaseReducer(ClusterMixin, TransformerMixin, BaseEstimator):
    """Shared fit/transform/predict plumbing for all reducers."""

    def _reduce(self, X):  # pragma: no cover - abstract
        raise NotImplementedError

    def fit(self, X, y=None):
        """Run the reduction on the scenario matrix ``X`` of shape (N, n)."""
        X = _check_scenarios(X)
        self.n_features_in_ = X.shape[1]
        result = self._reduce(X)
        self.result_ = result
        self.reduced_ = result.reduced
        self.lambda_ = result.lambda_
        self.mu_ = result.mu
        self.t_ = result.t
        self.guarantee_ = result.guarantee
        self.labels_ = result.mu.argmax(axis=1)
        return self

    def transform(self, X):
        """Scaling factor of each reduced scenario over each row of ``X``."""
        check_is_fitted(self, "reduced_")
        X = _check_scenarios(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but the reducer was fitted with "
                f"{self.n_features_in_}"
            )
        return _cover_scales(X, self.reduced_)

    def predict(self, X):
        """Index of the best-covering reduced scenario for each row of ``X``."""
        return self.transform(X).argmin(axis=1)


class ContinuousReducer(_BaseReducer):
    """Alternating-LP reduction with convex combinations ("cont").

    Parameters mirror the functional interface: number of reduced
    scenarios, random restarts, iteration budget and seed.
    """

    def __init__(self, n_clusters=2, reps=10, max_iters=20, random_state=None):
        self.n_clusters = n_clusters
        self.reps = reps
        self.max_iters = max_iters
        self.random_state = random_state

    def _reduce(self, X):
        return reduce_continuous(
            X,
            self.n_clusters,
            reps=self.reps,
            max_iters=self.max_iters,
            seed=self.random_state,
        )


class AssignmentReducer(_BaseReducer):
    """Exact binary-assignment reduction ("ip-mu")."""

    def __init__(self, n_clusters=2, time_limit=60.0):
        self.n_clusters = n_clusters
        self.time_limit = time_limit

    def _reduce(self, X):
        return reduce_assignment(X, self.n_clusters, time_limit=self.time_limit)


class SubsetReducer(_BaseReducer):
    """Reduction to a subset of the original scenarios ("ip-lambda")."""

    def __init__(self, n_clusters=2, time_limit=60.0):
        self.n_clusters = n_clusters
        self.time_limit = time_limit

    def _reduce(self, X):
        return reduce_subset(X, self.n_clusters, time_limit=self.time_limit)


class KMeansReducer(_BaseReducer):
    """K-means baseline with a post-hoc certified guarantee."""

    def __init__(self, n_clusters=2, reps=1000, random_state=None):
        self.n_clusters = n_clusters
        self.reps = reps
        self.random_state = random_state

    def _reduce(self, X):
        return reduce_kmeans(X, self.n_clusters, reps=self.reps, seed=self.random_state)


class MidpointReducer(_BaseReducer):
    """Mean-scenario baseline (always a single reduced scenario)."""

    def __init__(self):
        pass

    def _reduce(self, X):
        return reduce_midpoint(X)


class TwoStageReducer(_BaseReducer):
    """Subset selection for two-stage problems ("ip2" / "greedy2").

    ``strategy`` is ``"exact"`` for the threshold-search optimum or
    ``"greedy"`` for the maximin greedy.
    """

    def __init__(self, n_clusters=2, strategy="exact", time_limit=None):
        self.n_clusters = n_clusters
        self.strategy = strategy
        self.time_limit = time_limit

    def _reduce(self, X):
        if self.strategy == "exact":
            return reduce_subset_two_stage(X, self.n_clusters, time_limit=self.time_limit)
        if self.strategy == "greedy":
            return reduce_greedy_two_stage(X, self.n_clusters)
        raise ValueError(f"strategy must be 'exact' or 'greedy', got {self.strategy!r}")
