"""Input validation helpers shared by the functional core and the estimators."""

from __future__ import annotations

import numbers

import numpy as np

__all__ = ["check_scenario_matrix", "check_count", "as_rng", "EPS"]

# Tolerance for componentwise domination / row-stochasticity checks.
EPS = 1e-7


def check_scenario_matrix(X, name: str = "scenarios") -> np.ndarray:
    """Validate and return a scenario matrix as a float64 ``(N, n)`` array.

    Accepts anything array-like (including an ``UncertaintySet``, via its
    ``scenarios`` attribute).  Entries must be finite and non-negative and
    the matrix must contain at least one scenario and one dimension.
    """
    if hasattr(X, "scenarios"):
        X = X.scenarios
    A = np.asarray(X, dtype=np.float64)
    if A.ndim == 1:
        raise ValueError(
            f"{name} must be 2-dimensional (N scenarios x n items); "
            f"got a 1-d array of shape {A.shape}"
        )
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={A.ndim}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.any(A < 0):
        raise ValueError(f"{name} contains negative entries")
    return A


def check_count(value, lo: int, hi: int | None, name: str) -> int:
    """Validate an integer count in ``[lo, hi]`` (``hi=None`` for unbounded)."""
    if not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < lo or (hi is not None and value > hi):
        top = "inf" if hi is None else hi
        raise ValueError(f"{name}={value} out of range [{lo}, {top}]")
    return value


def as_rng(seed) -> np.random.Generator:
    """Return a ``numpy.random.Generator`` from a seed, ``None`` or a generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
