"""Data model: uncertainty sets, reduction results, certificates and instances.

All cost data is non-negative and finite.  An uncertainty set is a finite
list of cost scenarios ``c^1 .. c^N``, each a vector in ``R^n_+``; a
reduction result holds ``K`` reduced scenarios together with the convex
weights that produced them (``lambda``), the coverage weights that map every
original scenario onto the reduced set (``mu``), the worst-case scaling
factor ``t`` and the resulting approximation guarantee ``1/t``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import EPS, check_scenario_matrix

__all__ = [
    "UncertaintySet",
    "ReductionResult",
    "GuaranteeCertificate",
    "RobustInstance",
    "load_uncertainty_set",
    "save_uncertainty_set",
    "load_reduction_result",
    "save_reduction_result",
    "load_instance",
    "save_instance",
    "filter_dominated",
    "dominated_mask",
    "ONE_STAGE_METHODS",
    "TWO_STAGE_METHODS",
]

ONE_STAGE_METHODS = ("cont", "ip-mu", "ip-lambda", "kmeans", "midpoint")
TWO_STAGE_METHODS = ("ip2", "greedy2")


def _jsonable(value):
    """Convert numpy containers to JSON types; integral floats become ints."""
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if np.isfinite(v) and v == int(v) and abs(v) < 2**53:
            return int(v)
        return v
    return value


@dataclass(frozen=True)
class UncertaintySet:
    """A finite uncertainty set: an ``(N, n)`` matrix of cost scenarios."""

    scenarios: np.ndarray

    def __post_init__(self):
        A = check_scenario_matrix(self.scenarios)
        A = np.ascontiguousarray(A)
        A.setflags(write=False)
        object.__setattr__(self, "scenarios", A)

    @property
    def n_scenarios(self) -> int:
        return self.scenarios.shape[0]

    @property
    def n_items(self) -> int:
        return self.scenarios.shape[1]

    def __len__(self) -> int:
        return self.n_scenarios

    def __iter__(self):
        return iter(self.scenarios)

    def __eq__(self, other) -> bool:
        if not isinstance(other, UncertaintySet):
            return NotImplemented
        return self.scenarios.shape == other.scenarios.shape and bool(
            np.all(self.scenarios == other.scenarios)
        )

    def to_json(self) -> str:
        payload = {"n": self.n_items, "scenarios": _jsonable(self.scenarios)}
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "UncertaintySet":
        data = json.loads(text)
        if not isinstance(data, dict) or "scenarios" not in data:
            raise ValueError("uncertainty-set JSON must be an object with a 'scenarios' key")
        A = check_scenario_matrix(data["scenarios"])
        if "n" in data and int(data["n"]) != A.shape[1]:
            raise ValueError(
                f"declared n={data['n']} does not match scenario length {A.shape[1]}"
            )
        return cls(A)


def load_uncertainty_set(path) -> UncertaintySet:
    """Read an uncertainty set from a JSON file ``{"n": ..., "scenarios": [[...]]}``."""
    return UncertaintySet.from_json(Path(path).read_text())


def save_uncertainty_set(U: UncertaintySet, path) -> None:
    Path(path).write_text(U.to_json() + "\n")


def dominated_mask(scenarios) -> np.ndarray:
    """Boolean mask of scenarios dominated by another scenario of the set.

    Scenario ``i`` counts as dominated when some other scenario ``j``
    satisfies ``c^i <= c^j + EPS`` componentwise; on (near-)ties the first
    occurrence survives.
    """
    A = check_scenario_matrix(scenarios)
    N = A.shape[0]
    # le[i, j]: scenario i lies (weakly) below scenario j everywhere.
    le = np.all(A[:, None, :] <= A[None, :, :] + EPS, axis=-1)
    np.fill_diagonal(le, False)
    strict = le & ~le.T
    idx = np.arange(N)
    by_earlier = (le & (idx[None, :] < idx[:, None])).any(axis=1)
    by_later = (strict & (idx[None, :] > idx[:, None])).any(axis=1)
    return by_earlier | by_later


def filter_dominated(U: UncertaintySet | np.ndarray) -> UncertaintySet:
    """Drop scenarios that are componentwise dominated by another scenario.

    Irrelevant for worst-case maximization: dropping ``c^i <= c^j`` never
    changes ``max_i c^i . x`` for ``x >= 0``.  The result is an antichain and
    filtering is idempotent.
    """
    A = check_scenario_matrix(U)
    keep = ~dominated_mask(A)
    return UncertaintySet(A[keep])


def _check_row_stochastic(M: np.ndarray, name: str) -> np.ndarray:
    if np.any(M < -1e-9):
        raise ValueError(f"{name} has negative entries")
    M = np.clip(M, 0.0, None)
    sums = M.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > EPS):
        bad = int(np.argmax(np.abs(sums - 1.0)))
        raise ValueError(f"{name} row {bad} sums to {sums[bad]}, expected 1")
    return M


def _is_unit_rows(M: np.ndarray) -> bool:
    near_one = np.abs(M - 1.0) <= EPS
    near_zero = np.abs(M) <= EPS
    return bool(np.all(near_one.sum(axis=1) == 1) and np.all(near_one | near_zero))


@dataclass(frozen=True)
class ReductionResult:
    """Outcome of a scenario reduction.

    Attributes
    ----------
    reduced : (K, n) array
        The reduced scenario set.
    lambda_ : (K, N) array
        Row-stochastic convex weights: ``reduced[k] = lambda_[k] @ U``.
    mu : (N, K) array
        Row-stochastic coverage weights mapping each original scenario onto
        the reduced set: ``t * U[i] <= mu[i] @ reduced`` componentwise.
    t : float
        Worst-case scaling factor in ``[0, 1]``.
    guarantee : float
        Approximation guarantee ``1/t`` (``inf`` when ``t == 0``).
    method : str
        Interface tag of the producing method.
    stage : int
        1 or 2; stage-2 results select original scenarios, so every
        ``lambda_`` row and every ``mu`` row is a unit vector.
    exact : bool
        True when the producing method solved its reduction model to
        proven optimality; False for heuristics (cont, kmeans, greedy
        fallbacks) and time-limited incumbents.  In-memory only; not
        part of the file format.
    gap : float
        Relative optimality gap of the underlying solve (0 when exact,
        ``inf`` when no bound is available).
    """

    reduced: np.ndarray
    lambda_: np.ndarray
    mu: np.ndarray
    t: float
    guarantee: float
    method: str
    stage: int
    exact: bool = True
    gap: float = 0.0

    def __post_init__(self):
        reduced = check_scenario_matrix(self.reduced, name="reduced")
        lam = _check_row_stochastic(np.asarray(self.lambda_, dtype=np.float64), "lambda")
        mu = _check_row_stochastic(np.asarray(self.mu, dtype=np.float64), "mu")
        K, n = reduced.shape
        if lam.shape[0] != K:
            raise ValueError(f"lambda has {lam.shape[0]} rows, expected K={K}")
        if mu.shape[1] != K:
            raise ValueError(f"mu has {mu.shape[1]} columns, expected K={K}")
        if mu.shape[0] != lam.shape[1]:
            raise ValueError("mu rows and lambda columns must both equal N")
        if self.stage not in (1, 2):
            raise ValueError(f"stage must be 1 or 2, got {self.stage}")
        if self.stage == 2 and not (_is_unit_rows(lam) and _is_unit_rows(mu)):
            raise ValueError("stage-2 results require unit-vector lambda and mu rows")
        t = float(self.t)
        if not np.isfinite(t) or t < -1e-9 or t > 1.0 + 1e-9:
            raise ValueError(f"t={t} outside [0, 1]")
        t = float(min(max(t, 0.0), 1.0))
        g = float(self.guarantee)
        if t == 0.0:
            if not np.isinf(g):
                raise ValueError("guarantee must be +inf when t == 0")
        else:
            if not np.isfinite(g) or abs(g * t - 1.0) > 1e-6:
                raise ValueError(f"guarantee={g} inconsistent with t={t}")
        for arr in (reduced, lam, mu):
            arr.setflags(write=False)
        object.__setattr__(self, "reduced", reduced)
        object.__setattr__(self, "lambda_", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "guarantee", g)
        object.__setattr__(self, "exact", bool(self.exact))
        object.__setattr__(self, "gap", float(self.gap))

    @property
    def k(self) -> int:
        return self.reduced.shape[0]

    def reduced_set(self) -> UncertaintySet:
        return UncertaintySet(self.reduced)

    def to_json(self) -> str:
        payload = {
            "method": self.method,
            "stage": self.stage,
            "K": self.k,
            "t": _jsonable(self.t),
            "guarantee": _jsonable(self.guarantee),
            "reduced": _jsonable(self.reduced),
            "lambda": _jsonable(self.lambda_),
            "mu": _jsonable(self.mu),
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "ReductionResult":
        data = json.loads(text)
        return cls(
            reduced=np.asarray(data["reduced"], dtype=np.float64),
            lambda_=np.asarray(data["lambda"], dtype=np.float64),
            mu=np.asarray(data["mu"], dtype=np.float64),
            t=float(data["t"]),
            guarantee=float(data["guarantee"]),
            method=str(data["method"]),
            stage=int(data["stage"]),
        )


def load_reduction_result(path) -> ReductionResult:
    return ReductionResult.from_json(Path(path).read_text())


def save_reduction_result(result: ReductionResult, path) -> None:
    Path(path).write_text(result.to_json() + "\n")


@dataclass(frozen=True)
class GuaranteeCertificate:
    """Witnesses backing an approximation guarantee ``alpha * beta``.

    Stage 1: ``alpha_witnesses`` is an ``(N, K)`` matrix of convex weights
    (scenario ``i`` is covered by ``alpha`` times the witness point of the
    reduced set), ``beta_witnesses`` is ``(K, N)`` (reduced scenario ``k`` is
    covered by ``beta`` times a point of the original hull).  Stage 2:
    integer index arrays instead — each scenario points at one reduced
    scenario and each reduced scenario at one original scenario.
    """

    alpha: float
    beta: float
    alpha_witnesses: np.ndarray
    beta_witnesses: np.ndarray
    stage: int

    def __post_init__(self):
        if self.stage not in (1, 2):
            raise ValueError(f"stage must be 1 or 2, got {self.stage}")
        a, b = float(self.alpha), float(self.beta)
        if (np.isfinite(a) and a < 0) or (np.isfinite(b) and b < 0):
            raise ValueError("alpha and beta must be non-negative")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "alpha_witnesses", np.asarray(self.alpha_witnesses))
        object.__setattr__(self, "beta_witnesses", np.asarray(self.beta_witnesses))

    @property
    def guarantee(self) -> float:
        return self.alpha * self.beta


_KINDS = ("selection", "vertex-cover")


@dataclass(frozen=True)
class RobustInstance:
    """A downstream robust combinatorial problem.

    ``selection``: choose exactly ``p`` of ``n`` items.  ``vertex-cover``:
    choose nodes so every node is chosen or has a chosen neighbor.  For
    two-stage instances ``first_stage_costs`` prices the here-and-now
    decisions; scenario costs price the recourse.
    """

    kind: str
    stages: int
    n: int
    p: int | None = None
    edges: tuple[tuple[int, int], ...] | None = None
    first_stage_costs: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.stages not in (1, 2):
            raise ValueError(f"stages must be 1 or 2, got {self.stages}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.kind == "selection":
            if self.p is None:
                object.__setattr__(self, "p", self.n // 2)
            p = int(self.p)
            if not 1 <= p <= self.n:
                raise ValueError(f"p={p} out of range [1, {self.n}]")
            object.__setattr__(self, "p", p)
        if self.kind == "vertex-cover":
            if self.edges is None:
                raise ValueError("vertex-cover instances require an edge list")
            edges = []
            for e in self.edges:
                u, v = int(e[0]), int(e[1])
                if not (0 <= u < self.n and 0 <= v < self.n) or u == v:
                    raise ValueError(f"invalid edge {e!r} for n={self.n}")
                edges.append((min(u, v), max(u, v)))
            object.__setattr__(self, "edges", tuple(sorted(set(edges))))
        if self.stages == 2:
            if self.first_stage_costs is None:
                raise ValueError("two-stage instances require first_stage_costs")
            C = np.asarray(self.first_stage_costs, dtype=np.float64)
            if C.shape != (self.n,):
                raise ValueError(f"first_stage_costs must have shape ({self.n},)")
            if not np.all(np.isfinite(C)) or np.any(C < 0):
                raise ValueError("first_stage_costs must be finite and non-negative")
            C.setflags(write=False)
            object.__setattr__(self, "first_stage_costs", C)

    def to_json(self) -> str:
        payload: dict = {"kind": self.kind, "stages": self.stages, "n": self.n}
        if self.kind == "selection":
            payload["p"] = self.p
        if self.kind == "vertex-cover":
            payload["edges"] = [list(e) for e in self.edges]
        if self.first_stage_costs is not None:
            payload["first_stage_costs"] = _jsonable(self.first_stage_costs)
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "RobustInstance":
        data = json.loads(text)
        return cls(
            kind=str(data["kind"]),
            stages=int(data["stages"]),
            n=int(data["n"]),
            p=data.get("p"),
            edges=tuple(tuple(e) for e in data["edges"]) if "edges" in data else None,
            first_stage_costs=data.get("first_stage_costs"),
        )


def load_instance(path) -> RobustInstance:
    return RobustInstance.from_json(Path(path).read_text())


def save_instance(instance: RobustInstance, path) -> None:
    Path(path).write_text(instance.to_json() + "\n")
