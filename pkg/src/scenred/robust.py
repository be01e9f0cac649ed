"""Robust combinatorial problems that consume (reduced) uncertainty sets.

Two problem kinds are supported end to end:

* ``selection`` — pick exactly p of n items; the adversary then prices
  the picks with one of the scenarios.  In the two-stage variant some
  items may be bought now (at deterministic first-stage prices) and the
  rest after the scenario is revealed.
* ``vertex-cover`` — pick nodes of a graph so that every node is picked
  or adjacent to a pick (closed-neighborhood covering); two-stage picks
  may again be split between now and after the reveal.

Solvers here are exact within their documented envelopes; together with
a reduction they realize the full pipeline: reduce U, solve the robust
problem on the reduced set, evaluate the decision on the original U.
The guarantee of the reduction bounds the loss of that pipeline.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ._validation import check_scenario_matrix
from .linprog import LpProblem
from .milp import MilpProblem, solve_milp
from .model import RobustInstance

__all__ = [
    "RobustSolution",
    "evaluate_one_stage",
    "solve_one_stage",
    "second_stage_selection",
    "evaluate_two_stage",
    "solve_two_stage",
]


@dataclass(frozen=True)
class RobustSolution:
    """A first-stage decision with its worst-case objective value.

    ``per_scenario`` holds the scenario-wise objective of the decision
    (including recourse for two-stage problems) when it was computed.
    ``exact`` is False when the solve returned a time-limited incumbent
    instead of a proven optimum.
    """

    x: np.ndarray
    value: float
    per_scenario: np.ndarray | None = None
    exact: bool = True

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "value", float(self.value))
        if self.per_scenario is not None:
            ps = np.asarray(self.per_scenario, dtype=np.float64)
            ps.setflags(write=False)
            object.__setattr__(self, "per_scenario", ps)


def _neighborhood_rows(inst: RobustInstance) -> np.ndarray:
    """Closed-neighborhood incidence: row v marks v and its neighbors."""
    A = np.eye(inst.n)
    for u, v in inst.edges:
        A[u, v] = 1.0
        A[v, u] = 1.0
    return A


def _check_first_stage(inst: RobustInstance, x: np.ndarray, *, partial: bool) -> None:
    if x.shape != (inst.n,):
        raise ValueError(f"x must have shape ({inst.n},)")
    if np.any((np.abs(x) > 1e-9) & (np.abs(x - 1.0) > 1e-9)):
        raise ValueError("x must be a 0/1 vector")
    if inst.kind == "selection":
        picks = int(round(x.sum()))
        if partial:
            if picks > inst.p:
                raise ValueError(f"x selects {picks} items, more than p={inst.p}")
        elif picks != inst.p:
            raise ValueError(f"x selects {picks} items, expected exactly p={inst.p}")
    else:
        if not partial:
            covered = _neighborhood_rows(inst) @ x
            if np.any(covered < 1.0 - 1e-9):
                raise ValueError("x leaves some node uncovered")


def evaluate_one_stage(inst: RobustInstance | None, x, U) -> float:
    """Worst-case cost ``max_i U[i] . x`` of a fixed decision.

    ``x`` may be fractional (useful for sampling studies); when ``inst``
    is given and ``x`` is binary, feasibility is checked first.
    """
    X = check_scenario_matrix(U, "U")
    xv = np.asarray(x, dtype=np.float64).ravel()
    if xv.shape != (X.shape[1],):
        raise ValueError(f"x must have length {X.shape[1]}")
    binary = np.all((np.abs(xv) <= 1e-9) | (np.abs(xv - 1.0) <= 1e-9))
    if inst is not None and binary:
        _check_first_stage(inst, xv, partial=False)
    return float((X @ xv).max())


def solve_one_stage(inst: RobustInstance, U, *, time_limit: float | None = None) -> RobustSolution:
    """Exact min-max solve: epigraph MILP over the feasible 0/1 decisions."""
    X = check_scenario_matrix(U, "U")
    if inst.stages != 1:
        raise ValueError("solve_one_stage requires a one-stage instance")
    N, n = X.shape
    if n != inst.n:
        raise ValueError(f"instance has n={inst.n} items but scenarios have {n}")
    # variables [x(n), z]; minimize z subject to z >= U[i] . x
    rows = [np.concatenate([X[i], [-1.0]]) for i in range(N)]
    senses = ["<="] * N
    rhs = [0.0] * N
    if inst.kind == "selection":
        rows.append(np.concatenate([np.ones(n), [0.0]]))
        senses.append("=")
        rhs.append(float(inst.p))
    else:
        A = _neighborhood_rows(inst)
        for v in range(inst.n):
            rows.append(np.concatenate([A[v], [0.0]]))
            senses.append(">=")
            rhs.append(1.0)
    c = np.zeros(n + 1)
    c[n] = 1.0
    ub = np.concatenate([np.ones(n), [np.inf]])
    lp = LpProblem(
        c=c, sense="min", A=np.vstack(rows), senses=tuple(senses), b=np.asarray(rhs), ub=ub
    )
    sol = solve_milp(
        MilpProblem(lp=lp, binary=tuple(range(n))), time_limit=time_limit, backend="highs"
    )
    if sol.status == "infeasible":
        raise ValueError("instance admits no feasible decision")
    if sol.x is None:
        raise RuntimeError("one-stage solve hit the time limit with no incumbent")
    x = np.round(sol.x[:n])
    per = X @ x
    return RobustSolution(
        x=x, value=float(per.max()), per_scenario=per, exact=sol.status == "optimal"
    )


def second_stage_selection(x, c, p: int):
    """Cheapest completion of a partial selection to exactly p picks.

    Greedy is exact here: take the ``p - |x|`` cheapest unpicked items
    (stable order, so ties go to the lowest index).  Returns ``(y, value)``.
    """
    xv = np.asarray(x, dtype=np.float64).ravel()
    cv = np.asarray(c, dtype=np.float64).ravel()
    if xv.shape != cv.shape:
        raise ValueError("x and c must have the same length")
    picked = xv > 0.5
    need = int(p) - int(picked.sum())
    if need < 0:
        raise ValueError("x already selects more than p items")
    y = np.zeros_like(xv)
    if need:
        remaining = np.where(~picked)[0]
        if remaining.size < need:
            raise ValueError("not enough items left to complete the selection")
        order = remaining[np.argsort(cv[remaining], kind="stable")]
        y[order[:need]] = 1.0
    return y, float(cv @ y)


def _second_stage_cover(inst: RobustInstance, x: np.ndarray, c: np.ndarray, time_limit) -> float:
    """Cheapest recourse picks covering what ``x`` leaves uncovered (exact MILP)."""
    A = _neighborhood_rows(inst)
    residual = 1.0 - A @ x
    rows = np.where(residual > 1e-9)[0]
    if rows.size == 0:
        return 0.0
    lp = LpProblem(
        c=c,
        sense="min",
        A=A[rows],
        senses=(">=",) * rows.size,
        b=residual[rows],
        ub=np.ones(inst.n),
    )
    sol = solve_milp(
        MilpProblem(lp=lp, binary=tuple(range(inst.n))), time_limit=time_limit, backend="highs"
    )
    if sol.status == "infeasible" or sol.x is None:
        raise RuntimeError("recourse covering solve failed")
    return float(sol.objective)


def evaluate_two_stage(
    inst: RobustInstance, x, U, *, time_limit: float | None = None
) -> float:
    """Worst-case total cost of first-stage ``x``: C.x + max over scenarios
    of the exact recourse cost."""
    X = check_scenario_matrix(U, "U")
    if inst.stages != 2:
        raise ValueError("evaluate_two_stage requires a two-stage instance")
    xv = np.asarray(x, dtype=np.float64).ravel()
    _check_first_stage(inst, xv, partial=True)
    worst = -np.inf
    for i in range(X.shape[0]):
        if inst.kind == "selection":
            _, q = second_stage_selection(xv, X[i], inst.p)
        else:
            q = _second_stage_cover(inst, xv, X[i], time_limit)
        worst = max(worst, q)
    return float(inst.first_stage_costs @ xv + worst)


def _solve_two_stage_selection(inst: RobustInstance, X: np.ndarray) -> RobustSolution:
    n, p = inst.n, inst.p
    C = inst.first_stage_costs
    best_x, best_val, best_per = None, np.inf, None
    for size in range(p + 1):
        for combo in itertools.combinations(range(n), size):
            x = np.zeros(n)
            x[list(combo)] = 1.0
            base = float(C @ x)
            if base >= best_val - 1e-12:
                continue  # recourse costs are nonnegative
            per = np.empty(X.shape[0])
            for i in range(X.shape[0]):
                _, q = second_stage_selection(x, X[i], p)
                per[i] = base + q
            val = float(per.max())
            if val < best_val - 1e-12:
                best_x, best_val, best_per = x, val, per
    return RobustSolution(x=best_x, value=best_val, per_scenario=best_per)


def _solve_two_stage_cover(
    inst: RobustInstance, X: np.ndarray, time_limit
) -> RobustSolution:
    """Extensive form: one MILP over x and one recourse copy per scenario."""
    n = inst.n
    N = X.shape[0]
    A = _neighborhood_rows(inst)
    # variables [x(n), y_1(n) .. y_N(n), z]
    width = n * (N + 1) + 1
    data, rows_i, cols_i = [], [], []
    senses: list[str] = []
    rhs: list[float] = []
    r = 0
    for i in range(N):
        off = n * (i + 1)
        for v in range(n):
            cols = np.where(A[v] > 0)[0]
            for u in cols:
                rows_i += [r, r]
                cols_i += [int(u), int(off + u)]
                data += [1.0, 1.0]
            senses.append(">=")
            rhs.append(1.0)
            r += 1
        # z >= c^i . y_i
        for u in range(n):
            rows_i.append(r)
            cols_i.append(off + u)
            data.append(float(X[i, u]))
        rows_i.append(r)
        cols_i.append(width - 1)
        data.append(-1.0)
        senses.append("<=")
        rhs.append(0.0)
        r += 1
    Amat = sparse.csr_matrix((data, (rows_i, cols_i)), shape=(r, width))
    c = np.concatenate([inst.first_stage_costs, np.zeros(n * N), [1.0]])
    ub = np.concatenate([np.ones(n * (N + 1)), [np.inf]])
    lp = LpProblem(c=c, sense="min", A=Amat, senses=tuple(senses), b=np.asarray(rhs), ub=ub)
    sol = solve_milp(
        MilpProblem(lp=lp, binary=tuple(range(n * (N + 1)))),
        time_limit=time_limit,
        backend="highs",
    )
    if sol.x is None:
        raise RuntimeError("two-stage covering solve failed")
    x = np.round(sol.x[:n])
    base = float(inst.first_stage_costs @ x)
    per = np.empty(N)
    for i in range(N):
        per[i] = base + float(X[i] @ np.round(sol.x[n * (i + 1) : n * (i + 2)]))
    return RobustSolution(
        x=x, value=float(sol.objective), per_scenario=per, exact=sol.status == "optimal"
    )


def solve_two_stage(inst: RobustInstance, U, *, time_limit: float | None = None) -> RobustSolution:
    """Exact two-stage min-max-min solve.

    Selection instances are solved by enumerating first-stage subsets
    (the greedy recourse is exact, so this is exact); covering instances
    by the extensive-form MILP with one recourse copy per scenario.
    """
    X = check_scenario_matrix(U, "U")
    if inst.stages != 2:
        raise ValueError("solve_two_stage requires a two-stage instance")
    if X.shape[1] != inst.n:
        raise ValueError(f"instance has n={inst.n} items but scenarios have {X.shape[1]}")
    if inst.kind == "selection":
        if inst.n > 20:
            raise ValueError("two-stage selection solve enumerates subsets; n is capped at 20")
        return _solve_two_stage_selection(inst, X)
    return _solve_two_stage_cover(inst, X, time_limit)
