"""Mixed-integer kernel for the assignment/selection reductions.

Two interchangeable engines sit behind :func:`solve_milp`: a best-bound
branch-and-bound over the verified LP kernel (used for small binary
counts, and the engine whose node bounds are exposed for inspection) and
HiGHS through :func:`scipy.optimize.milp` for everything larger.  Both
are deterministic for a fixed input.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass

import numpy as np
from scipy import sparse
import scipy.optimize

from .linprog import KernelError, LpProblem, LpSolution, _row_scales, solve_lp

__all__ = ["MilpProblem", "MilpSolution", "solve_milp", "solve_milp_enumeration"]

INT_TOL = 1e-6
GAP_TOL = 1e-6

# The bespoke tree search stays exact but slow; past this many binaries
# the HiGHS engine takes over under backend="auto".
_BB_MAX_BINARIES = 10


@dataclass(frozen=True)
class MilpProblem:
    """An :class:`LpProblem` plus the set of variable indices forced binary."""

    lp: LpProblem
    binary: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.binary)
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate binary indices")
        for i in idx:
            if not 0 <= i < self.lp.n_vars:
                raise ValueError(f"binary index {i} out of range")
        lb = self.lp.lb.copy()
        ub = self.lp.ub.copy()
        take = np.asarray(idx, dtype=int)
        if take.size:
            lb[take] = np.maximum(lb[take], 0.0)
            ub[take] = np.minimum(ub[take], 1.0)
        if np.any(ub < lb - 1e-12):
            raise ValueError("binary bounds collapse below zero width")
        object.__setattr__(
            self,
            "lp",
            LpProblem(
                c=self.lp.c,
                sense=self.lp.sense,
                A=self.lp.A,
                senses=self.lp.senses,
                b=self.lp.b,
                lb=lb,
                ub=ub,
            ),
        )
        object.__setattr__(self, "binary", idx)


@dataclass(frozen=True)
class MilpSolution:
    """Outcome of a MILP solve.

    ``status`` is ``optimal`` | ``infeasible`` | ``time-limit``; a
    time-limit status still carries the best incumbent found (x may be
    None when none was found).  ``gap`` is the relative incumbent/bound
    gap and is <= 1e-6 whenever status is optimal; binary coordinates of
    an optimal ``x`` are within 1e-6 of {0, 1}.  ``nodes`` is the branch
    log ``(node_id, parent_id, lp_bound)`` when it was requested.
    """

    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    gap: float = 0.0
    bound: float | None = None
    nodes: tuple | None = None


def _improves(sense: str, candidate: float, reference: float | None, margin: float = 0.0) -> bool:
    if reference is None:
        return True
    if sense == "min":
        return candidate < reference - margin
    return candidate > reference + margin


def _check_lp_feasible(lp: LpProblem, x: np.ndarray, tol: float = 1e-6) -> bool:
    if np.any(x < lp.lb - tol) or np.any(x > lp.ub + tol):
        return False
    Ax = lp.A @ x
    row_tol = tol * _row_scales(lp.A, lp.b)
    for r, (s, lhs, rhs) in enumerate(zip(lp.senses, Ax, lp.b)):
        if s == "<=" and lhs - rhs > row_tol[r]:
            return False
        if s == ">=" and rhs - lhs > row_tol[r]:
            return False
        if s == "=" and abs(lhs - rhs) > row_tol[r]:
            return False
    return True


def _snap_binaries(x: np.ndarray, binary: tuple) -> np.ndarray:
    out = x.copy()
    for i in binary:
        r = round(out[i])
        if abs(out[i] - r) <= 1e-5:
            out[i] = float(r)
    return out


def _relative_gap(obj: float | None, bound: float | None) -> float:
    if obj is None or bound is None:
        return np.inf
    return abs(obj - bound) / max(1.0, abs(obj))


def _with_bounds(lp: LpProblem, lb: np.ndarray, ub: np.ndarray) -> LpProblem:
    return LpProblem(c=lp.c, sense=lp.sense, A=lp.A, senses=lp.senses, b=lp.b, lb=lb, ub=ub)


def _branch_and_bound(p, time_limit, warm_start, gap_tol, collect_nodes):
    lp = p.lp
    sense = lp.sense
    inc_x = None
    inc_obj = None
    if warm_start is not None:
        ws = np.asarray(warm_start, dtype=np.float64)
        if ws.shape != (lp.n_vars,):
            raise ValueError("warm start has the wrong dimension")
        ws = _snap_binaries(ws, p.binary)
        if any(abs(ws[i] - round(ws[i])) > INT_TOL for i in p.binary):
            raise ValueError("warm start violates integrality")
        if not _check_lp_feasible(lp, ws):
            raise ValueError("warm start is not feasible")
        inc_x = ws
        inc_obj = float(lp.c @ ws)

    t0 = time.monotonic()
    pr_sign = 1.0 if sense == "min" else -1.0
    log: list[tuple] = []
    heap: list[tuple] = []
    counter = itertools.count()
    # entries: (priority, tiebreak, node_id, parent_id, fixes)
    heapq.heappush(heap, (-np.inf, next(counter), 0, None, {}))
    next_id = 1
    timed_out = False
    best_open = None  # tightest bound among unexplored nodes, set on timeout

    while heap:
        priority, _, node_id, parent_id, fixes = heapq.heappop(heap)
        if time_limit is not None and time.monotonic() - t0 > time_limit:
            timed_out = True
            best_open = pr_sign * priority if np.isfinite(priority) else None
            break
        if inc_obj is not None and np.isfinite(priority):
            if not _improves(sense, pr_sign * priority, inc_obj, 1e-9):
                # best-first order: nothing left can beat the incumbent
                break
        lb = lp.lb.copy()
        ub = lp.ub.copy()
        for j, v in fixes.items():
            lb[j] = ub[j] = float(v)
        sol = solve_lp(_with_bounds(lp, lb, ub))
        if sol.status == "infeasible":
            continue
        if sol.status != "optimal":
            raise KernelError("unbounded relaxation inside branch and bound")
        bound = sol.objective
        if collect_nodes:
            log.append((node_id, parent_id, bound))
        if inc_obj is not None and not _improves(sense, bound, inc_obj, 1e-9):
            continue
        x = sol.x
        frac = [(abs(x[i] - round(x[i])), i) for i in p.binary if i not in fixes]
        frac = [(f, i) for f, i in frac if f > INT_TOL]
        if not frac:
            cand = _snap_binaries(x, p.binary)
            cand_obj = float(lp.c @ cand)
            if _improves(sense, cand_obj, inc_obj):
                inc_x, inc_obj = cand, cand_obj
            continue
        # branch on the most fractional binary; ties to the lowest index
        j = max(frac, key=lambda fi: (min(fi[0], 1.0 - fi[0]), -fi[1]))[1]
        for v in (0, 1):
            child = dict(fixes)
            child[j] = v
            heapq.heappush(heap, (pr_sign * bound, next(counter), next_id, node_id, child))
            next_id += 1

    nodes = tuple(log) if collect_nodes else None
    if inc_x is None:
        if timed_out:
            return MilpSolution(status="time-limit", gap=np.inf, bound=best_open, nodes=nodes)
        return MilpSolution(status="infeasible", nodes=nodes)
    if timed_out:
        gap = _relative_gap(inc_obj, best_open) if best_open is not None else 0.0
        status = "optimal" if gap <= gap_tol else "time-limit"
        return MilpSolution(
            status=status, x=inc_x, objective=inc_obj, gap=gap, bound=best_open, nodes=nodes
        )
    return MilpSolution(
        status="optimal", x=inc_x, objective=inc_obj, gap=0.0, bound=inc_obj, nodes=nodes
    )


def _solve_highs(p, time_limit, warm_start, gap_tol):
    lp = p.lp
    sign = 1.0 if lp.sense == "min" else -1.0
    A = lp.A
    b = lp.b
    lo = np.full(A.shape[0], -np.inf)
    hi = np.full(A.shape[0], np.inf)
    for r, s in enumerate(lp.senses):
        if s in ("<=", "="):
            hi[r] = b[r]
        if s in (">=", "="):
            lo[r] = b[r]
    warm_obj = None
    if warm_start is not None:
        ws = _snap_binaries(np.asarray(warm_start, dtype=np.float64), p.binary)
        if not _check_lp_feasible(lp, ws) or any(
            abs(ws[i] - round(ws[i])) > INT_TOL for i in p.binary
        ):
            raise ValueError("warm start is not feasible")
        warm_obj = float(lp.c @ ws)
        # HiGHS takes no starting point through scipy; an objective cutoff
        # row keeps every optimum while pruning the tree just as hard.
        A = sparse.vstack([A, sparse.csr_matrix(lp.c.reshape(1, -1))], format="csr")
        lo = np.append(lo, warm_obj if lp.sense == "max" else -np.inf)
        hi = np.append(hi, warm_obj if lp.sense == "min" else np.inf)

    integrality = np.zeros(lp.n_vars, dtype=np.uint8)
    for i in p.binary:
        integrality[i] = 1

    def _run(presolve):
        options = {"presolve": presolve, "mip_rel_gap": 1e-9}
        if time_limit is not None:
            options["time_limit"] = float(time_limit)
        return scipy.optimize.milp(
            c=sign * lp.c,
            constraints=scipy.optimize.LinearConstraint(A, lo, hi),
            integrality=integrality,
            bounds=scipy.optimize.Bounds(lp.lb, lp.ub),
            options=options,
        )

    res = _run(True)
    if res.status == 2:
        # HiGHS's MIP presolve occasionally declares feasible big-M models
        # infeasible; a presolve-free rerun settles the verdict either way.
        res = _run(False)
    if res.status == 2:
        return MilpSolution(status="infeasible")
    if res.status == 3:
        raise KernelError("unbounded MILP")
    if res.status not in (0, 1):
        raise KernelError(f"MILP solver failure: {res.message}")

    if res.x is None:
        if warm_obj is not None:
            ws = _snap_binaries(np.asarray(warm_start, dtype=np.float64), p.binary)
            return MilpSolution(
                status="time-limit", x=ws, objective=warm_obj, gap=np.inf, bound=None
            )
        return MilpSolution(status="time-limit", gap=np.inf)

    x = _snap_binaries(np.asarray(res.x, dtype=np.float64), p.binary)
    obj = float(lp.c @ x)
    bound = sign * float(res.mip_dual_bound) if np.isfinite(res.mip_dual_bound) else None
    if not _check_lp_feasible(lp, x):
        raise KernelError("MILP incumbent fails feasibility re-check")
    if any(abs(x[i] - round(x[i])) > INT_TOL for i in p.binary):
        raise KernelError("MILP incumbent fails integrality re-check")
    gap = _relative_gap(obj, bound)
    if res.status == 0:
        return MilpSolution(
            status="optimal", x=x, objective=obj, gap=0.0 if gap <= gap_tol else gap, bound=bound
        )
    status = "optimal" if gap <= gap_tol else "time-limit"
    return MilpSolution(status=status, x=x, objective=obj, gap=gap, bound=bound)


def solve_milp(
    p: MilpProblem,
    time_limit: float | None = None,
    *,
    backend: str = "auto",
    warm_start=None,
    gap_tol: float = GAP_TOL,
    collect_nodes: bool = False,
) -> MilpSolution:
    """Solve a binary MILP to proven optimality (or best incumbent on timeout).

    ``backend`` is ``auto`` (tree search for small binary counts, HiGHS
    beyond), ``bb``, or ``highs``.  ``warm_start`` is an optional feasible
    point used to prune; it never changes which objective value is optimal.
    ``collect_nodes`` (tree search only) attaches the branch log.
    """
    if not isinstance(p, MilpProblem):
        raise TypeError("solve_milp expects a MilpProblem")
    if not p.binary:
        sol = solve_lp(p.lp)
        if sol.status == "infeasible":
            return MilpSolution(status="infeasible")
        if sol.status != "optimal":
            raise KernelError("unbounded LP passed to solve_milp")
        return MilpSolution(
            status="optimal", x=sol.x, objective=sol.objective, gap=0.0, bound=sol.objective
        )
    if backend == "auto":
        backend = "bb" if (len(p.binary) <= _BB_MAX_BINARIES or collect_nodes) else "highs"
    if backend == "bb":
        return _branch_and_bound(p, time_limit, warm_start, gap_tol, collect_nodes)
    if backend == "highs":
        return _solve_highs(p, time_limit, warm_start, gap_tol)
    raise ValueError(f"unknown backend {backend!r}")


def solve_milp_enumeration(p: MilpProblem) -> MilpSolution:
    """Brute-force reference: try every binary assignment, keep the best LP.

    Exponential in the binary count (guarded at 20); exists so the branch
    engines have an independent answer to agree with.
    """
    if len(p.binary) > 20:
        raise ValueError("enumeration oracle capped at 20 binaries")
    lp = p.lp
    best = None
    for bits in itertools.product((0.0, 1.0), repeat=len(p.binary)):
        lb = lp.lb.copy()
        ub = lp.ub.copy()
        for j, v in zip(p.binary, bits):
            lb[j] = ub[j] = v
        sol = solve_lp(_with_bounds(lp, lb, ub))
        if sol.status != "optimal":
            continue
        if best is None or _improves(lp.sense, sol.objective, best[1]):
            best = (sol.x, sol.objective)
    if best is None:
        return MilpSolution(status="infeasible")
    x = _snap_binaries(best[0], p.binary)
    return MilpSolution(status="optimal", x=x, objective=best[1], gap=0.0, bound=best[1])
