"""Linear-program kernel with verified weak-duality certificates.

Hosts every LP subproblem of the library (coverage scalings, the
alternating reduction steps, MILP relaxations).  Solving is delegated to
HiGHS through :func:`scipy.optimize.linprog`; the kernel contract is the
surface here: explicit statuses, deterministic results for a fixed input,
and a dual certificate that is checked on every optimal solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
import scipy.optimize

__all__ = ["LpProblem", "LpSolution", "KernelError", "solve_lp"]

# Feasibility tolerances: rows are checked absolutely, bounds tightly.
ROW_TOL = 1e-7
BOUND_TOL = 1e-9
CERT_TOL = 1e-6

_SENSES = ("<=", "=", ">=")


class KernelError(RuntimeError):
    """Numerical failure inside an LP/MILP kernel (not a model status)."""


def _as_matrix(A, n_vars: int):
    if A is None:
        return sparse.csr_matrix((0, n_vars))
    if sparse.issparse(A):
        M = A.tocsr().astype(np.float64)
        if not np.all(np.isfinite(M.data)):
            raise ValueError("constraint matrix contains non-finite entries")
    else:
        M = np.asarray(A, dtype=np.float64)
        if M.ndim != 2:
            raise ValueError("constraint matrix must be 2-dimensional")
        if not np.all(np.isfinite(M)):
            raise ValueError("constraint matrix contains non-finite entries")
        M = sparse.csr_matrix(M)
    if M.shape[1] != n_vars:
        raise ValueError(f"constraint matrix has {M.shape[1]} columns, expected {n_vars}")
    return M


@dataclass(frozen=True)
class LpProblem:
    """``min/max c.x`` subject to ``A x (<=,=,>=) b`` and ``lb <= x <= ub``.

    ``lb`` defaults to zeros and ``ub`` to +inf.  ``A`` may be dense or a
    scipy sparse matrix; rows are paired with ``senses`` and ``b``.
    """

    c: np.ndarray
    sense: str = "min"
    A: object = None
    senses: tuple = ()
    b: np.ndarray = ()
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("objective must be a non-empty vector")
        if not np.all(np.isfinite(c)):
            raise ValueError("objective contains non-finite entries")
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        n = c.size
        A = _as_matrix(self.A, n)
        senses = tuple(self.senses)
        b = np.asarray(self.b, dtype=np.float64).ravel()
        if len(senses) != A.shape[0] or b.size != A.shape[0]:
            raise ValueError("senses and b must match the constraint row count")
        for s in senses:
            if s not in _SENSES:
                raise ValueError(f"row sense must be one of {_SENSES}, got {s!r}")
        if not np.all(np.isfinite(b)):
            raise ValueError("right-hand side contains non-finite entries")
        lb = np.zeros(n) if self.lb is None else np.asarray(self.lb, dtype=np.float64).copy()
        ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, dtype=np.float64).copy()
        if lb.shape != (n,) or ub.shape != (n,):
            raise ValueError("bounds must match the variable count")
        if not np.all(np.isfinite(lb)):
            raise ValueError("lower bounds must be finite")
        if np.any(ub < lb - BOUND_TOL):
            raise ValueError("upper bound below lower bound")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class LpSolution:
    """Solver outcome; ``x``/``objective`` are None unless status is optimal.

    ``row_duals`` are shadow prices in the problem's own orientation
    (derivative of the optimal objective w.r.t. each right-hand side);
    ``reduced_costs`` the bound multipliers; ``dual_objective`` matches
    ``objective`` within 1e-6 whenever status is optimal.
    """

    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    row_duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    dual_objective: float | None = None


def _row_scales(A, b) -> np.ndarray:
    """Per-row magnitude max(1, |b_r|, max|A_r|) for relative feasibility tests."""
    if A.shape[0] == 0:
        return np.zeros(0)
    row_max = np.abs(A).max(axis=1).toarray().ravel()
    return np.maximum(1.0, np.maximum(row_max, np.abs(b)))


def _verify_optimal(p: LpProblem, x, res, sign: float, ub_rows, eq_rows):
    """Check primal feasibility and the weak-duality certificate; raise on failure."""
    Ax = p.A @ x
    tol = ROW_TOL * _row_scales(p.A, p.b)
    for r, (s, lhs, rhs) in enumerate(zip(p.senses, Ax, p.b)):
        resid = lhs - rhs
        if s == "<=" and resid > tol[r]:
            raise KernelError(f"row {r} violated by {resid:.2e}")
        if s == ">=" and resid < -tol[r]:
            raise KernelError(f"row {r} violated by {-resid:.2e}")
        if s == "=" and abs(resid) > tol[r]:
            raise KernelError(f"row {r} violated by {abs(resid):.2e}")
    if np.any(x < p.lb - 1e-7) or np.any(x > p.ub + 1e-7):
        raise KernelError("bound violation in reported solution")

    # Certificate algebra in the minimized <= / = form.
    c_min = sign * p.c
    y_ub = res.ineqlin.marginals if len(ub_rows) else np.zeros(0)
    y_eq = res.eqlin.marginals if len(eq_rows) else np.zeros(0)
    z_lb = res.lower.marginals
    z_ub = res.upper.marginals
    if np.any(y_ub > 1e-7) or np.any(z_lb < -1e-7) or np.any(z_ub > 1e-7):
        raise KernelError("dual certificate has wrong multiplier signs")
    station = c_min.copy()
    if len(ub_rows):
        A_ub, _ = ub_rows
        station -= A_ub.T @ y_ub
    if len(eq_rows):
        A_eq, _ = eq_rows
        station -= A_eq.T @ y_eq
    station -= z_lb + z_ub
    scale = max(1.0, float(np.abs(c_min).max()))
    if float(np.abs(station).max()) > CERT_TOL * scale:
        raise KernelError("dual certificate fails stationarity")
    dual_obj = 0.0
    if len(ub_rows):
        dual_obj += float(ub_rows[1] @ y_ub)
    if len(eq_rows):
        dual_obj += float(eq_rows[1] @ y_eq)
    dual_obj += float(p.lb @ z_lb)
    finite_ub = np.isfinite(p.ub)
    if np.any(~finite_ub & (np.abs(z_ub) > 1e-7)):
        raise KernelError("nonzero multiplier on an infinite bound")
    dual_obj += float(p.ub[finite_ub] @ z_ub[finite_ub])
    primal_obj = float(c_min @ x)
    if abs(dual_obj - primal_obj) > CERT_TOL * max(1.0, abs(primal_obj)):
        raise KernelError(
            f"weak-duality mismatch: primal {primal_obj:.9g} vs dual {dual_obj:.9g}"
        )
    return dual_obj


def solve_lp(p: LpProblem) -> LpSolution:
    """Solve an :class:`LpProblem`; deterministic for a fixed input.

    Infeasible/unbounded are reported as statuses.  Every optimal solve is
    re-checked: primal feasibility (1e-7 relative to each row's magnitude)
    and a dual certificate matching the objective within 1e-6; violations
    raise :class:`KernelError`.
    """
    sign = 1.0 if p.sense == "min" else -1.0
    senses = np.asarray(p.senses, dtype=object)
    le = np.where(senses == "<=")[0]
    ge = np.where(senses == ">=")[0]
    eq = np.where(senses == "=")[0]
    blocks_A, blocks_b = [], []
    if le.size:
        blocks_A.append(p.A[le])
        blocks_b.append(p.b[le])
    if ge.size:
        blocks_A.append(-p.A[ge])
        blocks_b.append(-p.b[ge])
    ub_rows = ()
    if blocks_A:
        ub_rows = (sparse.vstack(blocks_A, format="csr"), np.concatenate(blocks_b))
    eq_rows = ()
    if eq.size:
        eq_rows = (p.A[eq].tocsr(), p.b[eq])

    res = scipy.optimize.linprog(
        sign * p.c,
        A_ub=ub_rows[0] if ub_rows else None,
        b_ub=ub_rows[1] if ub_rows else None,
        A_eq=eq_rows[0] if eq_rows else None,
        b_eq=eq_rows[1] if eq_rows else None,
        bounds=np.column_stack([p.lb, p.ub]),
        method="highs",
        options={
            "presolve": True,
            "primal_feasibility_tolerance": 1e-9,
            "dual_feasibility_tolerance": 1e-9,
        },
    )
    if res.status == 2:
        return LpSolution(status="infeasible")
    if res.status == 3:
        return LpSolution(status="unbounded")
    if res.status != 0:
        raise KernelError(f"LP solver failure: {res.message}")

    x = np.asarray(res.x, dtype=np.float64)
    dual_obj = _verify_optimal(p, x, res, sign, ub_rows, eq_rows)

    # Reassemble duals in the original row order and orientation.
    m = p.n_rows
    row_duals = np.zeros(m)
    pos = 0
    if le.size:
        row_duals[le] = res.ineqlin.marginals[pos : pos + le.size]
        pos += le.size
    if ge.size:
        row_duals[ge] = -res.ineqlin.marginals[pos : pos + ge.size]
    if eq.size:
        row_duals[eq] = res.eqlin.marginals
    reduced = res.lower.marginals + res.upper.marginals
    if p.sense == "max":
        row_duals = -row_duals
        reduced = -reduced
    return LpSolution(
        status="optimal",
        x=x,
        objective=sign * float(res.fun),
        row_duals=row_duals,
        reduced_costs=reduced,
        dual_objective=sign * dual_obj,
    )
