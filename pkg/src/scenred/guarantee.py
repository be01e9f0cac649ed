"""Approximation-factor computation, certificates, and their verification.

For a reduced set C and the original scenarios U, the quality of C is
governed by two scaling factors: alpha (every original scenario fits
under alpha times a convex combination of C) and beta (every reduced
scenario fits under beta times a convex combination of U).  The product
alpha * beta bounds how far a robust solution computed on C can be from
the true optimum; 1/t reported by the reduction algorithms is exactly
such a product.  This module computes the factors, packages them as
checkable certificates, verifies results produced elsewhere (including
files from other processes), and rasterizes single-point guarantees into
heatmap grids for two-dimensional sets.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy import sparse

from ._validation import check_scenario_matrix
from .linprog import LpProblem, solve_lp
from .model import GuaranteeCertificate, ReductionResult

__all__ = [
    "min_scale",
    "domination_ratios",
    "cover_values",
    "alpha_one_stage",
    "beta_one_stage",
    "guarantee_single_one_stage",
    "guarantee_single_two_stage",
    "partition_bound",
    "VerificationReport",
    "verify_certificate",
    "certify",
    "Heatmap",
    "heatmap",
]

_TOL = 1e-7


def min_scale(target, point) -> float:
    """Smallest s >= 0 with ``target <= s * point`` componentwise.

    Coordinates where both entries are zero impose nothing; a positive
    target over a zero point cannot be scaled into and yields +inf.
    """
    t = np.asarray(target, dtype=np.float64)
    p = np.asarray(point, dtype=np.float64)
    if t.shape != p.shape:
        raise ValueError("target and point must have matching shapes")
    pos = t > 0
    if not np.any(pos):
        return 0.0
    with np.errstate(divide="ignore"):
        ratios = np.where(p[pos] > 0, t[pos] / np.maximum(p[pos], 1e-300), np.inf)
    return float(ratios.max())


def domination_ratios(U) -> np.ndarray:
    """Matrix d with ``d[i, l]`` = largest s such that ``s * U[i] <= U[l]``.

    Row i of an all-zero scenario is +inf everywhere (any scaling works);
    the diagonal is 1 for nonzero scenarios.  Scaling scenario l by a
    factor multiplies column l by the same factor.
    """
    X = check_scenario_matrix(U, "U")
    N = X.shape[0]
    d = np.empty((N, N))
    for i in range(N):
        pos = X[i] > 0
        if not np.any(pos):
            d[i, :] = np.inf
            continue
        d[i, :] = (X[:, pos] / X[i, pos]).min(axis=1)
    return d


def cover_values(points, targets):
    """Cheapest nonnegative-combination cover of each target by ``points``.

    For each target row t solves ``min sum(nu)`` subject to
    ``points.T @ nu >= t``, ``nu >= 0``; all targets are batched into one
    block-diagonal LP.  Returns ``(values, weights)`` where ``values[i]``
    is the optimal mass (+inf when target i touches a coordinate no point
    can reach) and ``weights[i]`` the normalized optimal combination
    (uniform when the value is 0 or +inf).
    """
    P = check_scenario_matrix(points, "points")
    T = check_scenario_matrix(targets, "targets")
    if P.shape[1] != T.shape[1]:
        raise ValueError("points and targets must share the item dimension")
    Kp, n = P.shape
    M = T.shape[0]
    reachable = P.max(axis=0) > 0
    feasible = np.array([not np.any((T[i] > 0) & ~reachable) for i in range(M)])
    values = np.full(M, np.inf)
    weights = np.full((M, Kp), 1.0 / Kp)

    idx = np.where(feasible)[0]
    blocks = []
    rhs = []
    for i in idx:
        rows = T[i] > 0
        blocks.append(sparse.csr_matrix(P.T[rows]) if rows.any() else sparse.csr_matrix((0, Kp)))
        rhs.append(T[i][rows])
    if idx.size:
        A = sparse.block_diag(blocks, format="csr")
        b = np.concatenate(rhs) if rhs else np.zeros(0)
        lp = LpProblem(
            c=np.ones(idx.size * Kp),
            sense="min",
            A=A,
            senses=(">=",) * A.shape[0],
            b=b,
        )
        sol = solve_lp(lp)
        if sol.status != "optimal":  # pragma: no cover - pre-check rules this out
            raise RuntimeError(f"cover LP ended with status {sol.status}")
        nu = sol.x.reshape(idx.size, Kp)
        mass = nu.sum(axis=1)
        values[idx] = mass
        for r, i in enumerate(idx):
            if mass[r] > _TOL:
                weights[i] = np.clip(nu[r], 0.0, None) / mass[r]
    return values, weights


def alpha_one_stage(U, C):
    """Factor scaling convex combinations of C up over every scenario of U.

    Returns ``(alpha, witnesses)`` with ``witnesses[i]`` the combination
    weights certifying scenario i; alpha is +inf when some scenario has
    support outside the union of supports of C.
    """
    values, weights = cover_values(C, U)
    return float(values.max()) if values.size else 0.0, weights


def beta_one_stage(C, U):
    """Factor scaling convex combinations of U up over every row of C.

    Symmetric counterpart of :func:`alpha_one_stage`; equals 1 whenever C
    lies inside the convex hull of U, and 0 for an all-zero C.
    """
    values, weights = cover_values(U, C)
    return float(values.max()) if values.size else 0.0, weights


def guarantee_single_one_stage(U, c_hat) -> float:
    """Guarantee of the single-scenario reduction ``{c_hat}``: alpha * beta.

    +inf when either factor is +inf; invariant under scaling of c_hat.
    """
    c = np.asarray(c_hat, dtype=np.float64).reshape(1, -1)
    a, _ = alpha_one_stage(U, c)
    b, _ = beta_one_stage(c, U)
    if np.isinf(a) or np.isinf(b):
        return float("inf")
    return a * b


def guarantee_single_two_stage(U, c_hat) -> float:
    """Guarantee of ``{c_hat}`` when recourse reacts after the scenario shows.

    With recourse, factors below 1 cannot help, so both are clamped:
    alpha = max(1, worst scaling of c_hat over each scenario) and
    beta = max(1, cheapest scaling of some single original scenario over
    c_hat).  Returns alpha * beta (+inf when unreachable).
    """
    X = check_scenario_matrix(U, "U")
    c = np.asarray(c_hat, dtype=np.float64).ravel()
    if c.shape != (X.shape[1],):
        raise ValueError("c_hat has the wrong dimension")
    if np.any(c < 0) or not np.all(np.isfinite(c)):
        raise ValueError("c_hat must be finite and nonnegative")
    alpha = max(1.0, max(min_scale(X[i], c) for i in range(X.shape[0])))
    beta = max(1.0, min(min_scale(c, X[l]) for l in range(X.shape[0])))
    if np.isinf(alpha) or np.isinf(beta):
        return float("inf")
    return alpha * beta


def partition_bound(cluster_sizes) -> int:
    """Guarantee achievable by averaging within any partition: the largest part.

    With clusters of the given sizes, the cluster midpoints carry factor
    ``max(sizes)``; for N scenarios in K balanced parts this is ceil(N/K).
    """
    sizes = list(cluster_sizes)
    if not sizes:
        raise ValueError("cluster_sizes must be non-empty")
    out = 0
    for s in sizes:
        v = int(s)
        if v != s or v <= 0:
            raise ValueError("cluster sizes must be positive integers")
        out = max(out, v)
    return out


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of :func:`verify_certificate`.

    ``valid`` with a :class:`GuaranteeCertificate` on success; otherwise
    ``failures`` lists every violated condition in human-readable form.
    """

    valid: bool
    certificate: GuaranteeCertificate | None
    failures: tuple = ()


def _verify_stage1(X: np.ndarray, result: ReductionResult) -> VerificationReport:
    failures = []
    recombined = result.lambda_ @ X
    err = float(np.abs(recombined - result.reduced).max())
    if err > 1e-6:
        failures.append(
            f"reduced scenarios deviate from their stated combinations of U by {err:.2e}"
        )
    alpha, a_wit = alpha_one_stage(X, result.reduced)
    beta, b_wit = beta_one_stage(result.reduced, X)
    product = np.inf if (np.isinf(alpha) or np.isinf(beta)) else alpha * beta
    if product > result.guarantee + 1e-6:
        failures.append(
            f"stated guarantee {result.guarantee:.9g} is below the certified factor {product:.9g}"
        )
    if failures:
        return VerificationReport(valid=False, certificate=None, failures=tuple(failures))
    cert = GuaranteeCertificate(
        alpha=alpha, beta=beta, alpha_witnesses=a_wit, beta_witnesses=b_wit, stage=1
    )
    return VerificationReport(valid=True, certificate=cert)


def _verify_stage2(X: np.ndarray, result: ReductionResult) -> VerificationReport:
    failures = []
    selected = []
    for k in range(result.k):
        row = result.reduced[k]
        match = np.where(np.abs(X - row).max(axis=1) <= 1e-6)[0]
        if match.size == 0:
            failures.append(f"reduced scenario {k} is not a scenario of U")
        else:
            selected.append(int(match[0]))
    if failures:
        return VerificationReport(valid=False, certificate=None, failures=tuple(failures))
    d = domination_ratios(X)
    sub = d[:, selected]
    best = sub.max(axis=1)
    worst = int(best.argmin())
    if best[worst] < result.t - _TOL:
        failures.append(
            f"scenario {worst} is covered only at level {best[worst]:.9g}, below t={result.t:.9g}"
        )
        return VerificationReport(valid=False, certificate=None, failures=tuple(failures))
    alpha = float("inf") if result.t <= 0 else 1.0 / result.t
    a_wit = sub.argmax(axis=1).astype(np.int64)
    cert = GuaranteeCertificate(
        alpha=alpha,
        beta=1.0,
        alpha_witnesses=a_wit,
        beta_witnesses=np.asarray(selected, dtype=np.int64),
        stage=2,
    )
    return VerificationReport(valid=True, certificate=cert)


def verify_certificate(U, result: ReductionResult) -> VerificationReport:
    """Independently re-check a reduction result against its uncertainty set.

    Stage 1: the reduced rows must be the stated combinations of U and the
    recomputed alpha * beta must not exceed the stated guarantee.  Stage 2:
    every reduced row must be an original scenario and each scenario of U
    must be dominated at level t by some selected scenario.  All checks use
    the module tolerances; nothing is trusted from the result but its
    numbers.
    """
    X = check_scenario_matrix(U, "U")
    if not isinstance(result, ReductionResult):
        raise TypeError("verify_certificate expects a ReductionResult")
    if result.reduced.shape[1] != X.shape[1]:
        return VerificationReport(
            valid=False,
            certificate=None,
            failures=(f"reduced set has {result.reduced.shape[1]} items, U has {X.shape[1]}",),
        )
    if result.lambda_.shape[1] != X.shape[0]:
        return VerificationReport(
            valid=False,
            certificate=None,
            failures=(
                f"lambda has {result.lambda_.shape[1]} columns, U has {X.shape[0]} scenarios",
            ),
        )
    if result.stage == 1:
        return _verify_stage1(X, result)
    return _verify_stage2(X, result)


def certify(U, result: ReductionResult) -> GuaranteeCertificate:
    """Like :func:`verify_certificate` but raises ``ValueError`` on failure."""
    report = verify_certificate(U, result)
    if not report.valid:
        raise ValueError("certificate verification failed: " + "; ".join(report.failures))
    return report.certificate


def _dual_polygon_vertices(X: np.ndarray) -> np.ndarray:
    """Vertices of {y >= 0 : X y <= 1} for two-dimensional scenario sets.

    Bounded whenever every item has a positive entry somewhere in X; the
    maximum of a linear function over the region is attained here.
    """
    N = X.shape[0]
    rows = [X[i] for i in range(N)] + [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    rhs = [1.0] * N + [0.0, 0.0]
    verts = [np.zeros(2)]
    for (a1, b1), (a2, b2) in combinations(zip(rows, rhs), 2):
        M = np.vstack([a1, a2])
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        if abs(det) < 1e-12:
            continue
        y = np.linalg.solve(M, np.array([b1, b2]))
        if np.any(y < -1e-9):
            continue
        if np.any(X @ y > 1.0 + 1e-9):
            continue
        verts.append(np.clip(y, 0.0, None))
    return np.unique(np.round(np.vstack(verts), 12), axis=0)


@dataclass(frozen=True)
class Heatmap:
    """Guarantee raster over a square grid of candidate single scenarios.

    ``values`` holds the raw (uncapped, possibly infinite) guarantees with
    ``values[ix, iy]`` belonging to ``(xs[ix], ys[iy])``; CSV output caps
    at ``cap`` and flags capped cells.
    """

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    stage: int
    cap: float

    @property
    def min_value(self) -> float:
        return float(self.values.min())

    @property
    def argmin_point(self) -> tuple[float, float]:
        ix, iy = np.unravel_index(int(self.values.argmin()), self.values.shape)
        return float(self.xs[ix]), float(self.ys[iy])

    def rows(self) -> list[tuple[float, float, float, int]]:
        """CSV rows ``(x, y, guarantee, capped)`` in row-major order."""
        out = []
        for ix, x in enumerate(self.xs):
            for iy, y in enumerate(self.ys):
                v = self.values[ix, iy]
                if v > self.cap:
                    out.append((float(x), float(y), float(self.cap), 1))
                else:
                    out.append((float(x), float(y), float(v), 0))
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "guarantee", "capped"])
            for x, y, v, flag in self.rows():
                w.writerow([f"{x:.10g}", f"{y:.10g}", f"{v:.10g}", flag])


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError("step must be positive")
    if hi < lo:
        raise ValueError("max must be at least min")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def heatmap(U, stage: int, lo: float, hi: float, step: float, cap: float = 3.0) -> Heatmap:
    """Guarantee of every single-point reduction on a 2-d grid.

    Only defined for two-dimensional uncertainty sets.  Grid nodes run
    from ``lo`` to ``hi`` in ``step`` increments on both axes; values are
    the stage-appropriate single-scenario guarantees, computed in closed
    form (the one-stage beta factor is maximized over the vertices of the
    dual polygon of U, which is exact for the LP it replaces).
    """
    X = check_scenario_matrix(U, "U")
    if X.shape[1] != 2:
        raise ValueError("heatmap requires two-dimensional scenarios")
    if stage not in (1, 2):
        raise ValueError("stage must be 1 or 2")
    xs = _grid(lo, hi, step)
    ys = xs.copy()
    gx = xs[:, None, None]  # (Gx, 1, 1)
    gy = ys[None, :, None]  # (1, Gy, 1)
    grid = np.concatenate(np.broadcast_arrays(gx, gy), axis=2)  # (Gx, Gy, 2)
    colmax = X.max(axis=0)

    with np.errstate(divide="ignore", invalid="ignore"):
        # worst scaling of the node over each scenario: columns nobody uses
        # contribute nothing, a used column the node misses costs infinity
        a_ratio = np.where(
            colmax[None, None, :] > 0,
            np.where(grid > 0, colmax[None, None, :] / grid, np.inf),
            0.0,
        )
        alpha_raw = a_ratio.max(axis=2)

        if stage == 1:
            V = _dual_polygon_vertices(X)
            beta = np.einsum("xyj,vj->xyv", grid, V).max(axis=2)
            for j in range(2):
                if colmax[j] <= 0:
                    beta = np.where(grid[..., j] > 0, np.inf, beta)
            values = _inf_safe_product(alpha_raw, beta)
        else:
            alpha = np.maximum(1.0, alpha_raw)
            # cheapest single original scenario dominating the node
            r = np.where(
                grid[:, :, None, :] > 0,
                np.where(X[None, None, :, :] > 0, grid[:, :, None, :] / X[None, None, :, :], np.inf),
                0.0,
            )
            beta = np.maximum(1.0, r.max(axis=3).min(axis=2))
            values = _inf_safe_product(alpha, beta)
    return Heatmap(xs=xs, ys=ys, values=values, stage=stage, cap=float(cap))


def _inf_safe_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise ``a * b`` with ``inf`` whenever either factor is ``inf``."""
    bad = np.isinf(a) | np.isinf(b)
    return np.where(bad, np.inf, np.where(bad, 1.0, a) * np.where(bad, 1.0, b))
