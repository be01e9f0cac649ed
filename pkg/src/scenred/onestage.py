"""Scenario-reduction algorithms for the one-stage worst-case problem.

All methods produce a :class:`ReductionResult` whose factor ``t`` means:
every original scenario, scaled by ``t``, is dominated by the convex
combination of reduced scenarios its ``mu`` row describes.  The solution
of the reduced problem is then within factor ``1/t`` of the true robust
optimum.

* ``reduce_continuous`` ("cont") — alternate two linear programs: the
  mu-step re-covers each scenario as well as possible by the current
  reduced set, the lambda-step rebuilds the reduced set as convex
  combinations of the originals to maximize the common factor.  Each step
  keeps the previous iterate feasible, so t never decreases.
* ``reduce_assignment`` ("ip-mu") — the same model with mu forced
  binary, solved exactly as a big-M MILP.
* ``reduce_subset`` ("ip-lambda") — the reduced set must be K of the
  original scenarios; exact MILP for moderate N, greedy + swap beyond.
* ``reduce_kmeans`` / ``reduce_midpoint`` — geometric baselines whose
  guarantees are certified after the fact.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import sparse

from ._validation import as_rng, check_count, check_scenario_matrix
from .guarantee import alpha_one_stage, min_scale
from .linprog import LpProblem, solve_lp
from .milp import MilpProblem, solve_milp
from .model import ReductionResult

__all__ = [
    "mu_step",
    "lambda_step",
    "reduce_continuous",
    "reduce_assignment",
    "reduce_subset",
    "brute_subset_oracle",
    "reduce_kmeans",
    "midpoint",
    "reduce_midpoint",
]

_REL_TOL = 1e-7


def _finish(reduced, lam, mu, t, method, stage=1, exact=True, gap=0.0) -> ReductionResult:
    t = float(min(max(t, 0.0), 1.0)) + 0.0  # also normalizes -0.0
    guarantee = float("inf") if t <= 0.0 else 1.0 / t
    return ReductionResult(
        reduced=np.asarray(reduced, dtype=np.float64),
        lambda_=lam,
        mu=mu,
        t=t,
        guarantee=guarantee,
        method=method,
        stage=stage,
        exact=exact,
        gap=gap,
    )


def _normalize_rows(M: np.ndarray) -> np.ndarray:
    M = np.clip(np.asarray(M, dtype=np.float64), 0.0, None)
    sums = M.sum(axis=1, keepdims=True)
    out = np.where(sums > 0, M / np.where(sums > 0, sums, 1.0), 1.0 / M.shape[1])
    return out


def mu_step(U, C):
    """Best per-scenario coverage of U by the fixed reduced set C.

    For each scenario i maximizes ``t_i`` subject to
    ``t_i * U[i] <= mu_i @ C`` with convex weights ``mu_i``; the whole
    batch is one block-diagonal LP.  Returns ``(mu, t_per_scenario)``; an
    all-zero scenario is coverable at any level (+inf, uniform weights).
    """
    X = check_scenario_matrix(U, "U")
    Ch = check_scenario_matrix(C, "C")
    if X.shape[1] != Ch.shape[1]:
        raise ValueError("U and C must share the item dimension")
    N, n = X.shape
    K = Ch.shape[0]
    mu = np.full((N, K), 1.0 / K)
    t = np.full(N, np.inf)
    live = np.where(X.max(axis=1) > 0)[0]
    if live.size == 0:
        return mu, t

    # Per scenario: variables [t_i, mu_i1..mu_iK]; maximize sum of t_i.
    blocks = []
    senses: list[str] = []
    rhs: list[float] = []
    for i in live:
        rows = X[i] > 0
        m = int(rows.sum())
        block = np.zeros((m + 1, 1 + K))
        block[:m, 0] = X[i][rows]
        block[:m, 1:] = -Ch.T[rows]
        block[m, 1:] = 1.0
        blocks.append(sparse.csr_matrix(block))
        senses.extend(["<="] * m + ["="])
        rhs.extend([0.0] * m + [1.0])
    A = sparse.block_diag(blocks, format="csr")
    width = 1 + K
    c = np.zeros(live.size * width)
    c[::width] = 1.0
    ub = np.full(live.size * width, np.inf)
    # t_i is bounded by coverage alone; the explicit cap only tames duals.
    ub[::width] = 1e6
    lp = LpProblem(c=c, sense="max", A=A, senses=tuple(senses), b=np.asarray(rhs), ub=ub)
    sol = solve_lp(lp)
    if sol.status != "optimal":  # pragma: no cover - always feasible and bounded
        raise RuntimeError(f"mu-step LP ended with status {sol.status}")
    x = sol.x.reshape(live.size, width)
    t[live] = x[:, 0]
    mu[live] = _normalize_rows(x[:, 1:])
    return mu, t


def lambda_step(U, mu):
    """Best reduced set for fixed coverage weights ``mu``.

    Maximizes a single ``t`` over convex combinations
    ``C[k] = lambda[k] @ U`` subject to ``t * U[i] <= mu_i @ C`` for every
    scenario.  Returns ``(lambda, t)``; never infeasible (t = 0 with any
    convex lambda always works).  Clusters carrying no mu mass are
    re-anchored at the scenario farthest from the current reduced set.
    """
    X = check_scenario_matrix(U, "U")
    M = np.asarray(mu, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != X.shape[0]:
        raise ValueError("mu must be (N, K) for the N scenarios of U")
    N, n = X.shape
    K = M.shape[1]
    M = _normalize_rows(M)

    # Variables [t, z(K*n), lambda(K*N)] with z_k the k-th reduced scenario.
    width = 1 + K * n + K * N
    c = np.zeros(width)
    c[0] = 1.0

    def zcol(k, j):
        return 1 + k * n + j

    def lcol(k, l):
        return 1 + K * n + k * N + l

    data, rows_i, cols_i = [], [], []
    senses: list[str] = []
    rhs: list[float] = []
    r = 0
    for i in range(N):
        for j in range(n):
            if X[i, j] <= 0:
                continue
            rows_i.append(r)
            cols_i.append(0)
            data.append(X[i, j])
            for k in range(K):
                if M[i, k] > 0:
                    rows_i.append(r)
                    cols_i.append(zcol(k, j))
                    data.append(-M[i, k])
            senses.append("<=")
            rhs.append(0.0)
            r += 1
    for k in range(K):
        for j in range(n):
            rows_i.append(r)
            cols_i.append(zcol(k, j))
            data.append(1.0)
            for l in range(N):
                if X[l, j] > 0:
                    rows_i.append(r)
                    cols_i.append(lcol(k, l))
                    data.append(-X[l, j])
            senses.append("=")
            rhs.append(0.0)
            r += 1
    for k in range(K):
        for l in range(N):
            rows_i.append(r)
            cols_i.append(lcol(k, l))
            data.append(1.0)
        senses.append("=")
        rhs.append(1.0)
        r += 1
    A = sparse.csr_matrix((data, (rows_i, cols_i)), shape=(r, width))
    ub = np.full(width, np.inf)
    ub[0] = 1.0  # a common factor above 1 is impossible for nonzero U
    lp = LpProblem(c=c, sense="max", A=A, senses=tuple(senses), b=np.asarray(rhs), ub=ub)
    sol = solve_lp(lp)
    if sol.status != "optimal":  # pragma: no cover - always feasible and bounded
        raise RuntimeError(f"lambda-step LP ended with status {sol.status}")
    t = float(sol.x[0])
    lam = _normalize_rows(sol.x[1 + K * n :].reshape(K, N))

    dead = np.where(M.sum(axis=0) <= 1e-12)[0]
    if dead.size:
        centers = [lam[k] @ X for k in range(K) if k not in set(dead.tolist())]
        for k in dead:
            if centers:
                dists = ((X[:, None, :] - np.asarray(centers)[None, :, :]) ** 2).sum(-1).min(1)
            else:
                dists = (X**2).sum(axis=1)
            pick = int(dists.argmax())
            row = np.zeros(N)
            row[pick] = 1.0
            lam[k] = row
            centers.append(X[pick])
    return lam, t


def _balanced_partition(N: int, K: int):
    """Contiguous balanced index chunks; sizes differ by at most one."""
    return [chunk for chunk in np.array_split(np.arange(N), K)]


def reduce_continuous(
    U,
    K: int,
    *,
    reps: int = 10,
    max_iters: int = 20,
    seed=None,
    init=None,
    on_iteration=None,
) -> ReductionResult:
    """Alternating-LP reduction ("cont").

    Runs ``reps`` repetitions: the first starts from the midpoints of a
    balanced partition (which alone already secures a guarantee of
    ceil(N/K)), the rest from K distinct scenarios sampled without
    replacement.  ``init`` replaces the first repetition's start.  Within
    a repetition the two steps alternate until the gain in t drops below
    1e-7 (relative) or ``max_iters`` lambda-updates have run; t is
    non-decreasing along the way.  Best repetition wins, ties to the
    lowest repetition index.  ``on_iteration(rep, step, t)`` is invoked
    after every half-step.
    """
    X = check_scenario_matrix(U, "U")
    N, n = X.shape
    check_count(K, 1, N, "K")
    check_count(reps, 1, 10**6, "reps")
    check_count(max_iters, 1, 10**6, "max_iters")
    rng = as_rng(seed)

    starts = []
    if init is not None:
        C0 = check_scenario_matrix(init, "init")
        if C0.shape != (K, n):
            raise ValueError(f"init must have shape ({K}, {n})")
        starts.append(C0)
    else:
        starts.append(np.vstack([X[chunk].mean(axis=0) for chunk in _balanced_partition(N, K)]))
    for _ in range(reps - 1):
        idx = np.sort(rng.choice(N, size=K, replace=False))
        starts.append(X[idx])

    best = None
    for rep, C in enumerate(starts):
        lam = None
        mu = None
        t = -np.inf
        prev = -np.inf
        for it in range(max_iters):
            mu, ti = mu_step(X, C)
            t = float(min(ti.min(), 1.0))
            if on_iteration is not None:
                on_iteration(rep, 2 * it, t)
            if t - prev < _REL_TOL * max(1.0, abs(prev)):
                break
            prev = t
            lam, t_l = lambda_step(X, mu)
            C = lam @ X
            if on_iteration is not None:
                on_iteration(rep, 2 * it + 1, t_l)
            prev = max(prev, t_l)
        else:
            mu, ti = mu_step(X, C)
            t = float(min(ti.min(), 1.0))
            if on_iteration is not None:
                on_iteration(rep, 2 * max_iters, t)
        if lam is None:
            # no lambda-update ran; express the start set explicitly
            lam, _ = lambda_step(X, mu)
            C = lam @ X
            mu, ti = mu_step(X, C)
            t = float(min(ti.min(), 1.0))
        if best is None or t > best[0] + 1e-12:
            best = (t, C, lam, mu)
    t, C, lam, mu = best
    return _finish(C, lam, mu, t, method="cont", exact=False, gap=float("inf"))


def _round_assignment(X, C, mu_soft):
    """One-hot mu at the heaviest weight plus the exact t it supports."""
    N = X.shape[0]
    K = C.shape[0]
    hard = np.zeros((N, K))
    assign = mu_soft.argmax(axis=1)
    hard[np.arange(N), assign] = 1.0
    t = 1.0
    for i in range(N):
        if not np.any(X[i] > 0):
            continue
        s = min_scale(X[i], C[assign[i]])
        t = min(t, 0.0 if s <= 0 or not np.isfinite(s) else 1.0 / s)
    return hard, float(t)


def reduce_assignment(U, K: int, *, time_limit: float = 60.0) -> ReductionResult:
    """Exact reduction with every scenario assigned to one reduced scenario
    ("ip-mu").

    Big-M MILP over [t, centers, binary assignment, lambda]; M is the
    largest cost entry, which bounds every center coordinate, so the
    linearization is tight.  A balanced-partition warm start prunes the
    search without affecting the optimum.  If the time limit bites, the
    incumbent is returned with ``exact=False`` and its proven gap.
    """
    X = check_scenario_matrix(U, "U")
    N, n = X.shape
    check_count(K, 1, N, "K")
    if K == N:
        eye = np.eye(N)
        return _finish(X, eye, eye, 1.0, method="ip-mu")

    bigM = float(X.max())
    width = 1 + K * n + N * K + K * N

    def zcol(k, j):
        return 1 + k * n + j

    def mcol(i, k):
        return 1 + K * n + i * K + k

    def lcol(k, l):
        return 1 + K * n + N * K + k * N + l

    data, rows_i, cols_i = [], [], []
    senses: list[str] = []
    rhs: list[float] = []
    r = 0
    for i in range(N):
        for k in range(K):
            for j in range(n):
                if X[i, j] <= 0:
                    continue
                rows_i += [r, r, r]
                cols_i += [0, zcol(k, j), mcol(i, k)]
                data += [X[i, j], -1.0, bigM]
                senses.append("<=")
                rhs.append(bigM)
                r += 1
    for k in range(K):
        for j in range(n):
            rows_i.append(r)
            cols_i.append(zcol(k, j))
            data.append(1.0)
            for l in range(N):
                if X[l, j] > 0:
                    rows_i.append(r)
                    cols_i.append(lcol(k, l))
                    data.append(-X[l, j])
            senses.append("=")
            rhs.append(0.0)
            r += 1
    for i in range(N):
        for k in range(K):
            rows_i.append(r)
            cols_i.append(mcol(i, k))
            data.append(1.0)
        senses.append("=")
        rhs.append(1.0)
        r += 1
    for k in range(K):
        for l in range(N):
            rows_i.append(r)
            cols_i.append(lcol(k, l))
            data.append(1.0)
        senses.append("=")
        rhs.append(1.0)
        r += 1
    A = sparse.csr_matrix((data, (rows_i, cols_i)), shape=(r, width))
    c = np.zeros(width)
    c[0] = 1.0
    ub = np.full(width, np.inf)
    ub[0] = 1.0
    lp = LpProblem(c=c, sense="max", A=A, senses=tuple(senses), b=np.asarray(rhs), ub=ub)
    binaries = tuple(mcol(i, k) for i in range(N) for k in range(K))

    warm = np.zeros(width)
    chunks = _balanced_partition(N, K)
    lam_w = np.zeros((K, N))
    for k, chunk in enumerate(chunks):
        lam_w[k, chunk] = 1.0 / chunk.size
        for i in chunk:
            warm[mcol(i, k)] = 1.0
    C_w = lam_w @ X
    t_w = 1.0
    for k, chunk in enumerate(chunks):
        for i in chunk:
            if np.any(X[i] > 0):
                s = min_scale(X[i], C_w[k])
                t_w = min(t_w, 0.0 if not np.isfinite(s) or s <= 0 else 1.0 / s)
    warm[0] = max(t_w, 0.0)
    for k in range(K):
        for j in range(n):
            warm[zcol(k, j)] = C_w[k, j]
        for l in range(N):
            warm[lcol(k, l)] = lam_w[k, l]

    sol = solve_milp(
        MilpProblem(lp=lp, binary=binaries),
        time_limit=time_limit,
        backend="highs",
        warm_start=warm,
    )
    if sol.status == "infeasible":  # pragma: no cover - model is always feasible
        raise RuntimeError("assignment MILP reported infeasible")
    if sol.x is None:
        raise RuntimeError("assignment MILP hit the time limit with no incumbent")
    lam = _normalize_rows(sol.x[1 + K * n + N * K :].reshape(K, N))
    C = lam @ X
    mu_soft = sol.x[1 + K * n : 1 + K * n + N * K].reshape(N, K)
    mu, t = _round_assignment(X, C, mu_soft)
    exact = sol.status == "optimal"
    return _finish(C, lam, mu, t, method="ip-mu", exact=exact, gap=sol.gap if not exact else 0.0)


def _subset_result(X, sel, method: str, stage: int = 1, exact=True, gap=0.0) -> ReductionResult:
    """Package a subset choice: exact continuous coverage of U by U[sel]."""
    sel = sorted(int(s) for s in sel)
    N = X.shape[0]
    lam = np.zeros((len(sel), N))
    for k, l in enumerate(sel):
        lam[k, l] = 1.0
    mu, ti = mu_step(X, X[sel])
    t = float(min(ti.min(), 1.0))
    return _finish(X[sel], lam, mu, t, method=method, stage=stage, exact=exact, gap=gap)


def _subset_t(X, sel) -> float:
    _, ti = mu_step(X, X[list(sel)])
    return float(min(ti.min(), 1.0))


def reduce_subset(U, K: int, *, time_limit: float = 60.0) -> ReductionResult:
    """Reduction to K of the original scenarios ("ip-lambda").

    Exact MILP (binary selection, continuous coverage) for N <= 25; above
    that a greedy + single-swap heuristic stands in and the result is
    flagged inexact.  The reported coverage and t are always recomputed
    from the chosen subset, so the certificate is exact either way.
    """
    X = check_scenario_matrix(U, "U")
    N, n = X.shape
    check_count(K, 1, N, "K")
    if K == N:
        return _subset_result(X, range(N), "ip-lambda")

    if N > 25:
        sel = _greedy_swap_subset(X, K)
        return _subset_result(X, sel, "ip-lambda", exact=False, gap=float("inf"))

    # Variables [t, mu(N*N), sel(N)]: mu_il may carry weight only if l is
    # selected; exactly K scenarios are selected.
    width = 1 + N * N + N

    def mcol(i, l):
        return 1 + i * N + l

    def scol(l):
        return 1 + N * N + l

    data, rows_i, cols_i = [], [], []
    senses: list[str] = []
    rhs: list[float] = []
    r = 0
    for i in range(N):
        for j in range(n):
            if X[i, j] <= 0:
                continue
            rows_i.append(r)
            cols_i.append(0)
            data.append(X[i, j])
            for l in range(N):
                if X[l, j] > 0:
                    rows_i.append(r)
                    cols_i.append(mcol(i, l))
                    data.append(-X[l, j])
            senses.append("<=")
            rhs.append(0.0)
            r += 1
    for i in range(N):
        for l in range(N):
            rows_i += [r, r]
            cols_i += [mcol(i, l), scol(l)]
            data += [1.0, -1.0]
            senses.append("<=")
            rhs.append(0.0)
            r += 1
    for i in range(N):
        for l in range(N):
            rows_i.append(r)
            cols_i.append(mcol(i, l))
            data.append(1.0)
        senses.append("=")
        rhs.append(1.0)
        r += 1
    rows_i += [r] * N
    cols_i += [scol(l) for l in range(N)]
    data += [1.0] * N
    senses.append("=")
    rhs.append(float(K))
    r += 1

    A = sparse.csr_matrix((data, (rows_i, cols_i)), shape=(r, width))
    c = np.zeros(width)
    c[0] = 1.0
    ub = np.full(width, np.inf)
    ub[0] = 1.0
    ub[1:] = 1.0
    lp = LpProblem(c=c, sense="max", A=A, senses=tuple(senses), b=np.asarray(rhs), ub=ub)
    sol = solve_milp(
        MilpProblem(lp=lp, binary=tuple(scol(l) for l in range(N))),
        time_limit=time_limit,
        backend="highs",
    )
    if sol.x is None:
        raise RuntimeError("subset MILP hit the time limit with no incumbent")
    sel = [l for l in range(N) if sol.x[scol(l)] > 0.5]
    while len(sel) < K:  # degenerate duplicates can make extra picks free
        sel.append(next(l for l in range(N) if l not in sel))
    exact = sol.status == "optimal"
    return _subset_result(X, sel[:K], "ip-lambda", exact=exact, gap=0.0 if exact else sol.gap)


def _greedy_swap_subset(X, K: int):
    """Greedy max-coverage subset followed by one pass of 1-swaps."""
    N = X.shape[0]
    sel: list[int] = []
    for _ in range(K):
        best_l, best_t = None, -1.0
        for l in range(N):
            if l in sel:
                continue
            t = _subset_t(X, sel + [l])
            if t > best_t + 1e-12:
                best_l, best_t = l, t
        sel.append(best_l)
    cur = _subset_t(X, sel)
    for pos in range(K):
        for l in range(N):
            if l in sel:
                continue
            cand = sel[:pos] + [l] + sel[pos + 1 :]
            t = _subset_t(X, cand)
            if t > cur + 1e-9:
                sel, cur = cand, t
    return sorted(sel)


def brute_subset_oracle(U, K: int) -> float:
    """Best achievable t over every K-subset of scenarios, by enumeration.

    Exponential reference for the subset reduction; refuses more than 1e5
    candidate subsets.
    """
    X = check_scenario_matrix(U, "U")
    N = X.shape[0]
    check_count(K, 1, N, "K")
    if math.comb(N, K) > 100_000:
        raise ValueError("too many subsets for the brute-force oracle")
    best = 0.0
    for sel in itertools.combinations(range(N), K):
        best = max(best, _subset_t(X, sel))
    return float(best)


def _kmeans_labels(X, K, reps, rng):
    """Plain Lloyd iterations, vectorized across all repetitions at once."""
    N, n = X.shape
    starts = np.empty((reps, K), dtype=np.int64)
    for r in range(reps):
        starts[r] = rng.choice(N, size=K, replace=False)
    centers = X[starts]  # (R, K, n)
    labels = np.zeros((reps, N), dtype=np.int64)
    active = np.ones(reps, dtype=bool)
    sq = (X**2).sum(axis=1)
    for _ in range(300):
        if not active.any():
            break
        C = centers[active]
        d2 = (
            sq[None, :, None]
            + (C**2).sum(axis=2)[:, None, :]
            - 2.0 * np.einsum("Nn,rkn->rNk", X, C)
        )
        new_labels = d2.argmin(axis=2)
        changed = (new_labels != labels[active]).any(axis=1)
        labels[active] = new_labels
        onehot = np.eye(K)[new_labels]  # (ra, N, K)
        counts = onehot.sum(axis=1)  # (ra, K)
        sums = np.einsum("rNk,Nn->rkn", onehot, X)
        dead_any = counts <= 0
        with np.errstate(invalid="ignore"):
            newC = sums / np.maximum(counts, 1.0)[:, :, None]
        act_idx = np.where(active)[0]
        for rr, r in enumerate(act_idx):
            if dead_any[rr].any():
                for k in np.where(dead_any[rr])[0]:
                    alive = newC[rr][counts[rr] > 0]
                    dist = (
                        ((X[:, None, :] - alive[None, :, :]) ** 2).sum(-1).min(1)
                        if alive.size
                        else sq
                    )
                    pick = int(dist.argmax())
                    newC[rr, k] = X[pick]
                    counts[rr, k] = 1.0
                changed[rr] = True
        centers[active] = newC
        active[act_idx[~changed]] = False
    d2 = (
        sq[None, :, None]
        + (centers**2).sum(axis=2)[:, None, :]
        - 2.0 * np.einsum("Nn,rkn->rNk", X, centers)
    )
    labels = d2.argmin(axis=2)
    sse = d2.min(axis=2).sum(axis=1)
    return labels, sse


def reduce_kmeans(U, K: int, *, reps: int = 1000, seed=None) -> ReductionResult:
    """K-means baseline: cluster the scenarios, keep the cluster means.

    Best of ``reps`` random restarts by within-cluster squared error (ties
    to the lowest repetition).  The guarantee is certified after the fact:
    the means lie in the convex hull of U, so only the covering factor of
    the means over U has to be computed.
    """
    X = check_scenario_matrix(U, "U")
    N, n = X.shape
    check_count(K, 1, N, "K")
    check_count(reps, 1, 10**6, "reps")
    rng = as_rng(seed)
    labels, sse = _kmeans_labels(X, K, reps, rng)
    best = int(sse.argmin())
    lab = labels[best]
    lam = np.zeros((K, N))
    mu = np.zeros((N, K))
    for i, k in enumerate(lab):
        mu[i, k] = 1.0
    for k in range(K):
        members = np.where(lab == k)[0]
        if members.size:
            lam[k, members] = 1.0 / members.size
    # duplicate scenarios can starve a cluster for good: anchor it at the
    # scenario farthest from the occupied cluster means (lowest index ties)
    empty = [k for k in range(K) if lam[k].sum() == 0]
    occupied = [lam[k] @ X for k in range(K) if lam[k].sum() > 0]
    for k in empty:
        if occupied:
            dist = ((X[:, None, :] - np.asarray(occupied)[None, :, :]) ** 2).sum(-1).min(1)
        else:
            dist = (X**2).sum(axis=1)
        pick = int(dist.argmax())
        lam[k, pick] = 1.0
        occupied.append(X[pick])
    centers = lam @ X
    alpha, _ = alpha_one_stage(X, centers)
    t = 0.0 if not np.isfinite(alpha) or alpha <= 0 else min(1.0, 1.0 / alpha)
    if not np.any(X > 0):
        t = 1.0
    return _finish(centers, lam, mu, t, method="kmeans", exact=False, gap=float("inf"))


def midpoint(U) -> np.ndarray:
    """The mean scenario of the set."""
    X = check_scenario_matrix(U, "U")
    return X.mean(axis=0)


def reduce_midpoint(U) -> ReductionResult:
    """Single-scenario reduction at the mean; guarantee certified post hoc.

    Never worse than a factor of N: each coordinate of the mean is at
    least 1/N of the column maximum.
    """
    X = check_scenario_matrix(U, "U")
    N = X.shape[0]
    mid = X.mean(axis=0, keepdims=True)
    lam = np.full((1, N), 1.0 / N)
    mu = np.ones((N, 1))
    alpha, _ = alpha_one_stage(X, mid)
    t = 0.0 if not np.isfinite(alpha) or alpha <= 0 else min(1.0, 1.0 / alpha)
    if not np.any(X > 0):
        t = 1.0
    return _finish(mid, lam, mu, t, method="midpoint")
