"""Scenario reduction when recourse reacts after the scenario is revealed.

With a second stage, covering a scenario by a convex combination no
longer helps — the adversary is answered by a single recourse, so each
original scenario must be dominated (up to the factor t) by one selected
scenario.  Everything therefore reduces to the pairwise domination
levels ``d[i, l]`` (largest s with ``s * U[i] <= U[l]``): the best
K-subset maximizes ``min_i max_{l in S} d[i, l]``.

``reduce_subset_two_stage`` finds the exact optimum by a threshold
search: the optimal value is one of the O(N^2) distinct entries of d,
and for a fixed threshold the question "is there a subset of size <= K
dominating every scenario at this level" is a set-cover decision, solved
exactly by a small branch-and-bound (or, for cross-validation, as a
MILP).  ``reduce_greedy_two_stage`` is the natural maximin greedy.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from ._validation import check_count, check_scenario_matrix
from .guarantee import domination_ratios
from .linprog import LpProblem
from .milp import MilpProblem, solve_milp
from .model import ReductionResult

__all__ = [
    "reduce_subset_two_stage",
    "reduce_greedy_two_stage",
    "brute_two_stage",
]


def _dominated_columns_pruned(masks):
    """Keep only set-wise maximal columns (ties keep the lowest index)."""
    order = sorted(range(len(masks)), key=lambda l: (-bin(masks[l]).count("1"), l))
    keep: list[int] = []
    for l in order:
        m = masks[l]
        if m == 0:
            continue
        if any(m | masks[k] == masks[k] for k in keep):
            continue
        keep.append(l)
    return sorted(keep)


def _cover_search(masks, K: int, full: int):
    """Columns (<= K of them) whose union is ``full``, or None.

    Exact depth-first search branching on the uncovered row with the
    fewest remaining covering columns; deterministic column order.
    """
    if full == 0:
        return []
    cols = _dominated_columns_pruned(masks)
    union = 0
    for l in cols:
        union |= masks[l]
    if union & full != full:
        return None
    by_row = {}
    for bit in range(full.bit_length()):
        if full >> bit & 1:
            by_row[bit] = [l for l in cols if masks[l] >> bit & 1]
    failed: set = set()

    def dfs(covered: int, slots: int):
        if covered & full == full:
            return []
        if slots == 0 or (covered, slots) in failed:
            return None
        rest = full & ~covered
        # most-constrained uncovered row
        row, cands = None, None
        bit = 0
        r = rest
        while r:
            if r & 1:
                cur = [l for l in by_row[bit] if masks[l] & rest]
                if cands is None or len(cur) < len(cands):
                    row, cands = bit, cur
                    if len(cur) <= 1:
                        break
            r >>= 1
            bit += 1
        if not cands:
            failed.add((covered, slots))
            return None
        cands = sorted(cands, key=lambda l: (-bin(masks[l] & rest).count("1"), l))
        for l in cands:
            sub = dfs(covered | masks[l], slots - 1)
            if sub is not None:
                return [l] + sub
        failed.add((covered, slots))
        return None

    return dfs(0, K)


def _cover_milp(masks, K: int, full: int, time_limit):
    """Same decision as :func:`_cover_search`, answered by a MILP."""
    if full == 0:
        return []
    nbits = full.bit_length()
    N = len(masks)
    A = np.zeros((nbits, N))
    for l, m in enumerate(masks):
        for bit in range(nbits):
            if m >> bit & 1:
                A[bit, l] = 1.0
    rows = [bit for bit in range(nbits) if full >> bit & 1]
    lp = LpProblem(
        c=np.ones(N),
        sense="min",
        A=A[rows],
        senses=(">=",) * len(rows),
        b=np.ones(len(rows)),
        ub=np.ones(N),
    )
    sol = solve_milp(MilpProblem(lp=lp, binary=tuple(range(N))), time_limit, backend="highs")
    if sol.status == "infeasible" or sol.x is None:
        return None
    if sol.objective > K + 1e-6:
        return None
    return sorted(l for l in range(N) if sol.x[l] > 0.5)


def _threshold_masks(d: np.ndarray, universe, tau: float):
    masks = []
    for l in range(d.shape[1]):
        m = 0
        for pos, i in enumerate(universe):
            if d[i, l] >= tau - 1e-12:
                m |= 1 << pos
        masks.append(m)
    return masks


def _pad_selection(sel, K: int, N: int):
    sel = sorted(set(int(s) for s in sel))
    for l in range(N):
        if len(sel) >= K:
            break
        if l not in sel:
            sel.append(l)
    return sorted(sel)


def _selection_result(X, d, sel, method: str, exact=True, gap=0.0) -> ReductionResult:
    sel = sorted(int(s) for s in sel)
    N = X.shape[0]
    lam = np.zeros((len(sel), N))
    for k, l in enumerate(sel):
        lam[k, l] = 1.0
    sub = d[:, sel]
    best = sub.max(axis=1)
    t = float(best.min())
    t = 1.0 if np.isinf(t) else min(max(t, 0.0), 1.0)
    mu = np.zeros((N, len(sel)))
    mu[np.arange(N), sub.argmax(axis=1)] = 1.0
    guarantee = float("inf") if t <= 0 else 1.0 / t
    return ReductionResult(
        reduced=X[sel],
        lambda_=lam,
        mu=mu,
        t=t,
        guarantee=guarantee,
        method=method,
        stage=2,
        exact=exact,
        gap=gap,
    )


def reduce_subset_two_stage(
    U, K: int, *, time_limit: float | None = None, decision: str = "search"
) -> ReductionResult:
    """Exact best K-subset for the two-stage worst case ("ip2").

    Threshold search over the distinct domination levels with an exact
    set-cover decision at each probe (``decision="milp"`` swaps the
    search-tree decision for a MILP; both must agree).  Scenarios nobody
    dominates at any positive level force t = 0 and an infinite
    guarantee.
    """
    X = check_scenario_matrix(U, "U")
    N = X.shape[0]
    check_count(K, 1, N, "K")
    if decision not in ("search", "milp"):
        raise ValueError(f"decision must be 'search' or 'milp', got {decision!r}")
    d = domination_ratios(X)
    universe = [i for i in range(N) if not np.isinf(d[i]).all()]
    if not universe:
        return _selection_result(X, d, list(range(K)), "ip2")
    full = (1 << len(universe)) - 1

    finite = d[np.isfinite(d)]
    cands = np.unique(finite[(finite > 0) & (finite <= 1.0)])
    decide = _cover_milp if decision == "milp" else lambda m, k, f, _tl=None: _cover_search(m, k, f)

    best_sel = None
    lo, hi = 0, len(cands) - 1
    while lo <= hi:
        mid = (lo + hi) // 2
        witness = decide(_threshold_masks(d, universe, float(cands[mid])), K, full, time_limit)
        if witness is not None:
            best_sel = witness
            lo = mid + 1
        else:
            hi = mid - 1
    if best_sel is None:
        sel = _pad_selection([], K, N)
    else:
        sel = _pad_selection(best_sel, K, N)
    return _selection_result(X, d, sel, "ip2")


def reduce_greedy_two_stage(U, K: int) -> ReductionResult:
    """Maximin greedy selection ("greedy2"): repeatedly add the scenario
    that lifts the worst coverage level most, ties to the lowest index.

    Never better than the exact subset method; often equal.
    """
    X = check_scenario_matrix(U, "U")
    N = X.shape[0]
    check_count(K, 1, N, "K")
    d = domination_ratios(X)
    cur = np.full(N, -np.inf)
    sel: list[int] = []
    for _ in range(K):
        best_l, best_val = None, -np.inf
        for l in range(N):
            if l in sel:
                continue
            val = float(np.minimum(np.maximum(cur, d[:, l]), np.inf).min())
            if val > best_val:
                best_l, best_val = l, val
        sel.append(best_l)
        cur = np.maximum(cur, d[:, best_l])
    return _selection_result(X, d, sel, "greedy2", exact=False, gap=float("inf"))


def brute_two_stage(U, K: int) -> float:
    """Best two-stage t over every K-subset, by full enumeration.

    Reference oracle; refuses more than 1e6 candidate subsets.
    """
    X = check_scenario_matrix(U, "U")
    N = X.shape[0]
    check_count(K, 1, N, "K")
    if math.comb(N, K) > 1_000_000:
        raise ValueError("too many subsets for the brute-force oracle")
    d = domination_ratios(X)
    best = 0.0
    for sel in itertools.combinations(range(N), K):
        t = float(d[:, sel].max(axis=1).min())
        if np.isinf(t):
            t = 1.0
        best = max(best, min(t, 1.0))
    return best
