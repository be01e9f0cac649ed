"""Scenario generators, benchmark drivers and the hardness gadget.

The four scenario families (``u1`` .. ``u4``) stress different geometry:
plain iid integers, integers with rare doubled scenarios, a nominal
vector with sparse deviations, and near-constant-norm directions.  Two
benchmark drivers are included: ``experiment1`` measures how well the
worst-case objective of a reduced set tracks the full set across random
decisions (pooled Pearson correlation), ``experiment2`` runs the full
reduce-solve-evaluate pipeline and reports value ratios against the
exact optimum.  ``hardness_instance`` embeds graph domination into
subset reduction: a dominating set of size K exists iff the best
K-subset reaches t = 3/4.
"""

from __future__ import annotations

import csv
import itertools
import json
import time
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from ._validation import as_rng, check_count
from .model import RobustInstance, UncertaintySet
from .onestage import reduce_assignment, reduce_continuous, reduce_kmeans, reduce_midpoint
from .robust import (
    evaluate_one_stage,
    evaluate_two_stage,
    solve_one_stage,
    solve_two_stage,
)
from .twostage import reduce_greedy_two_stage, reduce_subset_two_stage

__all__ = [
    "gen_uniform",
    "gen_u2",
    "gen_u3",
    "gen_u4",
    "gen_truncnormal",
    "gen_graph",
    "gen_connected_graph",
    "hardness_instance",
    "dominating_set_exists",
    "pearson",
    "FAMILIES",
    "experiment1",
    "experiment2",
]


def gen_uniform(n: int, N: int, lo: int = 0, hi: int = 100, seed=None) -> UncertaintySet:
    """N scenarios of n iid uniform integers in [lo, hi]."""
    check_count(n, 1, None, "n")
    check_count(N, 1, None, "N")
    if hi < lo or lo < 0:
        raise ValueError("need 0 <= lo <= hi")
    rng = as_rng(seed)
    return UncertaintySet(rng.integers(lo, hi + 1, size=(N, n)).astype(np.float64))


def gen_u2(
    n: int, N: int, lo: int = 0, hi: int = 100, double_prob: float = 0.05, seed=None
) -> UncertaintySet:
    """Uniform integers, then each whole scenario doubles with small probability.

    With ``double_prob=0`` the scenarios coincide with :func:`gen_uniform`
    under the same seed (the doubling draw happens after the value draw).
    """
    if not 0 <= double_prob <= 1:
        raise ValueError("double_prob must be in [0, 1]")
    rng = as_rng(seed)
    base = gen_uniform(n, N, lo, hi, seed=rng).scenarios.copy()
    doubled = rng.random(N) < double_prob
    base[doubled] *= 2.0
    return UncertaintySet(base)


def gen_u3(
    n: int,
    N: int,
    lo: int = 0,
    hi: int = 100,
    deviating: int = 3,
    dev_lo: int = 1,
    dev_hi: int = 100,
    seed=None,
) -> UncertaintySet:
    """One nominal cost vector; each scenario bumps exactly ``deviating`` items.

    The bumped items are distinct per scenario; bump sizes are uniform
    integers in [dev_lo, dev_hi].  With a zero deviation range all
    scenarios equal the nominal vector.
    """
    check_count(n, 1, None, "n")
    check_count(N, 1, None, "N")
    check_count(deviating, 1, None, "deviating")
    if n < deviating:
        raise ValueError(f"need n >= {deviating} items to deviate")
    if dev_hi < dev_lo or dev_lo < 0:
        raise ValueError("need 0 <= dev_lo <= dev_hi")
    rng = as_rng(seed)
    nominal = rng.integers(lo, hi + 1, size=n).astype(np.float64)
    rows = np.tile(nominal, (N, 1))
    for i in range(N):
        items = rng.choice(n, size=deviating, replace=False)
        rows[i, items] += rng.integers(dev_lo, dev_hi + 1, size=deviating)
    return UncertaintySet(rows)


def gen_u4(
    n: int, N: int, norm_lo: float = 9000.0, norm_hi: float = 11000.0, seed=None
) -> UncertaintySet:
    """Random directions rescaled to a (near-)common Euclidean norm."""
    check_count(n, 1, None, "n")
    check_count(N, 1, None, "N")
    if not 0 < norm_lo <= norm_hi:
        raise ValueError("need 0 < norm_lo <= norm_hi")
    rng = as_rng(seed)
    raw = rng.random((N, n))
    norms = np.linalg.norm(raw, axis=1)
    if np.any(norms <= 0):  # pragma: no cover - probability-zero draw
        raise RuntimeError("degenerate all-zero direction drawn")
    scales = rng.uniform(norm_lo, norm_hi, size=N)
    return UncertaintySet(raw / norms[:, None] * scales[:, None])


def gen_truncnormal(
    n: int,
    N: int,
    mean: float = 50.0,
    sd: float = 20.0,
    lo: float = 1.0,
    hi: float = 100.0,
    seed=None,
) -> UncertaintySet:
    """Normal costs rejection-sampled into [lo, hi]."""
    check_count(n, 1, None, "n")
    check_count(N, 1, None, "N")
    if sd <= 0:
        raise ValueError("sd must be positive")
    if not 0 <= lo < hi:
        raise ValueError("need 0 <= lo < hi")
    rng = as_rng(seed)
    out = rng.normal(mean, sd, size=(N, n))
    bad = (out < lo) | (out > hi)
    while bad.any():
        out[bad] = rng.normal(mean, sd, size=int(bad.sum()))
        bad = (out < lo) | (out > hi)
    return UncertaintySet(out)


def gen_graph(n: int, seed=None):
    """Random graph with edge probability min(1, 10/n); complete for n <= 10."""
    check_count(n, 2, None, "n")
    rng = as_rng(seed)
    p = min(1.0, 10.0 / n)
    pairs = list(itertools.combinations(range(n), 2))
    draws = rng.random(len(pairs))
    return tuple(pair for pair, r in zip(pairs, draws) if r < p)


def gen_connected_graph(n: int, p_extra: float = 0.3, seed=None):
    """Connected random graph: a random attachment tree plus extra edges."""
    check_count(n, 2, None, "n")
    if not 0 <= p_extra <= 1:
        raise ValueError("p_extra must be in [0, 1]")
    rng = as_rng(seed)
    edges = set()
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.add((u, v))
    for u, v in itertools.combinations(range(n), 2):
        if (u, v) not in edges and rng.random() < p_extra:
            edges.add((u, v))
    return tuple(sorted(edges))


def hardness_instance(n: int, edges) -> UncertaintySet:
    """Uncertainty set whose best K-subset value encodes graph domination.

    2n scenarios over n items: scenario i < n is 16 on item i and 0
    elsewhere; scenario n + v is 12 on the closed neighborhood of vertex
    v and 9 elsewhere.  A dominating set of size K exists iff some
    K-subset reaches t >= 3/4 (select the dominating vertices' rows).
    """
    check_count(n, 1, None, "n")
    closed = [{v} for v in range(n)]
    for u, v in edges:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
        closed[u].add(v)
        closed[v].add(u)
    rows = np.zeros((2 * n, n))
    for i in range(n):
        rows[i, i] = 16.0
    for v in range(n):
        rows[n + v, :] = 9.0
        rows[n + v, sorted(closed[v])] = 12.0
    return UncertaintySet(rows)


def dominating_set_exists(n: int, edges, K: int) -> bool:
    """Brute-force check for a dominating set of size at most K."""
    check_count(n, 1, None, "n")
    check_count(K, 1, n, "K")
    closed = [1 << v for v in range(n)]
    for u, v in edges:
        closed[int(u)] |= 1 << int(v)
        closed[int(v)] |= 1 << int(u)
    full = (1 << n) - 1
    for combo in itertools.combinations(range(n), K):
        m = 0
        for v in combo:
            m |= closed[v]
        if m == full:
            return True
    return False


def pearson(a, b) -> float:
    """Pearson correlation; rejects constant inputs."""
    x = np.asarray(a, dtype=np.float64).ravel()
    y = np.asarray(b, dtype=np.float64).ravel()
    if x.shape != y.shape or x.size < 2:
        raise ValueError("pearson needs two equally sized samples of length >= 2")
    if np.std(x) == 0 or np.std(y) == 0:
        raise ValueError("pearson is undefined for constant input")
    return float(np.corrcoef(x, y)[0, 1])


FAMILIES = {"u1": gen_uniform, "u2": gen_u2, "u3": gen_u3, "u4": gen_u4}


def _exp1_one(task):
    (family, set_id, seed, n, N, K, points, cont_reps, cont_iters, km_reps) = task
    rng = np.random.default_rng(seed)
    U = FAMILIES[family](n, N, seed=rng)
    cont = reduce_continuous(U, K, reps=cont_reps, max_iters=cont_iters, seed=rng)
    km = reduce_kmeans(U, K, reps=km_reps, seed=rng)
    xs = rng.random((points, n))
    full_v = (U.scenarios @ xs.T).max(axis=0)
    cont_v = (cont.reduced @ xs.T).max(axis=0)
    km_v = (km.reduced @ xs.T).max(axis=0)
    return [
        (family, set_id, p, full_v[p], cont_v[p], km_v[p]) for p in range(points)
    ]


def experiment1(
    out_dir,
    base_seed: int,
    *,
    families=("u1", "u2", "u3", "u4"),
    sets_per_family: int = 50,
    n: int = 10,
    N: int = 100,
    K: int = 5,
    points: int = 100,
    cont_reps: int = 10,
    cont_iters: int = 20,
    km_reps: int = 1000,
    jobs: int = 1,
) -> dict:
    """Correlation study: reduced worst case vs full worst case.

    For each set, reduce once per method, then compare ``max_i c^i . x``
    between the full and the reduced set over random fractional decisions
    ``x in [0, 1]^n``.  Per family and method all points are pooled into
    a single Pearson correlation.  Writes ``exp1_raw.csv``,
    ``exp1_summary.csv`` and ``exp1_metadata.json``; returns the summary.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = []
    for fi, family in enumerate(families):
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}")
        for s in range(sets_per_family):
            seed = base_seed + fi * sets_per_family + s
            tasks.append((family, s, seed, n, N, K, points, cont_reps, cont_iters, km_reps))
    if jobs > 1:
        with Pool(processes=jobs) as pool:
            chunks = pool.map(_exp1_one, tasks)
    else:
        chunks = [_exp1_one(t) for t in tasks]

    raw_path = out / "exp1_raw.csv"
    with open(raw_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["family", "set_id", "point_id", "full_value", "cont_value", "km_value"])
        for chunk in chunks:
            for family, set_id, p, fv, cv, kv in chunk:
                w.writerow([family, set_id, p, f"{fv:.10g}", f"{cv:.10g}", f"{kv:.10g}"])

    pooled: dict = {f: {"full": [], "cont": [], "kmeans": []} for f in families}
    for chunk in chunks:
        for family, _set_id, _p, fv, cv, kv in chunk:
            pooled[family]["full"].append(fv)
            pooled[family]["cont"].append(cv)
            pooled[family]["kmeans"].append(kv)
    summary: dict = {}
    sum_path = out / "exp1_summary.csv"
    with open(sum_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["family", "method", "rho"])
        for family in families:
            for method in ("cont", "kmeans"):
                rho = pearson(pooled[family]["full"], pooled[family][method])
                summary[(family, method)] = rho
                w.writerow([family, method, f"{rho:.10g}"])

    meta = {
        "experiment": "exp1",
        "base_seed": int(base_seed),
        "seed_rule": (
            "instance_seed = base_seed + family_index * sets_per_family + set_index; "
            "one PCG64 stream per instance, consumed in order: scenario generation, "
            "cont reduction, k-means reduction, evaluation points"
        ),
        "families": list(families),
        "sets_per_family": sets_per_family,
        "n": n,
        "N": N,
        "K": K,
        "points": points,
        "cont_reps": cont_reps,
        "cont_iters": cont_iters,
        "km_reps": km_reps,
        "jobs": jobs,
    }
    (out / "exp1_metadata.json").write_text(json.dumps(meta, indent=2) + "\n")
    return summary


_EXP2_STAGE1_METHODS = ("cont", "ip-mu", "kmeans")
_EXP2_STAGE2_METHODS = ("ip2", "greedy2")


def _exp2_reduce(method, U, K, rng, time_limit, cont_iters):
    if method == "cont":
        return reduce_continuous(U, K, reps=10, max_iters=cont_iters, seed=rng)
    if method == "ip-mu":
        return reduce_assignment(U, K, time_limit=time_limit)
    if method == "kmeans":
        return reduce_kmeans(U, K, reps=1000, seed=rng)
    if method == "midpoint":
        return reduce_midpoint(U)
    if method == "ip2":
        return reduce_subset_two_stage(U, K, time_limit=time_limit)
    if method == "greedy2":
        return reduce_greedy_two_stage(U, K)
    raise ValueError(f"unknown method {method!r}")


def _exp2_one(task):
    (
        instance_id,
        seed,
        problem,
        stages,
        n,
        N,
        k_values,
        methods,
        time_limit,
        cont_iters,
        lo,
        hi,
    ) = task
    rng = np.random.default_rng(seed)
    U = gen_uniform(n, N, lo, hi, seed=rng)
    if problem == "selection":
        inst_kwargs = {"kind": "selection", "n": n, "p": n // 2}
    else:
        inst_kwargs = {"kind": "vertex-cover", "n": n, "edges": gen_graph(n, seed=rng)}
    if stages == 2:
        inst_kwargs["first_stage_costs"] = rng.integers(lo, hi + 1, size=n).astype(np.float64)
    inst = RobustInstance(stages=stages, **inst_kwargs)

    t0 = time.perf_counter()
    if stages == 1:
        full = solve_one_stage(inst, U, time_limit=time_limit)
    else:
        full = solve_two_stage(inst, U, time_limit=time_limit)
    full_seconds = time.perf_counter() - t0
    opt = full.value

    rows = []
    for method in methods:
        for K in k_values:
            t1 = time.perf_counter()
            red = _exp2_reduce(method, U, K, rng, time_limit, cont_iters)
            reduce_seconds = time.perf_counter() - t1
            t2 = time.perf_counter()
            if stages == 1:
                sol = solve_one_stage(inst, red.reduced_set(), time_limit=time_limit)
                value = evaluate_one_stage(inst, sol.x, U)
            else:
                sol = solve_two_stage(inst, red.reduced_set(), time_limit=time_limit)
                value = evaluate_two_stage(inst, sol.x, U)
            solve_seconds = time.perf_counter() - t2
            if opt > 1e-12:
                ratio = value / opt
            else:
                ratio = 1.0 if value <= 1e-12 else float("inf")
            rows.append(
                {
                    "problem": problem,
                    "stages": stages,
                    "n": n,
                    "N": N,
                    "instance_id": instance_id,
                    "method": method,
                    "K": K,
                    "ratio": ratio,
                    "reduce_seconds": reduce_seconds,
                    "solve_seconds": solve_seconds,
                    # the ratio is exact when neither solve was a
                    # time-limited incumbent (heuristic reductions still
                    # yield exact ratios for the sets they produced)
                    "exact": int(full.exact and sol.exact),
                    "guarantee": red.guarantee,
                    "full_seconds": full_seconds,
                }
            )
    return rows


def experiment2(
    out_dir,
    base_seed: int,
    *,
    problem: str = "selection",
    stages: int = 1,
    n: int = 20,
    N: int = 10,
    instances: int = 25,
    k_values=None,
    methods=None,
    time_limit: float = 60.0,
    cont_iters: int = 3,
    lo: int = 0,
    hi: int = 100,
    jobs: int = 1,
) -> list:
    """Pipeline study: reduce, solve the reduced problem, evaluate on U.

    ``ratio`` is the worst-case value of the pipeline decision divided by
    the exact robust optimum (always >= 1 up to solver tolerance, exactly
    1 at K = N, and at most the reduction's guarantee).  Writes
    ``exp2_results.csv`` and ``exp2_metadata.json``; returns the rows.
    """
    if problem not in ("selection", "vertex-cover"):
        raise ValueError(f"unknown problem {problem!r}")
    if stages not in (1, 2):
        raise ValueError("stages must be 1 or 2")
    if k_values is None:
        k_values = [k for k in range(1, 11) if k <= N]
    k_values = [check_count(k, 1, N, "K") for k in k_values]
    if methods is None:
        methods = _EXP2_STAGE1_METHODS if stages == 1 else _EXP2_STAGE2_METHODS
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [
        (
            k,
            base_seed + k,
            problem,
            stages,
            n,
            N,
            tuple(k_values),
            tuple(methods),
            time_limit,
            cont_iters,
            lo,
            hi,
        )
        for k in range(instances)
    ]
    if jobs > 1:
        with Pool(processes=jobs) as pool:
            chunks = pool.map(_exp2_one, tasks)
    else:
        chunks = [_exp2_one(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]

    path = out / "exp2_results.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            [
                "problem",
                "stages",
                "n",
                "N",
                "instance_id",
                "method",
                "K",
                "ratio",
                "reduce_seconds",
                "solve_seconds",
                "exact",
            ]
        )
        for r in rows:
            w.writerow(
                [
                    r["problem"],
                    r["stages"],
                    r["n"],
                    r["N"],
                    r["instance_id"],
                    r["method"],
                    r["K"],
                    f"{r['ratio']:.10g}",
                    f"{r['reduce_seconds']:.6f}",
                    f"{r['solve_seconds']:.6f}",
                    r["exact"],
                ]
            )
    meta = {
        "experiment": "exp2",
        "base_seed": int(base_seed),
        "seed_rule": (
            "instance_seed = base_seed + instance_id; one PCG64 stream per instance, "
            "consumed in order: scenario generation (plus graph/first-stage costs where "
            "applicable), then each method's reduction, methods in listed order, K ascending"
        ),
        "problem": problem,
        "stages": stages,
        "n": n,
        "N": N,
        "instances": instances,
        "k_values": list(k_values),
        "methods": list(methods),
        "time_limit": time_limit,
        "cont_iters": cont_iters,
        "cost_range": [lo, hi],
        "jobs": jobs,
    }
    (out / "exp2_metadata.json").write_text(json.dumps(meta, indent=2) + "\n")
    return rows
