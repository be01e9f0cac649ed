"""End-to-end acceptance gate.

Each test checks one shipping criterion at its stated tolerance and time
budget and prints a single machine-greppable PASS/FAIL line (written
straight to the terminal so it shows up even under pytest capture).
"""

import math
import sys
import time

import numpy as np
import pytest

from scenred.experiments import (
    dominating_set_exists,
    experiment1,
    experiment2,
    gen_connected_graph,
    gen_graph,
    gen_uniform,
    hardness_instance,
)
from scenred.guarantee import guarantee_single_one_stage, heatmap, verify_certificate
from scenred.linprog import LpProblem
from scenred.milp import MilpProblem, solve_milp, solve_milp_enumeration
from scenred.model import RobustInstance, UncertaintySet
from scenred.onestage import (
    brute_subset_oracle,
    reduce_assignment,
    reduce_continuous,
    reduce_kmeans,
    reduce_midpoint,
    reduce_subset,
)
from scenred.robust import (
    evaluate_one_stage,
    evaluate_two_stage,
    solve_one_stage,
    solve_two_stage,
)
from scenred.twostage import brute_two_stage, reduce_greedy_two_stage, reduce_subset_two_stage

SPEC2 = UncertaintySet([[4.0, 2.0], [2.0, 3.0]])


@pytest.fixture
def report(capfd):
    """One PASS/FAIL line per criterion, written past pytest's capture."""

    def _line(num, name, ok, elapsed, limit, detail=""):
        line = (
            f"[acceptance {num:02d}] {'PASS' if ok else 'FAIL'} {name} "
            f"({elapsed:.1f}s / limit {limit:.0f}s)"
        )
        if detail:
            line += f" — {detail}"
        with capfd.disabled():
            print(line, file=sys.stderr, flush=True)

    return _line


def test_criterion_01_one_stage_heatmap_optimum(report):
    limit = 30.0
    t0 = time.perf_counter()
    hm = heatmap(SPEC2, 1, 0.1, 6.0, 0.01)
    single = guarantee_single_one_stage(SPEC2, [4.0, 3.0])
    elapsed = time.perf_counter() - t0
    ok_min = abs(hm.min_value - 1.25) <= 1e-3
    ok_single = abs(single - 1.25) <= 1e-6
    ok = ok_min and ok_single and elapsed < limit
    report(1, "one-stage heatmap optimum 1.25", ok, elapsed, limit,
            f"min={hm.min_value:.6f}, g(4,3)={single:.8f}")
    assert ok_min and ok_single
    assert elapsed < limit


def test_criterion_02_two_stage_heatmap_optimum(report):
    limit = 30.0
    t0 = time.perf_counter()
    hm = heatmap(SPEC2, 2, 0.1, 6.0, 0.01)
    elapsed = time.perf_counter() - t0
    ix = int(np.argmin(np.abs(hm.xs - 4.0)))
    iy = int(np.argmin(np.abs(hm.ys - 2.0)))
    at_node = hm.values[ix, iy]
    ok_min = abs(hm.min_value - 1.5) <= 1e-3
    ok_node = abs(at_node - hm.min_value) <= 1e-9
    ok = ok_min and ok_node and elapsed < limit
    report(2, "two-stage heatmap optimum 1.5 at (4,2)", ok, elapsed, limit,
            f"min={hm.min_value:.6f}, value@(4,2)={at_node:.6f}")
    assert ok_min and ok_node
    assert elapsed < limit


def test_criterion_03_ceil_bound(report):
    limit = 600.0
    t0 = time.perf_counter()
    violations = 0
    worst = 0.0
    for s in range(50):
        U = gen_uniform(10, 10, seed=3000 + s)
        for K in range(1, 6):
            bound = math.ceil(10 / K)
            g_cont = reduce_continuous(U, K, seed=52 + s).guarantee
            g_mu = reduce_assignment(U, K).guarantee
            worst = max(worst, g_cont - bound, g_mu - bound)
            if g_cont > bound + 1e-9 or g_mu > bound + 1e-9:
                violations += 1
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < limit
    report(3, "cont/ip-mu guarantees within ceil(N/K)", ok, elapsed, limit,
            f"violations={violations}/250, max overshoot={worst:.2e}")
    assert violations == 0
    assert elapsed < limit


def test_criterion_04_one_stage_oracle_equivalence(report):
    limit = 300.0
    t0 = time.perf_counter()
    rng = np.random.default_rng(4000)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 6))
        N = int(rng.integers(2, 9))
        K = int(rng.integers(1, min(3, N) + 1))
        U = gen_uniform(n, N, 0, 20, seed=rng)
        delta = abs(reduce_subset(U, K).t - brute_subset_oracle(U, K))
        worst = max(worst, delta)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < limit
    report(4, "ip-lambda equals subset enumeration", ok, elapsed, limit,
            f"max |dt|={worst:.2e} over 100 instances")
    assert worst <= 1e-6
    assert elapsed < limit


def test_criterion_05_two_stage_oracle_equivalence(report):
    limit = 300.0
    t0 = time.perf_counter()
    rng = np.random.default_rng(5000)
    mismatches = 0
    ordering_violations = 0
    for _ in range(100):
        n = int(rng.integers(2, 6))
        N = int(rng.integers(2, 9))
        K = int(rng.integers(1, N + 1))
        U = gen_uniform(n, N, 0, 15, seed=rng)
        t2 = reduce_subset_two_stage(U, K).t
        if t2 != brute_two_stage(U, K):
            mismatches += 1
        if t2 > reduce_subset(U, K).t + 1e-7:
            ordering_violations += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and ordering_violations == 0 and elapsed < limit
    report(5, "ip2 equals two-stage enumeration, t <= ip-lambda t", ok, elapsed, limit,
            f"mismatches={mismatches}, ordering violations={ordering_violations}")
    assert mismatches == 0
    assert ordering_violations == 0
    assert elapsed < limit


def test_criterion_06_hardness_gadget(report):
    limit = 600.0
    t0 = time.perf_counter()
    mismatches = 0
    for s in range(50):
        n = 3 + s % 5  # connected graphs on 3..7 nodes
        edges = gen_connected_graph(n, seed=6000 + s)
        U = hardness_instance(n, edges)
        for K in (1, 2, 3):
            has_dom = dominating_set_exists(n, edges, K)
            t = reduce_subset(U, K).t
            if (t >= 0.75 - 1e-7) != has_dom:
                mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < limit
    report(6, "dominating set iff gadget t >= 3/4", ok, elapsed, limit,
            f"mismatches={mismatches}/150")
    assert mismatches == 0
    assert elapsed < limit


def test_criterion_07_midpoint_two_stage_failure(report):
    limit = 1.0
    t0 = time.perf_counter()
    M = 1000.0
    inst = RobustInstance(
        kind="selection", stages=2, n=2, p=1, first_stage_costs=np.array([1.0, 1.0])
    )
    U = UncertaintySet([[M, 0.0], [0.0, M]])
    full = solve_two_stage(inst, U)
    mid = reduce_midpoint(U)
    sol = solve_two_stage(inst, mid.reduced_set())
    worst = evaluate_two_stage(inst, sol.x, U)
    elapsed = time.perf_counter() - t0
    ok_vals = full.value == 0.0 and worst == 1.0
    ok = ok_vals and elapsed < limit
    report(7, "midpoint pipeline pays 1 where full pays 0", ok, elapsed, limit,
            f"full={full.value}, pipeline={worst}")
    assert full.value == 0.0
    assert worst == 1.0
    assert elapsed < limit


def _stage1_triple(rng):
    n = int(rng.integers(3, 13))
    N = int(rng.integers(2, 9))
    K = int(rng.integers(1, N + 1))
    U = gen_uniform(n, N, 0, 20, seed=rng)
    if rng.random() < 0.5:
        inst = RobustInstance(kind="selection", stages=1, n=n, p=max(1, n // 2))
    else:
        inst = RobustInstance(kind="vertex-cover", stages=1, n=n, edges=gen_graph(n, seed=rng))
    method = rng.choice(["cont", "ip-mu", "ip-lambda", "kmeans", "midpoint"])
    if method == "cont":
        red = reduce_continuous(U, K, reps=3, max_iters=8, seed=rng)
    elif method == "ip-mu":
        red = reduce_assignment(U, K)
    elif method == "ip-lambda":
        red = reduce_subset(U, K)
    elif method == "kmeans":
        red = reduce_kmeans(U, K, reps=50, seed=rng)
    else:
        red = reduce_midpoint(U)
    return inst, U, red


def _stage2_triple(rng):
    N = int(rng.integers(2, 9))
    K = int(rng.integers(1, N + 1))
    if rng.random() < 0.5:
        n = int(rng.integers(3, 13))
        inst = RobustInstance(
            kind="selection", stages=2, n=n, p=max(1, n // 2),
            first_stage_costs=rng.integers(0, 21, size=n).astype(np.float64),
        )
    else:
        n = int(rng.integers(3, 9))
        inst = RobustInstance(
            kind="vertex-cover", stages=2, n=n,
            edges=gen_graph(n, seed=rng),
            first_stage_costs=rng.integers(0, 21, size=n).astype(np.float64),
        )
    U = gen_uniform(n, N, 0, 20, seed=rng)
    if rng.random() < 0.5:
        red = reduce_subset_two_stage(U, K)
    else:
        red = reduce_greedy_two_stage(U, K)
    return inst, U, red


def test_criterion_08_guarantee_soundness(report):
    limit = 900.0
    t0 = time.perf_counter()
    rng = np.random.default_rng(8000)
    violations = 0
    checked = 0
    for stage in (1, 2):
        for _ in range(100):
            inst, U, red = _stage1_triple(rng) if stage == 1 else _stage2_triple(rng)
            if stage == 1:
                opt = solve_one_stage(inst, U).value
                sol = solve_one_stage(inst, red.reduced_set())
                worst = evaluate_one_stage(inst, sol.x, U)
            else:
                opt = solve_two_stage(inst, U).value
                sol = solve_two_stage(inst, red.reduced_set())
                worst = evaluate_two_stage(inst, sol.x, U)
            if not np.isfinite(red.guarantee):
                continue  # an infinite factor bounds nothing
            checked += 1
            if worst > red.guarantee * opt + 1e-6:
                violations += 1
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < limit
    report(8, "pipeline value within guarantee x optimum", ok, elapsed, limit,
            f"violations={violations}/{checked} bounded triples")
    assert violations == 0
    assert elapsed < limit


def test_criterion_09_correlation_study(report, tmp_path):
    runs = 5
    t0 = time.perf_counter()
    rhos = {}  # (family, method) -> list over runs
    for run in range(runs):
        summary = experiment1(tmp_path / f"run{run}", base_seed=9000 + 1000 * run)
        for key, rho in summary.items():
            rhos.setdefault(key, []).append(rho)
    elapsed = time.perf_counter() - t0
    means = {fam: float(np.mean(rhos[(fam, "cont")])) for fam in ("u1", "u2", "u3", "u4")}
    ok_mean = all(m >= 0.90 for m in means.values())
    win_fracs = {}
    for fam in ("u2", "u4"):
        wins = sum(
            c > k for c, k in zip(rhos[(fam, "cont")], rhos[(fam, "kmeans")])
        )
        win_fracs[fam] = wins / runs
    ok_wins = all(f >= 0.80 for f in win_fracs.values())
    ok = ok_mean and ok_wins
    detail = (
        "mean rho_cont "
        + " ".join(f"{f}={means[f]:.3f}" for f in means)
        + "; cont>kmeans "
        + " ".join(f"{f}={win_fracs[f]:.0%}" for f in win_fracs)
    )
    report(9, f"correlation study over {runs} macro-runs", ok, elapsed, float("inf"), detail)
    assert ok_mean, means
    assert ok_wins, win_fracs


def test_criterion_10_pipeline_study(report, tmp_path):
    limit = 1800.0
    t0 = time.perf_counter()
    rows = experiment2(
        tmp_path / "e2", base_seed=10_000, problem="selection", stages=1,
        n=20, N=10, instances=25, k_values=[4, 5, 6, 7, 8], time_limit=20.0,
    )
    elapsed = time.perf_counter() - t0
    by = {}
    for r in rows:
        by[(r["method"], r["K"], r["instance_id"])] = r["ratio"]
    gaps = {}
    bound_violation = 0.0
    for K in (4, 5, 6, 7, 8):
        best = [
            min(by[("ip-mu", K, i)], by[("cont", K, i)]) for i in range(25)
        ]
        km = [by[("kmeans", K, i)] for i in range(25)]
        gaps[K] = float(np.mean(best) - np.mean(km))
        for method in ("ip-mu", "cont", "kmeans"):
            mean_m = float(np.mean([by[(method, K, i)] for i in range(25)]))
            bound_violation = max(bound_violation, mean_m - math.ceil(10 / K))
    ok_gap = all(g <= 0.02 for g in gaps.values())
    ok_bound = bound_violation <= 1e-9
    ok = ok_gap and ok_bound and elapsed < limit
    report(10, "reduction pipelines compete with k-means", ok, elapsed, limit,
            "best-minus-kmeans " + " ".join(f"K={k}:{g:+.3f}" for k, g in gaps.items()))
    assert ok_gap, gaps
    assert ok_bound
    assert elapsed < limit


def test_criterion_11_property_suites(report):
    limit = 600.0
    t0 = time.perf_counter()
    failures = []

    # (a) the alternating heuristic never lets t decrease within a repetition
    rng = np.random.default_rng(11_001)
    for _ in range(30):
        U = gen_uniform(int(rng.integers(2, 5)), int(rng.integers(3, 10)), 0, 20, seed=rng)
        K = int(rng.integers(1, U.scenarios.shape[0] + 1))
        traces = {}
        reduce_continuous(
            U, K, reps=3, max_iters=6, seed=rng,
            on_iteration=lambda rep, step, t: traces.setdefault(rep, []).append(t),
        )
        for trace in traces.values():
            if any(b - a < -1e-9 for a, b in zip(trace, trace[1:])):
                failures.append("cont t decreased within a repetition")

    # (b) every reduction output carries a certificate that checks out
    rng = np.random.default_rng(11_002)
    reducers = [
        lambda U, K: reduce_continuous(U, K, reps=2, max_iters=5, seed=rng),
        lambda U, K: reduce_assignment(U, K),
        lambda U, K: reduce_subset(U, K),
        lambda U, K: reduce_kmeans(U, K, reps=20, seed=rng),
        lambda U, K: reduce_midpoint(U),
        lambda U, K: reduce_subset_two_stage(U, K),
        lambda U, K: reduce_greedy_two_stage(U, K),
    ]
    for trial in range(200):
        U = gen_uniform(int(rng.integers(2, 6)), int(rng.integers(2, 10)), 0, 20, seed=rng)
        K = int(rng.integers(1, U.scenarios.shape[0] + 1))
        result = reducers[trial % len(reducers)](U, K)
        rep = verify_certificate(U, result)
        if not rep.valid:
            failures.append(f"certificate invalid for {result.method}: {rep.failures}")

    # (c) appending dominated scenarios changes neither subset method
    rng = np.random.default_rng(11_003)
    for _ in range(20):
        U = gen_uniform(int(rng.integers(2, 5)), int(rng.integers(2, 7)), 1, 20, seed=rng)
        X = U.scenarios
        shrink = X[rng.integers(0, X.shape[0], size=2)] * rng.uniform(0.3, 0.9)
        V = UncertaintySet(np.vstack([X, shrink]))
        K = int(rng.integers(1, X.shape[0] + 1))
        if abs(reduce_subset(U, K).t - reduce_subset(V, K).t) > 1e-9:
            failures.append("ip-lambda t changed after adding dominated rows")
        if abs(reduce_subset_two_stage(U, K).t - reduce_subset_two_stage(V, K).t) > 1e-9:
            failures.append("ip2 t changed after adding dominated rows")

    # (d) two-stage subset value is monotone in K
    rng = np.random.default_rng(11_004)
    for _ in range(20):
        U = gen_uniform(int(rng.integers(2, 5)), int(rng.integers(3, 8)), 0, 15, seed=rng)
        N = U.scenarios.shape[0]
        ts = [reduce_subset_two_stage(U, K).t for K in range(1, N + 1)]
        if any(b - a < -1e-12 for a, b in zip(ts, ts[1:])):
            failures.append("ip2 t not monotone in K")

    # (e) branch-and-bound agrees with exhaustive enumeration
    rng = np.random.default_rng(11_005)
    for _ in range(40):
        nv = int(rng.integers(2, 13))
        c = rng.integers(-5, 6, size=nv).astype(float)
        A = rng.integers(0, 4, size=(3, nv)).astype(float)
        b = A.sum(axis=1) * rng.uniform(0.3, 0.8, size=3)
        lp = LpProblem(c=c, sense="max", A=A, senses=("<=",) * 3, b=b, ub=np.ones(nv))
        prob = MilpProblem(lp=lp, binary=tuple(range(nv)))
        bb = solve_milp(prob, backend="bb")
        en = solve_milp_enumeration(prob)
        if bb.status != en.status:
            failures.append(f"milp status mismatch: {bb.status} vs {en.status}")
        elif bb.status == "optimal" and abs(bb.objective - en.objective) > 1e-6:
            failures.append("milp objective mismatch vs enumeration")

    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < limit
    report(11, "property suites (monotone, certified, invariant)", ok, elapsed, limit,
            f"failures={len(failures)}")
    assert not failures, failures[:5]
    assert elapsed < limit
