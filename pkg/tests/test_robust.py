import itertools

import numpy as np
import pytest

from scenred.linprog import LpProblem
from scenred.milp import MilpProblem, solve_milp
from scenred.model import RobustInstance, UncertaintySet
from scenred.onestage import reduce_midpoint
from scenred.robust import (
    evaluate_one_stage,
    evaluate_two_stage,
    second_stage_selection,
    solve_one_stage,
    solve_two_stage,
)

U_REF = UncertaintySet([[4.0, 2.0], [2.0, 3.0]])


def test_selection_reference_solution():
    inst = RobustInstance(kind="selection", stages=1, n=2, p=1)
    sol = solve_one_stage(inst, U_REF)
    # item 1 costs max(4,2)=4 in the worst case, item 2 costs max(2,3)=3
    assert sol.x.tolist() == [0.0, 1.0]
    assert sol.value == 3.0
    assert sol.exact
    assert sol.per_scenario.tolist() == [2.0, 3.0]


def test_one_stage_selection_matches_enumeration():
    rng = np.random.default_rng(10)
    for trial in range(8):
        n = int(rng.integers(3, 7))
        p = int(rng.integers(1, n))
        N = int(rng.integers(2, 6))
        X = rng.integers(0, 20, size=(N, n)).astype(float)
        inst = RobustInstance(kind="selection", stages=1, n=n, p=p)
        sol = solve_one_stage(inst, X)
        best = min(
            (X @ _indicator(n, combo)).max()
            for combo in itertools.combinations(range(n), p)
        )
        assert sol.value == pytest.approx(best, abs=1e-8), f"trial {trial}"


def _indicator(n, combo):
    x = np.zeros(n)
    x[list(combo)] = 1.0
    return x


def test_one_stage_vertex_cover_matches_enumeration():
    rng = np.random.default_rng(20)
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]
    inst = RobustInstance(kind="vertex-cover", stages=1, n=4, edges=edges)
    X = rng.integers(1, 10, size=(3, 4)).astype(float)
    sol = solve_one_stage(inst, X)
    # feasible set: every node sees a pick in its closed neighborhood
    nbr = [set([v]) for v in range(4)]
    for u, v in edges:
        nbr[u].add(v)
        nbr[v].add(u)
    best = np.inf
    for bits in itertools.product((0, 1), repeat=4):
        x = np.array(bits, dtype=float)
        if all(sum(x[u] for u in nbr[v]) >= 1 for v in range(4)):
            best = min(best, (X @ x).max())
    assert sol.value == pytest.approx(best, abs=1e-8)


def test_evaluate_one_stage_fractional_and_checked():
    inst = RobustInstance(kind="selection", stages=1, n=2, p=1)
    # fractional x skips the feasibility check
    v = evaluate_one_stage(inst, [0.5, 0.5], U_REF)
    assert v == pytest.approx(3.0)
    with pytest.raises(ValueError):
        evaluate_one_stage(inst, [1.0, 1.0], U_REF)  # two picks, p=1
    assert evaluate_one_stage(None, [1.0, 1.0], U_REF) == 6.0


def test_second_stage_selection_greedy():
    y, val = second_stage_selection([0.0, 0.0, 0.0], [5.0, 1.0, 3.0], 2)
    assert y.tolist() == [0.0, 1.0, 1.0]
    assert val == 4.0
    # ties go to the lowest index
    y, _ = second_stage_selection([0.0, 0.0, 0.0], [2.0, 2.0, 2.0], 1)
    assert y.tolist() == [1.0, 0.0, 0.0]
    # already-complete selections need nothing
    y, val = second_stage_selection([1.0, 0.0, 1.0], [9.0, 9.0, 9.0], 2)
    assert val == 0.0
    with pytest.raises(ValueError):
        second_stage_selection([1.0, 1.0, 1.0], [1.0, 1.0, 1.0], 2)


def test_evaluate_two_stage_empty_first_stage():
    inst = RobustInstance(
        kind="selection", stages=2, n=3, p=2, first_stage_costs=[1.0, 1.0, 1.0]
    )
    X = np.array([[4.0, 1.0, 2.0], [1.0, 5.0, 6.0]])
    v = evaluate_two_stage(inst, np.zeros(3), X)
    # adversary picks the scenario whose two cheapest items cost most
    assert v == pytest.approx(max(1.0 + 2.0, 1.0 + 5.0))


def test_table_of_midpoint_failure():
    inst = RobustInstance(
        kind="selection", stages=2, n=2, p=1, first_stage_costs=[1.0, 1.0]
    )
    U = UncertaintySet([[1000.0, 0.0], [0.0, 1000.0]])
    full = solve_two_stage(inst, U)
    assert full.value == 0.0  # wait-and-see: recourse picks the free item
    mid = reduce_midpoint(U)
    sol = solve_two_stage(inst, mid.reduced_set())
    pipe = evaluate_two_stage(inst, sol.x, U)
    assert pipe == 1.0  # committing up front costs the first-stage price
    assert float(pipe).is_integer() and float(full.value).is_integer()


def _extensive_selection_milp(inst, X):
    """Independent extensive-form MILP for two-stage selection."""
    n, p, N = inst.n, inst.p, X.shape[0]
    width = n * (N + 1) + 1  # x, y_1..y_N, z
    rows, senses, rhs = [], [], []
    for i in range(N):
        off = n * (1 + i)
        for j in range(n):  # x_j + y_ij <= 1
            row = np.zeros(width)
            row[j] = 1.0
            row[off + j] = 1.0
            rows.append(row)
            senses.append("<=")
            rhs.append(1.0)
        row = np.zeros(width)  # sum x + sum y_i = p
        row[:n] = 1.0
        row[off : off + n] = 1.0
        rows.append(row)
        senses.append("=")
        rhs.append(float(p))
        row = np.zeros(width)  # z >= C.x + c_i.y_i
        row[:n] = inst.first_stage_costs
        row[off : off + n] = X[i]
        row[-1] = -1.0
        rows.append(row)
        senses.append("<=")
        rhs.append(0.0)
    c = np.zeros(width)
    c[-1] = 1.0
    ub = np.concatenate([np.ones(width - 1), [np.inf]])
    lp = LpProblem(c=c, A=np.vstack(rows), senses=senses, b=np.array(rhs), ub=ub)
    return solve_milp(MilpProblem(lp=lp, binary=tuple(range(width - 1))), backend="highs")


def test_two_stage_selection_matches_extensive_form():
    rng = np.random.default_rng(30)
    for trial in range(6):
        n = int(rng.integers(2, 6))
        p = int(rng.integers(1, n))
        N = int(rng.integers(2, 5))
        inst = RobustInstance(
            kind="selection",
            stages=2,
            n=n,
            p=p,
            first_stage_costs=rng.integers(0, 10, size=n).astype(float),
        )
        X = rng.integers(0, 10, size=(N, n)).astype(float)
        sol = solve_two_stage(inst, X)
        ref = _extensive_selection_milp(inst, X)
        assert sol.value == pytest.approx(ref.objective, abs=1e-7), f"trial {trial}"
        assert sol.value == pytest.approx(
            evaluate_two_stage(inst, sol.x, X), abs=1e-7
        )


def test_two_stage_cover_matches_enumeration():
    rng = np.random.default_rng(40)
    edges = [(0, 1), (1, 2), (0, 2), (2, 3)]
    inst = RobustInstance(
        kind="vertex-cover",
        stages=2,
        n=4,
        edges=edges,
        first_stage_costs=rng.integers(1, 8, size=4).astype(float),
    )
    X = rng.integers(1, 8, size=(3, 4)).astype(float)
    sol = solve_two_stage(inst, X)
    best = min(
        evaluate_two_stage(inst, np.array(bits, dtype=float), X)
        for bits in itertools.product((0, 1), repeat=4)
    )
    assert sol.value == pytest.approx(best, abs=1e-7)
    assert sol.exact


def test_two_stage_free_first_stage_is_wait_free():
    # with zero first-stage prices, buying everything up front is free
    inst = RobustInstance(
        kind="selection", stages=2, n=4, p=2, first_stage_costs=np.zeros(4)
    )
    X = np.array([[5.0, 6.0, 7.0, 8.0]])
    sol = solve_two_stage(inst, X)
    assert sol.value == 0.0


def test_stage_dispatch_validation():
    one = RobustInstance(kind="selection", stages=1, n=2, p=1)
    two = RobustInstance(kind="selection", stages=2, n=2, p=1, first_stage_costs=[1, 1])
    with pytest.raises(ValueError):
        solve_one_stage(two, U_REF)
    with pytest.raises(ValueError):
        solve_two_stage(one, U_REF)
    with pytest.raises(ValueError):
        solve_one_stage(one, np.ones((2, 3)))  # n mismatch


def test_selection_enumeration_guard():
    inst = RobustInstance(
        kind="selection", stages=2, n=21, p=2, first_stage_costs=np.ones(21)
    )
    with pytest.raises(ValueError):
        solve_two_stage(inst, np.ones((2, 21)))
