import numpy as np
import pytest
from scipy import sparse

from scenred.linprog import LpProblem, solve_lp


def test_simple_min():
    # min x + y  s.t. x + y >= 2, x,y >= 0
    p = LpProblem(c=[1.0, 1.0], A=[[1.0, 1.0]], senses=[">="], b=[2.0])
    s = solve_lp(p)
    assert s.status == "optimal"
    assert s.objective == pytest.approx(2.0, abs=1e-9)


def test_simple_max_with_bounds():
    # max 3x + 2y  s.t. x + y <= 4, x <= 2
    p = LpProblem(
        c=[3.0, 2.0],
        sense="max",
        A=[[1.0, 1.0]],
        senses=["<="],
        b=[4.0],
        ub=[2.0, np.inf],
    )
    s = solve_lp(p)
    assert s.status == "optimal"
    assert s.objective == pytest.approx(10.0, abs=1e-9)
    assert s.x == pytest.approx([2.0, 2.0], abs=1e-8)


def test_equality_rows():
    # min 2x + y  s.t. x + y = 3, x - y <= 1
    p = LpProblem(
        c=[2.0, 1.0],
        A=[[1.0, 1.0], [1.0, -1.0]],
        senses=["=", "<="],
        b=[3.0, 1.0],
    )
    s = solve_lp(p)
    assert s.status == "optimal"
    assert s.x == pytest.approx([0.0, 3.0], abs=1e-8)
    assert s.objective == pytest.approx(3.0, abs=1e-9)


def test_infeasible():
    p = LpProblem(c=[1.0], A=[[1.0], [1.0]], senses=["<=", ">="], b=[1.0, 2.0])
    assert solve_lp(p).status == "infeasible"


def test_unbounded():
    p = LpProblem(c=[1.0], sense="max", A=[[-1.0]], senses=["<="], b=[0.0])
    assert solve_lp(p).status == "unbounded"


def test_sparse_matrix_input():
    A = sparse.csr_matrix(np.array([[1.0, 1.0], [2.0, 1.0]]))
    p = LpProblem(c=[1.0, 1.0], A=A, senses=[">=", ">="], b=[2.0, 3.0])
    s = solve_lp(p)
    assert s.status == "optimal"
    assert s.objective == pytest.approx(2.0, abs=1e-9)


def test_no_rows_just_bounds():
    p = LpProblem(c=[1.0, -1.0], lb=[0.5, 0.0], ub=[np.inf, 2.0])
    s = solve_lp(p)
    assert s.status == "optimal"
    assert s.objective == pytest.approx(0.5 - 2.0, abs=1e-9)


def test_duality_certificate_exposed():
    # min c'x with a known dual: the solver must hand back multipliers
    # that reproduce the objective (strong duality at optimum).
    p = LpProblem(
        c=[4.0, 3.0],
        A=[[2.0, 1.0], [1.0, 2.0]],
        senses=[">=", ">="],
        b=[4.0, 4.0],
    )
    s = solve_lp(p)
    assert s.status == "optimal"
    assert s.row_duals.shape == (2,)
    assert s.dual_objective == pytest.approx(s.objective, abs=1e-6)


def test_row_duals_follow_user_row_order():
    # interleave senses so internal reordering would be visible
    p = LpProblem(
        c=[1.0, 1.0],
        A=[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
        senses=["<=", ">=", ">="],
        b=[10.0, 1.0, 3.0],
    )
    s = solve_lp(p)
    assert s.status == "optimal"
    # the <= row is slack at the optimum, so its multiplier is 0
    assert abs(s.row_duals[0]) <= 1e-9
    assert s.objective == pytest.approx(3.0, abs=1e-9)


def test_deterministic_repeat():
    rng = np.random.default_rng(42)
    A = rng.uniform(0.1, 1.0, size=(6, 4))
    b = rng.uniform(1.0, 2.0, size=6)
    c = rng.uniform(0.5, 1.5, size=4)
    p = LpProblem(c=c, A=A, senses=[">="] * 6, b=b)
    first = solve_lp(p)
    for _ in range(3):
        again = solve_lp(p)
        assert np.array_equal(again.x, first.x)
        assert again.objective == first.objective


def test_lb_must_be_finite():
    with pytest.raises(ValueError):
        LpProblem(c=[1.0], lb=[-np.inf])


def test_shape_validation():
    with pytest.raises(ValueError):
        LpProblem(c=[1.0, 2.0], A=[[1.0]], senses=["<="], b=[1.0])
    with pytest.raises(ValueError):
        LpProblem(c=[1.0], A=[[1.0]], senses=["<=", ">="], b=[1.0])
    with pytest.raises(ValueError):
        LpProblem(c=[1.0], sense="median")


def test_fuzz_certificates_on_random_feasible_lps():
    # solve_lp verifies its own optimality certificate internally; this
    # loop just has to not trip that verification
    rng = np.random.default_rng(7)
    for trial in range(50):
        m, n = rng.integers(1, 6), rng.integers(1, 5)
        A = rng.uniform(0.0, 2.0, size=(m, n))
        x0 = rng.uniform(0.0, 3.0, size=n)  # a known feasible point
        b = A @ x0
        senses = [rng.choice(["<=", ">=", "="]) for _ in range(m)]
        slack = rng.uniform(0.0, 1.0, size=m)
        bb = np.array(
            [
                bi + s if se == "<=" else bi - s if se == ">=" else bi
                for bi, s, se in zip(b, slack, senses)
            ]
        )
        c = rng.uniform(0.1, 2.0, size=n)
        s = solve_lp(LpProblem(c=c, A=A, senses=senses, b=bb, ub=np.full(n, 10.0)))
        assert s.status == "optimal", f"trial {trial}: {s.status}"
        assert s.objective <= c @ x0 + 1e-7
