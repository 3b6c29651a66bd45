from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from dclc.lp import LinearSystem, Status, exact_feasibility, maximize, solve_feasibility


def test_simple_feasible():
    sys = LinearSystem([[1, 1]], [1])
    r = solve_feasibility(sys)
    assert r.status is Status.FEASIBLE
    assert sys.violation(r.x) <= 1e-9


def test_infeasible_has_checked_certificate():
    # x + y = 1, x + y <= 0.5, x, y >= 0
    sys = LinearSystem([[1, 1]], [1], [[1, 1]], [0.5])
    r = solve_feasibility(sys)
    assert r.status is Status.INFEASIBLE
    z, y = r.certificate
    G, h = sys.inequality_rows()
    assert (z >= 0).all()
    assert np.allclose(G.T @ z + sys.A_eq.T @ y, 0, atol=1e-9)
    assert h @ z + sys.b_eq @ y < 0


def test_bounds_respected():
    sys = LinearSystem([[1, 0]], [2], lo=np.array([-np.inf, 0]), hi=np.array([1, np.inf]))
    assert solve_feasibility(sys).status is Status.INFEASIBLE
    sys = LinearSystem([[1, 0]], [-2], lo=np.array([-np.inf, 0]))
    assert solve_feasibility(sys).feasible


def test_maximize():
    sys = LinearSystem([[1, 1]], [1], hi=np.array([0.7, 1.0]))
    val, x = maximize(sys, [1, 0])
    assert abs(val - 0.7) < 1e-9
    assert maximize(LinearSystem([[1, 1]], [-1]), [1, 0]) is None


def test_exact_examples():
    r = exact_feasibility([[1, 1]], [1], [[1, 1]], [Fraction(1, 2)])
    assert not r.feasible and r.phase1_optimum == Fraction(1, 2)
    r = exact_feasibility([[1, -1]], [-3], free=[True, False])
    assert r.feasible and r.x[0] - r.x[1] == -3


small = st.integers(-3, 3)


@settings(max_examples=80)
@given(
    st.integers(1, 3).flatmap(
        lambda m: st.tuples(
            st.lists(st.lists(small, min_size=3, max_size=3), min_size=m, max_size=m),
            st.lists(small, min_size=m, max_size=m),
            st.lists(st.lists(small, min_size=3, max_size=3), min_size=0, max_size=2),
            st.data(),
        )
    )
)
def test_exact_agrees_with_float_solver(args):
    A, b, G, data = args
    h = data.draw(st.lists(small, min_size=len(G), max_size=len(G)))
    exact = exact_feasibility(A, b, G, h)
    sys = LinearSystem(np.array(A), np.array(b), np.array(G).reshape(-1, 3), np.array(h))
    r = solve_feasibility(sys)
    assert r.status is not Status.INDETERMINATE
    assert exact.feasible == r.feasible
    if exact.feasible:
        x = exact.x
        for row, bi in zip(A, b):
            assert sum(Fraction(a) * xi for a, xi in zip(row, x)) == bi
        for row, hi in zip(G, h):
            assert sum(Fraction(a) * xi for a, xi in zip(row, x)) <= hi
        assert all(xi >= 0 for xi in x)
