from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from petty import rational


def test_to_fraction_accepts_strings_ints_and_floats():
    assert rational.to_fraction("3/4") == F(3, 4)
    assert rational.to_fraction(2) == F(2)
    assert rational.to_fraction(0.5) == F(1, 2)
    with pytest.raises(TypeError):
        rational.to_fraction(True)
    with pytest.raises(ValueError):
        rational.to_fraction(float("nan"))


def test_fraction_str_round_trips():
    for q in (F(0), F(-7), F(22, 7), F(-1, 3)):
        assert F(rational.fraction_str(q)) == q


def test_exact_sqrt():
    assert rational.exact_sqrt(F(9, 16)) == F(3, 4)
    assert rational.exact_sqrt(F(2)) is None


def test_solve_and_rank():
    A = [[F(2), F(1)], [F(1), F(3)]]
    x = rational.solve(A, [F(3), F(5)])
    assert x == (F(4, 5), F(7, 5))
    assert rational.rank([[1, 2], [2, 4]]) == 1
    assert rational.solve([[1, 1], [1, 1]], [1, 2]) is None


def test_infeasible_lp_has_checkable_farkas_vector():
    # x + y = 3 with 0 <= x, y <= 1
    A, b = [[1, 1]], [3]
    res = rational.linprog_exact([0, 0], A, b, [0, 0], [1, 1])
    assert res.status == "infeasible"
    A = [[F(v) for v in row] for row in A]
    assert rational.check_farkas(A, [F(3)], [F(0)] * 2, [F(1)] * 2, res.farkas)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_exact_lp_matches_highs(seed):
    rng = np.random.default_rng(seed)
    m, n = 2, 4
    A = rng.integers(-3, 4, size=(m, n))
    x0 = rng.integers(0, 3, size=n)
    b = A @ x0
    c = rng.integers(-2, 3, size=n)
    ub = [4] * n
    exact = rational.linprog_exact(c.tolist(), A.tolist(), b.tolist(), [0] * n, ub)
    ref = linprog(c, A_eq=A, b_eq=b, bounds=[(0, 4)] * n, method="highs")
    assert exact.status == "optimal" and ref.status == 0
    assert float(exact.value) == pytest.approx(ref.fun, abs=1e-9)
    assert [sum(F(int(a)) * xi for a, xi in zip(row, exact.x)) for row in A] == [F(int(v)) for v in b]
