import math
from fractions import Fraction as F
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from petty import rational
from petty.equilateral import (
    Found,
    NotFound,
    audit_vertex_certificate,
    diff_polytope_vertex_check,
    extend_numeric,
    generator_norm,
    generators,
    petty_l1_points,
    verify_equilateral,
)
from petty.errors import InputError
from petty.norms import Lp, PolytopeV


def test_petty_l1_points_are_two_equilateral_exactly():
    for n in range(4, 11):
        cert = verify_equilateral(Lp(1, n), petty_l1_points(n))
        assert cert.exact and cert.p == 2 and cert.max_deviation == 0


def test_petty_l1_n4_coordinates():
    a1, a2, a3, a4 = generators("petty-l1", 4)
    assert a3 == (0, F(1, 3), F(1, 3), F(1, 3))
    assert a4 == (0, F(-1, 8), F(-3, 8), F(-1, 2))


def test_literal_fourth_point_is_not_equilateral():
    # denominators 4(n-1) give ||a4||_1 = (n-2)/(n-1), so ||a1 - a4||_1 != 2
    for n in (4, 5, 6):
        k = n - 1
        literal = (0, F(-1, 4 * k), F(-3, 4 * k)) + (F(-1, k),) * (n - 3)
        pts = petty_l1_points(n)[:3] + [literal]
        cert = verify_equilateral(Lp(1, n), pts)
        assert cert.max_deviation > 0 and not cert.valid
        assert rational.l1(rational.sub(pts[0], literal)) == 1 + F(n - 2, n - 1)


@pytest.mark.parametrize("kind", ["euclidean-simplex", "linf-cube", "l1-crosspolytope"])
@pytest.mark.parametrize("n", [1, 2, 3, 6])
def test_generators_round_trip(kind, n):
    pts = generators(kind, n)
    cert = verify_equilateral(generator_norm(kind, n), pts)
    if kind == "euclidean-simplex":
        assert len(pts) == n + 1 and cert.max_deviation <= 1e-12 and cert.p == pytest.approx(1)
    elif kind == "linf-cube":
        assert len(pts) == 2**n and cert.p == 1 and cert.max_deviation == 0
    else:
        assert len(pts) == 2 * n and (n == 1 or cert.p == 2) and cert.max_deviation == 0


def test_generator_errors():
    with pytest.raises(InputError):
        generators("petty-l1", 3)
    with pytest.raises(InputError):
        generators("hexagon", 2)
    with pytest.raises(InputError):
        generators("linf-cube", 0)


def test_verify_duplicates_and_single_point():
    with pytest.raises(InputError):
        verify_equilateral(Lp(2, 2), [[0, 0], [0, 0], [1, 0]])
    with pytest.raises(InputError):
        verify_equilateral(Lp(2, 2), [[0, 0]])


def test_verify_polytope_exact():
    hexagon = PolytopeV(((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)), 2)
    cert = verify_equilateral(hexagon, [(0, 0), (1, 0), (0, 1)])
    assert cert.exact and cert.max_deviation == 0 and cert.p == 1


def test_extend_numeric_finds_a_witness_for_three_points():
    pts = petty_l1_points(4)[:3]
    res = extend_numeric(Lp(1, 4), pts, 2, tol=1e-9)
    assert isinstance(res, Found) and res.residual <= 1e-8
    assert verify_equilateral(Lp(1, 4), [*pts, list(res.x)], 1e-9).valid


def test_extend_numeric_reports_not_found_for_maximal_set():
    res = extend_numeric(Lp(1, 4), petty_l1_points(4), 2, tol=1e-9)
    assert isinstance(res, NotFound)
    assert res.status == "not_found" and res.best_residual > 1e-3


def test_extend_numeric_euclidean_apex():
    pts = generators("euclidean-simplex", 3)[:3]
    res = extend_numeric(Lp(2, 3), pts, tol=1e-9)
    assert isinstance(res, Found) and res.residual <= 1e-9


def test_extend_numeric_is_deterministic():
    pts = petty_l1_points(5)[:3]
    a = extend_numeric(Lp(1, 5), pts, 2, seeds=3)
    b = extend_numeric(Lp(1, 5), pts, 2, seeds=3)
    assert np.array_equal(a.x, b.x)


def test_extend_numeric_rejects_non_equilateral():
    with pytest.raises(InputError):
        extend_numeric(Lp(2, 2), [[0, 0], [1, 0], [5, 5]])


def test_vertex_check_triangle_gives_hexagon():
    cert = diff_polytope_vertex_check([(0, 0), (1, 0), (0, 1)])
    assert len(cert.reports) == 6 and cert.all_vertices and audit_vertex_certificate(cert)
    for r in cert.reports:
        assert r.value == 2 and r.runner_up <= 1


def test_vertex_check_petty_tetrahedron():
    cert = diff_polytope_vertex_check(petty_l1_points(4))
    assert len(cert.reports) == 12 and cert.all_vertices and audit_vertex_certificate(cert)


def test_vertex_check_collinear_raises():
    with pytest.raises(InputError):
        diff_polytope_vertex_check([(0, 0), (1, 1), (3, 3)])


def test_tampered_vertex_certificate_fails_audit():
    cert = diff_polytope_vertex_check([(0, 0), (1, 0), (0, 1)])
    cert.reports[0].value += 1
    assert not audit_vertex_certificate(cert)


def _lp_is_vertex(diffs, key):
    """Independent check: the difference is not a convex combination of the others."""
    others = [v for k, v in diffs.items() if k != key]
    A = np.array(others, float).T
    A_eq = np.vstack([A, np.ones(len(others))])
    b_eq = np.r_[np.array(diffs[key], float), 1.0]
    res = linprog(np.zeros(len(others)), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * len(others), method="highs")
    return res.status == 2  # infeasible


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6))
def test_vertex_check_agrees_with_lp(dim, seed):
    rng = np.random.default_rng(seed)
    pts = [tuple(F(int(v)) for v in rng.integers(-6, 7, size=dim)) for _ in range(dim + 1)]
    try:
        cert = diff_polytope_vertex_check(pts)
    except InputError:
        return
    diffs = {(i, j): rational.sub(pts[i], pts[j]) for i, j in permutations(range(len(pts)), 2)}
    assert cert.all_vertices
    for r in cert.reports[:4]:
        assert _lp_is_vertex(diffs, (r.i, r.j))
