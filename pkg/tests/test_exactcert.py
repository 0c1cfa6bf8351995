import json
from fractions import Fraction as F

import numpy as np
import pytest

from petty import exactcert
from petty.equilateral import petty_l1_points
from petty.errors import CellBudgetExceeded, InputError
from petty.norms import Lp, SmoothingParams, norm_batch, smooth_approx


def _l1(x, a):
    return sum(abs(u - v) for u, v in zip(x, a))


def test_n4_is_maximal_and_audits():
    cert = exactcert.l1_maximality_check(4)
    assert cert.verdict == "maximal" and cert.witness is None
    assert cert.cell_count == 4**4
    assert exactcert.audit_certificate(cert)["ok"]


def test_orbit_reduction_counts():
    pts = petty_l1_points(6)
    assert exactcert.cell_count(pts, 6) == 4**6
    # coordinates 3..5 are interchangeable
    assert exactcert.orbit_count(pts, 6) == 4 * 4 * 4 * 20


def test_control_without_fourth_point_is_extendable():
    pts = petty_l1_points(4)
    cert = exactcert.l1_maximality_general(pts[:3], 2)
    assert cert.verdict == "extendable"
    assert all(_l1(cert.witness, a) == 2 for a in pts[:3])
    # the fourth point itself is one solution of the three equations
    assert all(_l1(pts[3], a) == 2 for a in pts[:3])


def test_two_points_witness():
    cert = exactcert.l1_maximality_general([(0, 0), (2, 0)], 2)
    assert cert.verdict == "extendable"
    assert all(_l1(w, a) == 2 for w in cert.witnesses for a in [(0, 0), (2, 0)])


def test_crosspolytope_plane_agrees_with_grid():
    pts = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    cert = exactcert.l1_maximality_general(pts, 2)
    assert cert.verdict == "maximal"
    # dyadic grid + exact substitution finds nothing either
    grid = [F(k, 8) for k in range(-40, 41)]
    assert not any(all(_l1((x, y), a) == 2 for a in pts) for x in grid for y in grid)


def test_first_two_equations_force_zero_first_coordinate():
    pts = petty_l1_points(4)
    _, witnesses = exactcert.solve_l1_system(pts[:2], [2, 2])
    assert witnesses and all(w[0] == 0 and _l1(w[1:], (0, 0, 0)) == 1 for w in witnesses)


def test_tail_vector_collapses_to_zero():
    # with x_1 = 0 the remaining coordinates y must satisfy ||y||_1 = 1 and
    # be sign-opposite to both tails, which forces y = 0
    a3, a4 = petty_l1_points(4)[2:]
    t3, t4 = a3[1:], a4[1:]
    _, witnesses = exactcert.solve_l1_system([(0, 0, 0), t3, t4], [1, 2, 2])
    assert witnesses == []


def test_general_entry_matches_check():
    a = exactcert.l1_maximality_check(5)
    b = exactcert.l1_maximality_general(petty_l1_points(5), 2)
    assert a.verdict == b.verdict and a.cells_checked == b.cells_checked


def test_json_round_trip_and_tamper_detection():
    cert = exactcert.l1_maximality_check(4)
    data = json.loads(json.dumps(exactcert.certificate_to_json(cert)))
    again = exactcert.certificate_from_json(data)
    assert exactcert.audit_certificate(again)["ok"]
    data["reports"][3]["farkas"] = ["0"] * len(data["reports"][3]["farkas"])
    assert not exactcert.audit_certificate(exactcert.certificate_from_json(data))["ok"]
    data = exactcert.certificate_to_json(cert)
    data["verdict"] = "extendable"
    assert not exactcert.audit_certificate(exactcert.certificate_from_json(data))["ok"]


def test_budget_and_input_errors():
    with pytest.raises(CellBudgetExceeded) as exc:
        exactcert.l1_maximality_check(5, cap=10)
    assert len(exc.value.partial["reports"]) == 10
    with pytest.raises(InputError):
        exactcert.l1_maximality_check(3)
    with pytest.raises(InputError):
        exactcert.l1_maximality_general([(0, 0), (1, 0)], 2)
    with pytest.raises(InputError):
        exactcert.l1_maximality_check(11)


@pytest.mark.parametrize("k", [2, 4, 8])
def test_smoothed_norms_keep_distances_near_two(k):
    pts = np.array([[float(v) for v in a] for a in petty_l1_points(4)])
    diffs = [(pts[i] - pts[j]) / 2 for i in range(4) for j in range(i + 1, 4)]
    sm = smooth_approx(Lp(1, 4), diffs, SmoothingParams(1 / k, sample_count=2000))
    D = norm_batch(sm, np.array([pts[i] - pts[j] for i in range(4) for j in range(i + 1, 4)]))
    assert np.all(np.abs(D - 2) <= 2 / k)
