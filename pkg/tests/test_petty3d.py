import math

import numpy as np
import pytest

from petty.errors import InputError, SectionTrivial
from petty.norms import Lp, norm_batch
from petty.petty3d import petty_extend, plane_basis, section_body, sweep_r
from petty.samples import random_equilateral_triple, random_lp, random_polytope, random_smoothed_polytope

S = math.sqrt(3) / 2
TRI = ([0, 0, 0], [1, 0, 0], [0.5, S, 0])


def _devs(norm, pts, d):
    return np.abs(norm_batch(norm, d[None, :] - np.asarray(pts, float)) - 1)


def test_euclidean_apex():
    res = petty_extend(Lp(2, 3), *TRI)
    assert abs(res.d[2]) == pytest.approx(math.sqrt(2 / 3), abs=1e-8)
    assert np.allclose(res.d[:2], [0.5, S / 3], atol=1e-8)
    assert res.max_deviation <= 1e-9


@pytest.mark.parametrize("p", [1.0, math.inf])
def test_polyhedral_norms_extend(p):
    norm = Lp(p, 3)
    pts = ([0, 0, 0], [1, 1, 0], [1, 0, 1]) if math.isinf(p) else ([0, 0, 0], [1, 0, 0], [0.5, 0.5, 0])
    res = petty_extend(norm, *pts, tol=1e-4)
    assert np.max(_devs(norm, pts, res.d)) <= 1e-4


def test_random_smooth_norms(rng):
    for norm in (random_lp(3, rng), random_smoothed_polytope(3, rng)):
        a, b, c, p = random_equilateral_triple(norm, rng)
        res = petty_extend(norm, a, b, c)
        assert res.max_deviation <= 1e-6 * p


def test_smoothing_mode_on_random_polytope(rng):
    norm = random_polytope(3, 12, rng)
    a, b, c, p = random_equilateral_triple(norm, rng)
    res = petty_extend(norm, a, b, c, tol=1e-4, mode="smoothing")
    assert res.method == "smoothing"
    assert res.max_deviation <= 1e-4 * p
    assert [h["k"] for h in res.history] == sorted(h["k"] for h in res.history)


def test_sweep_central_section_at_least_one(rng):
    norm = random_lp(3, rng)
    a, b, c, _ = random_equilateral_triple(norm, rng)
    sweep = sweep_r(norm, a, b, c, grid_size=16)
    assert sweep.central is not None and sweep.central.r >= 1 - 1e-8
    t, r = sweep.profile()
    assert np.all(np.diff(t) > 0) and len(t) >= 8


def test_section_body_bounds():
    v = np.array([0.0, 0.0, 1.0])
    with pytest.raises(SectionTrivial):
        section_body(Lp(2, 3), v, 1.0)
    body = section_body(Lp(2, 3), v, 0.6)
    assert body.inside(np.array([0.79, 0.0])) and not body.inside(np.array([0.81, 0.0]))


def test_plane_basis_is_orthonormal():
    v = np.array([0.3, -0.4, 0.866])
    v /= np.linalg.norm(v)
    E = plane_basis(v)
    assert np.allclose(E @ E.T, np.eye(2), atol=1e-14)
    assert np.allclose(E @ v, 0, atol=1e-14)


def test_rejects_non_equilateral_and_wrong_dimension():
    with pytest.raises(InputError):
        petty_extend(Lp(2, 3), [0, 0, 0], [1, 0, 0], [3, 0, 0])
    with pytest.raises(InputError):
        petty_extend(Lp(2, 3), *TRI, mode="bogus")
