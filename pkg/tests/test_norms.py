import math
from fractions import Fraction as F

import numpy as np
import pytest

from petty.errors import InputError
from petty.norms import (
    ConvexBodyOracle2D,
    L1PlusL2,
    Lp,
    PolytopeV,
    SmoothingParams,
    facet_functionals,
    illinois,
    is_smooth_strictly_convex,
    norm_batch,
    norm_eval,
    ray_to_boundary,
    smooth_approx,
    spec_from_json,
    spec_to_json,
    validate_body,
)
from petty.samples import random_polytope


def test_lp_values():
    x = np.array([3.0, -4.0])
    assert norm_batch(Lp(1, 2), x) == 7
    assert norm_batch(Lp(2, 2), x) == 5
    assert norm_batch(Lp(math.inf, 2), x) == 4
    assert norm_batch(Lp(3, 2), x) == pytest.approx((27 + 64) ** (1 / 3))


def test_invalid_specs_raise():
    with pytest.raises(InputError):
        Lp(0.5, 2)
    with pytest.raises(InputError):
        PolytopeV(((1, 0), (0, 1), (-1, 0)), 2)
    with pytest.raises(InputError):
        norm_batch(Lp(2, 3), np.ones(2))


def test_exact_evaluation_on_polyhedral_norms():
    assert norm_eval(Lp(1, 3), ["1/2", "-1/3", 1]) == F(11, 6)
    assert norm_eval(Lp(math.inf, 2), [F(-3, 2), 1]) == F(3, 2)
    square = PolytopeV(((1, 1), (1, -1), (-1, 1), (-1, -1)), 2)
    assert norm_eval(square, [F(1, 2), F(-3, 4)]) == F(3, 4)


def test_polytope_float_gauge_agrees_with_exact(rng):
    P = random_polytope(3, 14, rng)
    for _ in range(10):
        x = rng.integers(-5, 6, size=3)
        exact = norm_eval(P, [int(v) for v in x])
        assert float(norm_batch(P, x.astype(float))) == pytest.approx(float(exact), rel=1e-12)


def test_facet_functionals_reproduce_l1():
    F_ = facet_functionals(Lp(1, 3))
    x = np.array([0.3, -1.2, 2.0])
    assert np.abs(F_ @ x).max() == pytest.approx(3.5)
    assert facet_functionals(Lp(2, 3)) is None


def test_l1_plus_l2_is_exact_on_pythagorean_input():
    assert norm_eval(L1PlusL2(3), [1, 3, 4]) == 6


def test_smoothness_flags():
    assert is_smooth_strictly_convex(Lp(3, 2))
    assert not is_smooth_strictly_convex(Lp(1, 2))
    assert not is_smooth_strictly_convex(Lp(math.inf, 2))


def test_ray_to_boundary_on_unit_circle():
    body = ConvexBodyOracle2D.unit_ball(Lp(2, 2))
    p = ray_to_boundary(body, [0.0, 0.0], [3.0, 4.0])
    assert np.linalg.norm(p) == pytest.approx(1.0, abs=1e-12)


def test_validate_body_rejects_nonconvex_region(rng):
    star = ConvexBodyOracle2D(np.zeros(2), lambda P: np.abs(P).min(axis=-1) <= 0.1)
    with pytest.raises(InputError):
        validate_body(star, rng, pairs=200)
    validate_body(ConvexBodyOracle2D.unit_ball(Lp(4, 2)), rng, pairs=200)


def test_illinois_finds_roots_on_flat_arrays():
    targets = np.array([0.3, 1.7, 2.2])
    f = lambda idx, x: x**3 - targets[idx]
    lo, hi = np.zeros(3), np.full(3, 2.0)
    a, b = illinois(f, lo, hi, f(np.arange(3), lo), f(np.arange(3), hi), xtol=1e-14)
    assert np.allclose(a, np.cbrt(targets), atol=1e-12)


@pytest.mark.parametrize("eps", [0.5, 0.125])
def test_smoothing_keeps_anchors_and_sandwich(eps, rng):
    base = Lp(1, 3)
    anchors = [(1.0, 0, 0), (0, 0.5, 0.5), (0, -0.25, -0.75)]
    sm = smooth_approx(base, anchors, SmoothingParams(eps, sample_count=3000))
    assert np.allclose(norm_batch(sm, np.array(anchors)), 1.0, atol=1e-9)
    X = rng.normal(size=(3000, 3))
    N, N0 = norm_batch(base, X), norm_batch(sm, X)
    assert np.all((1 - eps) * N0 <= N * (1 + 1e-12))
    assert np.all(N <= (1 + eps) * N0 * (1 + 1e-12))
    assert is_smooth_strictly_convex(sm)


def test_smoothing_rejects_non_unit_anchor():
    with pytest.raises(InputError):
        smooth_approx(Lp(1, 2), [(2.0, 0.0)], SmoothingParams(0.25))


def test_spec_json_round_trip():
    for spec in (Lp(3.5, 2), Lp(math.inf, 4), PolytopeV(((1, 0), (0, 1), (-1, 0), (0, -1)), 2), L1PlusL2(3)):
        assert spec_from_json(spec_to_json(spec)) == spec
    with pytest.raises(InputError):
        spec_from_json({"type": "banana"})
