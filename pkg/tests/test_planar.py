import math

import numpy as np
import pytest

from petty.errors import InputError
from petty.norms import ConvexBodyOracle2D, Lp, norm_batch
from petty.planar import Triangle2D, boundary_extent, circumcircle_equilateral, inscribe_homothet_2d
from petty.samples import random_equilateral_triple, random_lp, random_polytope, random_smoothed_polytope


def test_circumcircle_linf_square_corner():
    c = circumcircle_equilateral(Lp(math.inf, 2), [0, 0], [1, 0], [1, 1])
    assert np.allclose(c.center, [0.5, 0.5], atol=1e-9)
    assert c.radius == pytest.approx(0.5, abs=1e-9)


def test_circumcircle_l1():
    c = circumcircle_equilateral(Lp(1, 2), [0, 0], [1, 1], [2, 0])
    assert c.radius <= 2 * (1 + 1e-8)
    assert c.deviation <= 1e-8


def test_circumcircle_euclidean_matches_closed_form():
    s = math.sqrt(3) / 2
    c = circumcircle_equilateral(Lp(2, 2), [0, 0], [1, 0], [0.5, s])
    assert np.allclose(c.center, [0.5, s / 3], atol=1e-9)
    assert c.radius == pytest.approx(1 / math.sqrt(3), abs=1e-9)


def test_circumcircle_rejects_non_equilateral():
    with pytest.raises(InputError):
        circumcircle_equilateral(Lp(2, 2), [0, 0], [1, 0], [3, 0.1])


def test_inscribe_euclidean_equilateral_triangle():
    body = ConvexBodyOracle2D.unit_ball(Lp(2, 2))
    s = math.sqrt(3) / 2
    sol = inscribe_homothet_2d(body, Triangle2D([0, 0], [1, 0], [0.5, s]))
    assert sol.r == pytest.approx(math.sqrt(3), abs=1e-8)
    assert np.allclose(np.linalg.norm(sol.points(Triangle2D([0, 0], [1, 0], [0.5, s])), axis=1), 1, atol=1e-9)


def test_degenerate_triangle_rejected():
    with pytest.raises(InputError):
        Triangle2D([0, 0], [1, 1], [2, 2])


def test_boundary_extent_chord_through_origin(rng):
    for _ in range(10):
        norm = random_lp(2, rng)
        a, b, c, _ = random_equilateral_triple(norm, rng, p=1.0)
        body = ConvexBodyOracle2D.unit_ball(norm)
        assert boundary_extent(body, a - c, c - a) == pytest.approx(2.0, abs=1e-9)


def test_boundary_extent_bounded_by_two_over_norm(rng):
    norm = random_polytope(2, 10, rng)
    body = ConvexBodyOracle2D.unit_ball(norm)
    for _ in range(20):
        v = rng.normal(size=2)
        x = rng.normal(size=2)
        x *= rng.uniform(0, 1) / float(norm_batch(norm, x))
        assert boundary_extent(body, x, v) <= 2 / float(norm_batch(norm, v)) + 1e-9


def test_boundary_extent_concave_along_chords(rng):
    norm = random_lp(2, rng)
    body = ConvexBodyOracle2D.unit_ball(norm)
    v = rng.normal(size=2)
    u = rng.normal(size=2)
    x1, x2 = 0.9 * u / float(norm_batch(norm, u)), -0.9 * u / float(norm_batch(norm, u))
    f1, f2 = boundary_extent(body, x1, v), boundary_extent(body, x2, v)
    for lam in np.linspace(0.1, 0.9, 9):
        mid = boundary_extent(body, lam * x1 + (1 - lam) * x2, v)
        assert mid >= lam * f1 + (1 - lam) * f2 - 1e-8


def test_boundary_extent_requires_member():
    body = ConvexBodyOracle2D.unit_ball(Lp(2, 2))
    with pytest.raises(InputError):
        boundary_extent(body, [2.0, 0.0], [1.0, 0.0])


def test_base_vertices_agree_on_strictly_convex_bodies(rng):
    for norm in (random_lp(2, rng), random_smoothed_polytope(2, rng)):
        body = ConvexBodyOracle2D.unit_ball(norm)
        tri = Triangle2D(*rng.normal(size=(3, 2)))
        s0 = inscribe_homothet_2d(body, tri, base_vertex=0)
        s1 = inscribe_homothet_2d(body, tri, base_vertex=1)
        assert np.linalg.norm(s0.z - s1.z) + abs(s0.r - s1.r) <= 1e-6


def test_general_membership_oracle():
    # ellipse given only by membership
    body = ConvexBodyOracle2D(np.zeros(2), lambda P: (P[..., 0] / 2) ** 2 + P[..., 1] ** 2 <= 1)
    s = math.sqrt(3) / 2
    tri = Triangle2D([0, 0], [1, 0], [0.5, s])
    sol = inscribe_homothet_2d(body, tri)
    Y = sol.points(tri)
    assert np.allclose((Y[:, 0] / 2) ** 2 + Y[:, 1] ** 2, 1, atol=1e-7)
