"""Random norms and random equilateral triples for tests and benchmarks."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .norms import Lp, NormSpec, PolytopeV, SmoothingParams, norm_batch, smooth_approx


def random_polytope(dim: int, n_vertices: int, rng: np.random.Generator) -> PolytopeV:
    """Symmetric polytope norm with ``n_vertices`` vertices (rounded up to even)."""
    half = max((n_vertices + 1) // 2, dim)
    while True:
        if dim == 2:
            ang = np.sort(rng.uniform(0, np.pi, half))
            rad = rng.uniform(0.6, 1.4, half)
            pts = np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)
        else:
            pts = rng.normal(size=(half, dim))
            pts *= rng.uniform(0.6, 1.4, (half, 1)) / np.linalg.norm(pts, axis=1, keepdims=True)
        # dyadic rounding keeps the vertex set exactly symmetric after conversion
        pts = np.round(pts * 2**20) / 2**20
        verts = np.vstack([pts, -pts])
        try:
            return PolytopeV(tuple(map(tuple, verts)), dim)
        except Exception:
            continue


def random_lp(dim: int, rng: np.random.Generator, lo: float = 1.1, hi: float = 10.0) -> Lp:
    return Lp(float(rng.uniform(lo, hi)), dim)


def random_smoothed_polytope(dim: int, rng: np.random.Generator, epsilon: float = 0.1) -> NormSpec:
    base = random_polytope(dim, int(rng.integers(8, 21)), rng)
    return smooth_approx(base, (), SmoothingParams(epsilon, sample_count=2000))


def _unit(norm: NormSpec, x) -> np.ndarray:
    x = np.asarray(x, float)
    return x / float(norm_batch(norm, x))


def unit_equilateral_pair(norm: NormSpec, rng: np.random.Generator, plane=None):
    """Unit vectors ``x, y`` with ``||x - y|| = 1`` (so ``0, x, y`` is 1-equilateral).

    ``plane`` (2 x dim) restricts the search to a random plane by default.
    """
    dim = norm.dim
    if plane is None:
        plane = np.linalg.qr(rng.normal(size=(dim, 2)))[0].T
    u = rng.normal(size=2)
    u1 = plane.T @ u
    u2 = plane.T @ np.array([-u[1], u[0]])
    x = _unit(norm, u1)

    def point(theta):
        return _unit(norm, math.cos(theta) * u1 + math.sin(theta) * u2)

    # ||point(0) - x|| = 0 and ||point(pi) - x|| = 2
    g = lambda th: float(norm_batch(norm, point(th) - x)) - 1.0
    theta = brentq(g, 0.0, math.pi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return x, point(theta)


def random_equilateral_triple(norm: NormSpec, rng: np.random.Generator, p: float = None, shift: float = 1.0):
    """``a, b, c`` with pairwise distances ``p`` built on the unit sphere, moved and scaled."""
    x, y = unit_equilateral_pair(norm, rng)
    p = float(rng.uniform(0.5, 2.0)) if p is None else p
    a = rng.normal(size=norm.dim) * shift
    return a, a + p * x, a + p * y, p
