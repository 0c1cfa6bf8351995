"""Norm specifications, gauge evaluation, planar body oracles and the
smooth / strictly convex approximation operator.

Every norm is described declaratively by a frozen dataclass.  Two entry
points evaluate it:

* :func:`norm_eval` for a single vector.  Rational input on a polyhedral
  norm is evaluated exactly and returns a :class:`~fractions.Fraction`.
* :func:`norm_batch` for float arrays of shape ``(..., dim)``; this is what
  the geometric solvers use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull
from scipy.spatial import QhullError

from . import rational
from .errors import InputError, OracleError, SmoothingFailed, SolverError

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_RADIUS = 1e6


# ---------------------------------------------------------------------------
# specifications


@dataclass(frozen=True)
class Lp:
    p: float
    dim: int

    def __post_init__(self):
        if not (self.p >= 1):
            raise InputError(f"Lp needs p >= 1, got {self.p}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise InputError("dim must be a positive integer")


@dataclass(frozen=True)
class PolytopeV:
    """Norm whose unit ball is the convex hull of a centrally symmetric vertex set."""

    vertices: tuple
    dim: int
    _facets: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        verts = tuple(rational.to_vector(v) for v in self.vertices)
        if not verts or any(len(v) != self.dim for v in verts):
            raise InputError("vertex dimensions do not match dim")
        vset = set(verts)
        for v in verts:
            if tuple(-c for c in v) not in vset:
                raise InputError(f"vertex set is not centrally symmetric: -{v} missing")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "_facets", _hull_functionals(np.array(verts, dtype=float)))


@dataclass(frozen=True)
class L1PlusL2:
    """``|x_1| + sqrt(x_2^2 + ... + x_n^2)``."""

    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise InputError("L1PlusL2 needs dim >= 2")


@dataclass(frozen=True)
class Smoothed:
    """Smooth, strictly convex approximation of ``base``.

    Built by :func:`smooth_approx`; evaluates as
    ``(1 - theta) * (sum_j w_j |h_j . x|^q)^(1/q) + theta * |x|_2 / radius``
    or, in ``identity`` mode, exactly as ``base``.
    """

    base: "NormSpec"
    epsilon: float
    anchors: tuple
    mode: str = "identity"
    functionals: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    weights: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    q: float = 0.0
    theta: float = 0.0
    radius: float = 1.0

    @property
    def dim(self) -> int:
        return self.base.dim


NormSpec = Union[Lp, PolytopeV, L1PlusL2, Smoothed]


def _hull_functionals(verts: np.ndarray) -> np.ndarray:
    """Facet functionals f with ``gauge(x) = max |f.x|``, one per +/- pair."""
    dim = verts.shape[1]
    if dim == 1:
        r = np.max(np.abs(verts[:, 0]))
        return np.array([[1.0 / r]])
    try:
        hull = ConvexHull(verts)
    except QhullError as exc:
        raise InputError(f"polytope vertices do not span the space: {exc}") from None
    normals, offsets = hull.equations[:, :-1], hull.equations[:, -1]
    if np.any(offsets >= 0):
        raise InputError("origin is not interior to the polytope")
    F = normals / (-offsets[:, None])
    keep = []
    for f in F:
        if not any(np.allclose(f, g, atol=1e-12) or np.allclose(f, -g, atol=1e-12) for g in keep):
            keep.append(f)
    return np.array(keep)


def facet_functionals(spec: NormSpec) -> Optional[np.ndarray]:
    """Rows f such that ``norm(x) = max_f |f . x|`` for polyhedral norms, else None."""
    if isinstance(spec, PolytopeV):
        return spec._facets
    if isinstance(spec, Lp) and spec.p == 1:
        n = spec.dim
        signs = np.array(np.meshgrid(*[[1.0, -1.0]] * (n - 1), indexing="ij")).reshape(n - 1, -1).T
        return np.hstack([np.ones((len(signs), 1)), signs]) if n > 1 else np.ones((1, 1))
    if isinstance(spec, Lp) and math.isinf(spec.p):
        return np.eye(spec.dim)
    return None


def unit_ball_vertices(spec: NormSpec) -> Optional[np.ndarray]:
    if isinstance(spec, PolytopeV):
        return np.array(spec.vertices, dtype=float)
    if isinstance(spec, Lp) and spec.p == 1:
        e = np.eye(spec.dim)
        return np.vstack([e, -e])
    if isinstance(spec, Lp) and math.isinf(spec.p):
        n = spec.dim
        return np.array(np.meshgrid(*[[1.0, -1.0]] * n, indexing="ij")).reshape(n, -1).T
    return None


def is_polyhedral(spec: NormSpec) -> bool:
    return facet_functionals(spec) is not None


def is_smooth_strictly_convex(spec: NormSpec) -> bool:
    if isinstance(spec, Smoothed):
        return True
    return isinstance(spec, Lp) and 1 < spec.p < math.inf


# ---------------------------------------------------------------------------
# evaluation


def norm_batch(spec: NormSpec, X) -> np.ndarray:
    """Vectorized float evaluation over the last axis of ``X``."""
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != spec.dim:
        raise InputError(f"dimension mismatch: expected {spec.dim}, got {X.shape[-1]}")
    if isinstance(spec, Lp):
        A = np.abs(X)
        if spec.p == 1:
            return A.sum(axis=-1)
        if spec.p == 2:
            return np.sqrt((X * X).sum(axis=-1))
        if math.isinf(spec.p):
            return A.max(axis=-1)
        m = A.max(axis=-1)
        safe = np.where(m > 0, m, 1.0)
        return m * ((A / safe[..., None]) ** spec.p).sum(axis=-1) ** (1.0 / spec.p)
    if isinstance(spec, PolytopeV):
        return np.abs(X @ spec._facets.T).max(axis=-1)
    if isinstance(spec, L1PlusL2):
        return np.abs(X[..., 0]) + np.sqrt((X[..., 1:] ** 2).sum(axis=-1))
    if isinstance(spec, Smoothed):
        if spec.mode == "identity":
            return norm_batch(spec.base, X)
        return _smoothed_batch(spec, X)
    raise InputError(f"unknown norm spec {spec!r}")


def _smoothed_batch(spec: Smoothed, X: np.ndarray) -> np.ndarray:
    A = np.abs(X @ spec.functionals.T)
    m = A.max(axis=-1)
    safe = np.where(m > 0, m, 1.0)
    with np.errstate(under="ignore"):
        s = ((A / safe[..., None]) ** spec.q * spec.weights).sum(axis=-1)
    nq = m * s ** (1.0 / spec.q)
    e = np.sqrt((X * X).sum(axis=-1)) / spec.radius
    return (1.0 - spec.theta) * nq + spec.theta * e


def norm_eval(spec: NormSpec, x: Sequence):
    """Norm of a single vector.

    Exact (``Fraction``) when ``x`` is rational and the norm is polyhedral
    (or an L1+L2 norm whose Euclidean part happens to be rational).
    """
    x = list(x)
    if len(x) != spec.dim:
        raise InputError(f"dimension mismatch: expected {spec.dim}, got {len(x)}")
    exact = all(rational.is_rational_like(v) for v in x)
    if exact:
        xq = rational.to_vector(x)
        if isinstance(spec, Lp) and spec.p == 1:
            return rational.l1(xq)
        if isinstance(spec, Lp) and math.isinf(spec.p):
            return max(abs(v) for v in xq)
        if isinstance(spec, PolytopeV):
            return polytope_gauge_exact(spec, xq)
        if isinstance(spec, L1PlusL2):
            root = rational.exact_sqrt(sum((v * v for v in xq[1:]), Fraction(0)))
            if root is not None:
                return abs(xq[0]) + root
    return float(norm_batch(spec, np.array([float(v) for v in x])))


def polytope_gauge_exact(spec: PolytopeV, x: Sequence[Fraction]) -> Fraction:
    """min lambda with x in lambda * conv(vertices), by exact LP."""
    if all(v == 0 for v in x):
        return Fraction(0)
    V = spec.vertices
    A = [[V[k][i] for k in range(len(V))] for i in range(spec.dim)]
    res = rational.linprog_exact([1] * len(V), A, list(x))
    if res.status != "optimal":
        raise SolverError(f"polytope gauge LP failed ({res.status}) at {x}")
    return res.value


# ---------------------------------------------------------------------------
# planar convex bodies


@dataclass(frozen=True)
class ConvexBodyOracle2D:
    """Planar convex body given by an interior point and a membership test.

    ``membership`` takes an array ``(..., 2)`` and returns booleans of shape
    ``(...)``.  When ``level`` is given the body is ``{level <= 1}`` and
    membership is derived from it.
    """

    interior_point: np.ndarray
    membership: Callable
    tolerance: float = DEFAULT_TOLERANCE
    level: Optional[Callable] = None
    max_radius: float = DEFAULT_MAX_RADIUS
    vectorized: bool = True

    def inside(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        if self.level is not None:
            return self.level(P) <= 1.0
        if self.vectorized:
            return np.asarray(self.membership(P), dtype=bool)
        flat = P.reshape(-1, 2)
        return np.array([bool(self.membership(p)) for p in flat]).reshape(P.shape[:-1])

    @classmethod
    def from_level(cls, level, interior_point, **kw) -> "ConvexBodyOracle2D":
        return cls(np.asarray(interior_point, float), lambda P: level(P) <= 1.0, level=level, **kw)

    @classmethod
    def unit_ball(cls, spec: NormSpec, **kw) -> "ConvexBodyOracle2D":
        if spec.dim != 2:
            raise InputError("unit_ball oracle needs a planar norm")
        return cls.from_level(lambda P: norm_batch(spec, P), np.zeros(2), **kw)


def exit_params(inside, X, V, scale=1.0, max_radius=DEFAULT_MAX_RADIUS, iterations=14, fan=16,
                level=None, rows=None, coarse=2):
    """Largest ``t >= 0`` with ``X + t V`` inside, for every ray at once.

    ``inside`` maps ``(..., d)`` points to booleans; the set of inside
    parameters along each ray must be an interval starting at 0.  Uses a
    ``fan``-ary search: each round shrinks the bracket by ``fan``.

    With a convex ``level`` function (body = ``{level <= 1}``) only
    ``coarse`` rounds are spent on the fan search; regula falsi on
    ``level - 1`` finishes the job.  ``level`` must act pointwise on
    ``(m, d)`` arrays, or, when ``rows`` is given, take ``(points, rows)``
    where ``rows`` holds the leading-axis index of every ray.
    """
    if level is not None and inside is None:
        inside = lambda P: level(P) <= 1.0
    if level is not None:
        iterations = coarse
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    shape = np.broadcast_shapes(X.shape, V.shape)
    X = np.broadcast_to(X, shape)
    V = np.broadcast_to(V, shape)
    speed = np.sqrt((V * V).sum(axis=-1))
    if np.any(speed == 0):
        raise InputError("direction must be nonzero")
    hi = np.broadcast_to(np.asarray(scale, float), shape[:-1]) / speed
    while True:
        still = inside(X + hi[..., None] * V)
        if not np.any(still):
            break
        hi = np.where(still, 2.0 * hi, hi)
        if np.any(hi * speed > max_radius):
            raise OracleError("body unbounded or oracle inconsistent")
    lo = np.zeros_like(hi)
    span = hi.copy()
    steps = np.arange(1, fan) / fan
    for _ in range(iterations):
        width = hi - lo
        ts = lo[..., None] + width[..., None] * steps
        ins = inside(X[..., None, :] + ts[..., None] * V[..., None, :])
        # index of first outside sample along each ray
        first_out = np.where(ins.all(axis=-1), fan - 1, np.argmin(ins, axis=-1))
        lo, hi = lo + width * first_out / fan, lo + width * (first_out + 1) / fan
    if level is None:
        return lo

    # from here on every ray is handled separately on flat arrays
    dim = shape[-1]
    Xf, Vf = X.reshape(-1, dim), V.reshape(-1, dim)
    lo, hi, span = lo.reshape(-1), hi.reshape(-1), span.reshape(-1)
    if rows is None:
        def f(idx, t):
            return level(Xf[idx] + t[:, None] * Vf[idx]) - 1.0
    else:
        rf = np.broadcast_to(np.asarray(rows), shape[:-1]).reshape(-1)

        def f(idx, t):
            return level(Xf[idx] + t[:, None] * Vf[idx], rf[idx]) - 1.0

    # Rays still at lo = 0 have chords shorter than the coarse grid: probe
    # geometrically towards 0 (the inside set is an interval [0, c]).
    short = np.flatnonzero(lo == 0)
    if short.size:
        ks = 16.0 ** -np.arange(1, 15)
        ts = hi[short, None] * ks
        ins = (f(np.repeat(short, ks.size), ts.reshape(-1)) <= 0).reshape(ts.shape)
        found = ins.any(axis=-1)
        k = np.argmax(ins, axis=-1)
        rng_ = np.arange(short.size)
        t_in = ts[rng_, k]
        t_out = np.where(k > 0, ts[rng_, np.maximum(k - 1, 0)], hi[short])
        lo[short] = np.where(found, t_in, 0.0)
        hi[short] = np.where(found, t_out, hi[short] * ks[-1])
    all_idx = np.arange(lo.size)
    # a ray starting on the boundary may report a hair above 1 at t = 0
    flo = np.minimum(f(all_idx, lo), 0.0)
    fhi = f(all_idx, hi)
    lo, _ = illinois(f, lo, hi, flo, fhi, xtol=1e-13 * span, ftol=1e-14)
    return lo.reshape(shape[:-1])


_FLAT_FAN = 32


def illinois(f, lo, hi, flo, fhi, xtol=0.0, ftol=-np.inf, fstop=-1.0, maxit=200):
    """Illinois (modified regula falsi) on flat arrays of brackets ``flo <= 0 < fhi``.

    ``f(idx, x)`` evaluates entries ``idx`` at ``x``; only unfinished entries
    are evaluated.  ``lo`` keeps the nonpositive side, so the result brackets
    the last point with ``f <= 0``.  Once ``f(lo) >= -ftol`` a short probe
    past ``lo`` tries to confirm the crossing; an entry whose probe lands
    inside (``f`` flat at 0 along an edge) switches to a k-ary search.
    Entries with ``|f(lo)| <= fstop`` are done outright.  Returns the final
    ``(lo, hi)``.
    """
    lo = np.array(lo, float)
    hi = np.array(hi, float)
    flo = np.array(flo, float)
    fhi = np.array(fhi, float)
    xtol = np.broadcast_to(np.asarray(xtol, float), lo.shape)
    true_lo, true_hi = flo.copy(), fhi.copy()  # flo/fhi get halved by the Illinois step
    last = np.zeros(lo.shape, dtype=np.int8)  # +1: hi moved last, -1: lo moved last
    misses = np.zeros(lo.shape, dtype=np.int8)
    for _ in range(maxit):
        idx = np.flatnonzero((hi - lo > xtol) & (np.abs(true_lo) > fstop))
        if idx.size == 0:
            break
        flat_all = misses[idx] >= 1
        if np.any(flat_all):
            # flat entries: k-ary search on the sublevel interval
            fi = idx[flat_all]
            wf = hi[fi] - lo[fi]
            ts = lo[fi, None] + wf[:, None] * (np.arange(1, _FLAT_FAN) / _FLAT_FAN)
            vals = f(np.repeat(fi, _FLAT_FAN - 1), ts.reshape(-1)).reshape(ts.shape)
            ins = vals <= 0
            first_out = np.where(ins.all(axis=1), _FLAT_FAN - 1, np.argmin(ins, axis=1))
            lo[fi] = lo[fi] + wf * first_out / _FLAT_FAN
            hi[fi] = lo[fi] + wf / _FLAT_FAN
            idx = idx[~flat_all]
            if idx.size == 0:
                continue
        l, h, fl, fh = lo[idx], hi[idx], flo[idx], fhi[idx]
        tl, th, ls = true_lo[idx], true_hi[idx], last[idx]
        width = h - l
        flat = np.zeros(idx.size, bool)
        with np.errstate(divide="ignore", invalid="ignore"):
            x = (l * fh - h * fl) / (fh - fl)
            slope = (th - tl) / width
            reach = np.where(slope > 0, -4 * tl / slope, 0.0)
        reach = np.where(np.isfinite(reach), reach, 0.0)
        ok = np.isfinite(x) & ((x - l) * (x - h) < 0) & ~flat
        x = np.where(ok, x, l + 0.5 * width)
        probe = ~flat & (tl >= -ftol)
        step = np.minimum(np.maximum(2 * xtol[idx], reach), 0.5 * width)
        x = np.where(probe, l + step, x)
        fx = f(idx, x)
        up = fx > 0
        down = ~up
        # a probe landing inside, or lo moving along f = const, means a plateau
        stalled = down & ~probe & (np.abs(fx - tl) <= 1e-15 * (1 + np.abs(tl)))
        misses[idx] += ((probe & down) | stalled).astype(np.int8)
        fl = np.where(up & (ls == 1), 0.5 * fl, fl)
        fh = np.where(down & (ls == -1), 0.5 * fh, fh)
        hi[idx] = np.where(up, x, h)
        fhi[idx] = np.where(up, fx, fh)
        true_hi[idx] = np.where(up, fx, th)
        lo[idx] = np.where(down, x, l)
        flo[idx] = np.where(down, fx, fl)
        true_lo[idx] = np.where(down, fx, tl)
        last[idx] = np.where(up, 1, -1)
    return lo, hi


def ray_to_boundary(body: ConvexBodyOracle2D, origin, direction) -> np.ndarray:
    """Boundary point hit by the ray ``origin + s * direction``, ``s >= 0``."""
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if not bool(body.inside(origin + 0 * origin)) and not _near_member(body, origin):
        raise InputError("ray origin is not a member of the body")
    s = exit_params(body.inside, origin, direction, max_radius=body.max_radius)
    return origin + float(s) * direction


def _near_member(body: ConvexBodyOracle2D, x) -> bool:
    """Membership within the body's tolerance (used for points on the boundary)."""
    c = np.asarray(body.interior_point, float)
    x = np.asarray(x, float)
    if bool(body.inside(x)):
        return True
    d = x - c
    if not np.any(d):
        return False
    s = float(exit_params(body.inside, c, d, max_radius=body.max_radius))
    return (1.0 - s) * math.sqrt(float(d @ d)) <= body.tolerance * max(1.0, math.sqrt(float(d @ d)))


def validate_body(body: ConvexBodyOracle2D, rng: np.random.Generator, pairs: int = 1000, combos: int = 5):
    """Sampled check of the oracle invariants; raises InputError on violation."""
    c = np.asarray(body.interior_point, float)
    ring = c + body.tolerance * np.stack(
        [np.cos(np.linspace(0, 2 * np.pi, 16)), np.sin(np.linspace(0, 2 * np.pi, 16))], axis=-1
    )
    if not np.all(body.inside(ring)):
        raise InputError("interior point has no margin inside the body")
    ang = rng.uniform(0, 2 * np.pi, size=2 * pairs)
    U = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    t = exit_params(body.inside, c, U, max_radius=body.max_radius)
    pts = c + (t * rng.uniform(0, 1, size=t.shape))[:, None] * U
    A, B = pts[:pairs], pts[pairs:]
    lam = rng.uniform(0, 1, size=(pairs, combos, 1))
    mix = lam * A[:, None, :] + (1 - lam) * B[:, None, :]
    if not np.all(body.inside(mix)):
        raise InputError("membership region failed the sampled convexity check")


# ---------------------------------------------------------------------------
# smoothing


@dataclass(frozen=True)
class SmoothingParams:
    epsilon: float
    anchor_tolerance: float = 1e-9
    sample_count: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.epsilon < 1):
            raise InputError("epsilon must lie strictly between 0 and 1")


def _supporting_functionals(spec: NormSpec, X: np.ndarray) -> np.ndarray:
    """Gradients of the norm at the rows of X (dual-unit supporting functionals)."""
    if isinstance(spec, L1PlusL2):
        rest = X[:, 1:]
        r = np.sqrt((rest**2).sum(axis=1, keepdims=True))
        return np.hstack([np.sign(X[:, :1]), rest / np.where(r > 0, r, 1.0)])
    if isinstance(spec, Lp) and 1 < spec.p < math.inf:
        N = norm_batch(spec, X)[:, None]
        return np.sign(X) * (np.abs(X) / N) ** (spec.p - 1)
    h = 1e-7
    n = X.shape[1]
    G = np.empty_like(X)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        G[:, i] = (norm_batch(spec, X + e) - norm_batch(spec, X - e)) / (2 * h)
    return G


def _base_geometry(spec: NormSpec, rng, n_samples: int):
    """(functionals, boundary points) describing the base unit ball."""
    F = facet_functionals(spec)
    V = unit_ball_vertices(spec)
    if F is not None:
        return F, np.vstack([V, -V])
    X = rng.normal(size=(n_samples, spec.dim))
    X /= norm_batch(spec, X)[:, None]
    return _supporting_functionals(spec, X), np.vstack([X, -X])


def _anchor_pairs(anchors) -> np.ndarray:
    out = []
    for a in anchors:
        a = np.asarray([float(v) for v in a])
        if not any(np.allclose(a, b, atol=1e-14) or np.allclose(a, -b, atol=1e-14) for b in out):
            out.append(a)
    return np.array(out)


def _tilted_functional(a, others, V, eta):
    """Functional h with h.a = 1, h <= 1 + eta on the base ball and
    |h.b| <= 1 - t on the other anchors, maximizing the margin t."""
    n = len(a)
    # variables (h, t); maximize t
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = [np.append(v, 0.0) for v in V]
    b_ub = [1.0 + eta] * len(V)
    for b in others:
        A_ub.append(np.append(b, 1.0))
        A_ub.append(np.append(-b, 1.0))
        b_ub += [1.0, 1.0]
    res = linprog(
        c,
        A_ub=np.array(A_ub),
        b_ub=np.array(b_ub),
        A_eq=np.append(a, 0.0)[None, :],
        b_eq=[1.0],
        bounds=[(None, None)] * n + [(None, 1.0)],
        method="highs",
    )
    if res.status != 0:
        raise SmoothingFailed(f"tilt LP failed for anchor {a}: {res.message}")
    return res.x[:n], res.x[-1]


def smooth_approx(spec: NormSpec, anchors, params: SmoothingParams) -> Smoothed:
    """Smooth strictly convex norm N0 within the two-sided ``epsilon`` sandwich
    of ``spec`` that keeps every anchor on its unit sphere.

    Construction (polyhedral or sampled base): every anchor gets its own
    supporting functional, tilted so that it separates the anchor from the
    other anchors; base facets are shrunk by ``1 - eps/4``.  A weighted
    l_q aggregate of these functionals is smooth, and a small Euclidean
    term makes it strictly convex.  Anchor weights solve a linear system in
    ``w`` (the q-th power is linear in the weights) so anchors land on the
    unit sphere up to round-off.
    """
    eps = params.epsilon
    rng = np.random.default_rng(params.seed)
    anchors = tuple(tuple(float(v) for v in a) for a in anchors)
    A = _anchor_pairs(anchors) if anchors else np.zeros((0, spec.dim))
    if len(A):
        if A.shape[1] != spec.dim:
            raise InputError("anchor dimension mismatch")
        vals = norm_batch(spec, A)
        bad = np.abs(vals - 1.0) > params.anchor_tolerance
        if np.any(bad):
            raise InputError(f"anchor {A[bad][0]} is not a unit vector (norm {vals[bad][0]!r})")

    if is_smooth_strictly_convex(spec):
        out = Smoothed(spec, eps, anchors, mode="identity")
        validate_smoothing(out, spec, params)
        return out

    G, V = _base_geometry(spec, rng, n_samples=400 * spec.dim**2)
    eta = eps / 4.0
    radius = float(np.sqrt((V * V).sum(axis=1)).max())

    H_anchor, margins = [], []
    for k, a in enumerate(A):
        others = np.delete(A, k, axis=0)
        h, t = _tilted_functional(a, others, V, eta)
        if t <= 1e-12:
            raise InputError(f"anchor {a} is not a vertex of the symmetric anchor polytope")
        H_anchor.append(h)
        margins.append(t)
    H_anchor = np.array(H_anchor).reshape(len(A), spec.dim)
    H = np.vstack([(1.0 - eta) * G, H_anchor])
    L = len(G) + len(A) + 2
    q = max(16.0 * math.log(L) / eps, 2.0)
    if margins:
        q = max(q, 6.0 * math.log(L) / min(margins))

    E = np.sqrt((A * A).sum(axis=1)) / radius if len(A) else np.zeros(0)
    for _ in range(8):
        # the Euclidean share is capped so the anchor lift gamma**q stays ~ L**2
        theta = min(eps / 8.0, 2.0 * math.log(L) / q)
        gamma = (1.0 - theta * E) / (1.0 - theta)
        with np.errstate(under="ignore"):
            facet_part = (np.abs(A @ ((1.0 - eta) * G).T) ** q).sum(axis=1) if len(A) else np.zeros(0)
            K = np.abs(A @ H_anchor.T) ** q if len(A) else np.zeros((0, 0))
        rhs = gamma**q - facet_part
        w_anchor = np.linalg.solve(K, rhs) if len(A) else np.zeros(0)
        weights = np.concatenate([np.ones(len(G)), w_anchor])
        total = weights.sum()
        if np.all(w_anchor > 0) and total ** (1.0 / q) <= 1.0 + eps / 2.0:
            break
        q *= 2.0
    else:
        raise SmoothingFailed("could not find positive anchor weights")

    out = Smoothed(
        spec, eps, anchors, mode="lq", functionals=H, weights=weights, q=q, theta=theta, radius=radius
    )
    validate_smoothing(out, spec, params)
    return out


def validate_smoothing(out: Smoothed, base: NormSpec, params: SmoothingParams) -> dict:
    """Sampled sandwich, anchor and strict-convexity audit; raises SmoothingFailed."""
    eps = out.epsilon
    rng = np.random.default_rng(params.seed + 1)
    n = base.dim
    X = rng.normal(size=(params.sample_count, n))
    A = np.array(out.anchors, dtype=float).reshape(-1, n)
    if len(A):
        near = A[rng.integers(len(A), size=min(len(X) // 4, 2000))]
        near = near + 1e-3 * rng.normal(size=near.shape)
        X = np.vstack([X, near])
    N = norm_batch(base, X)
    N0 = norm_batch(out, X)
    slack = 1e-12 * N
    low = (1 - eps) * N0 - N > slack
    high = N - (1 + eps) * N0 > slack
    if np.any(low | high):
        i = int(np.argmax(low | high))
        raise SmoothingFailed("smoothing failed: sandwich violated", sample=X[i].tolist())
    if len(A):
        dev = np.abs(norm_batch(out, A) - 1.0)
        if np.any(dev > params.anchor_tolerance):
            i = int(np.argmax(dev))
            raise SmoothingFailed(f"smoothing failed: anchor deviation {dev[i]:.3e}", sample=A[i].tolist())
    # strict convexity: chord midpoints of unit-sphere points are strictly inside
    P = rng.normal(size=(2000, n))
    P /= norm_batch(out, P)[:, None]
    Qp = rng.normal(size=(2000, n))
    Qp /= norm_batch(out, Qp)[:, None]
    mid = norm_batch(out, 0.5 * (P + Qp))
    chord = np.sqrt(((P - Qp) ** 2).sum(axis=1))
    ok = (mid < 1.0) | (chord < 1e-6)
    if not np.all(ok):
        i = int(np.argmin(ok))
        raise SmoothingFailed("smoothing failed: chord midpoint on the sphere", sample=P[i].tolist())
    return {"max_anchor_deviation": float(dev.max()) if len(A) else 0.0, "samples": int(len(X))}


# ---------------------------------------------------------------------------
# JSON


def _num_to_json(v):
    if isinstance(v, Fraction):
        return rational.fraction_str(v)
    return v


def spec_to_json(spec: NormSpec) -> dict:
    if isinstance(spec, Lp):
        return {"type": "lp", "p": "inf" if math.isinf(spec.p) else spec.p, "dim": spec.dim}
    if isinstance(spec, PolytopeV):
        return {
            "type": "polytope",
            "dim": spec.dim,
            "vertices": [[rational.fraction_str(c) for c in v] for v in spec.vertices],
        }
    if isinstance(spec, L1PlusL2):
        return {"type": "l1l2", "dim": spec.dim}
    if isinstance(spec, Smoothed):
        return {
            "type": "smoothed",
            "base": spec_to_json(spec.base),
            "epsilon": spec.epsilon,
            "anchors": [list(a) for a in spec.anchors],
        }
    raise InputError(f"unknown spec {spec!r}")


def _parse_number(v):
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "infinity"):
            return math.inf
        return rational.to_fraction(v)
    return v


def spec_from_json(data: dict) -> NormSpec:
    if not isinstance(data, dict) or "type" not in data:
        raise InputError("norm JSON must be an object with a 'type' field")
    kind = data["type"]
    try:
        if kind == "lp":
            p = _parse_number(data["p"])
            return Lp(float(p), int(data["dim"]))
        if kind == "polytope":
            verts = [rational.to_vector(v) for v in data["vertices"]]
            dim = int(data.get("dim", len(verts[0])))
            return PolytopeV(tuple(verts), dim)
        if kind == "l1l2":
            return L1PlusL2(int(data["dim"]))
        if kind == "smoothed":
            base = spec_from_json(data["base"])
            anchors = [[float(_parse_number(c)) for c in a] for a in data.get("anchors", [])]
            eps = float(_parse_number(data["epsilon"]))
            return smooth_approx(base, anchors, SmoothingParams(eps, sample_count=int(data.get("sample_count", 2000))))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed norm JSON: {exc}") from None
    raise InputError(f"unknown norm type {kind!r}")
