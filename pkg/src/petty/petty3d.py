"""Extension of an equilateral triangle in a three-dimensional normed space.

Planes parallel to the triangle's plane cut the unit ball into planar
sections.  In every section we inscribe a homothet ``z + r * {a, b, c}`` of
the triangle; where ``r = 1`` the point ``d = -(z + t v)`` lies at distance
one from all three vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import optimize

from .errors import (
    InputError,
    SectionTrivial,
    SmoothingFailed,
    SolverError,
    SweepBracketFailure,
)
from .norms import (
    ConvexBodyOracle2D,
    NormSpec,
    SmoothingParams,
    exit_params,
    facet_functionals,
    illinois,
    is_smooth_strictly_convex,
    norm_batch,
    smooth_approx,
)
from .planar import DEFAULT_TOL, _inscribe_batch

GRID_SIZE = 64
SMOOTHING_LEVELS = (2, 4, 8, 16, 32, 64, 128, 256)


# ---------------------------------------------------------------------------
# records


@dataclass
class SectionRecord:
    t: float
    z: np.ndarray
    r: float
    residual: float


@dataclass
class SectionSweep:
    norm: NormSpec
    v: np.ndarray
    t_lo: float
    t_hi: float
    samples: List[SectionRecord]
    central: Optional[SectionRecord] = None
    gaps: List[float] = field(default_factory=list)
    lipschitz: float = float("nan")
    basis: Optional[np.ndarray] = field(default=None, repr=False)

    def profile(self):
        """Arrays ``(t, r)`` of the successful samples."""
        return (np.array([s.t for s in self.samples]), np.array([s.r for s in self.samples]))


@dataclass
class ExtensionResult:
    d: np.ndarray
    deviations: np.ndarray
    method: str  # "direct" or "smoothing"
    t: float = float("nan")
    sweep: Optional[SectionSweep] = field(default=None, repr=False)
    history: list = field(default_factory=list, repr=False)

    @property
    def max_deviation(self) -> float:
        return float(np.max(self.deviations))


# ---------------------------------------------------------------------------
# geometry of the sweep


def plane_basis(v) -> np.ndarray:
    """Rows: an orthonormal basis of the plane orthogonal to ``v``."""
    v = np.asarray(v, float)
    v = v / np.linalg.norm(v)
    k = int(np.argmin(np.abs(v)))
    e = np.zeros(3)
    e[k] = 1.0
    u1 = e - (e @ v) * v
    u1 /= np.linalg.norm(u1)
    return np.array([u1, np.cross(v, u1)])


@dataclass
class _Frame:
    """Triangle moved to its centroid, scaled to unit side, in plane coordinates."""

    shift: np.ndarray
    p: float
    E: np.ndarray  # (2, 3)
    v: np.ndarray
    P: np.ndarray  # (3, 2) planar coordinates of the scaled triangle

    @classmethod
    def build(cls, norm: NormSpec, a, b, c, tol: float):
        pts = np.array([a, b, c], dtype=float)
        if pts.shape != (3, 3):
            raise InputError("points must be three 3-vectors")
        if norm.dim != 3:
            raise InputError("petty_extend needs a norm on R^3")
        d = norm_batch(norm, np.array([pts[0] - pts[1], pts[1] - pts[2], pts[2] - pts[0]]))
        p = float(d.mean())
        if p <= 0 or np.max(np.abs(d - p)) > max(10 * tol, 1e-9) * p:
            raise InputError(f"points are not equilateral (distances {d.tolist()})")
        shift = pts.mean(axis=0)
        Q = (pts - shift) / p
        e1 = Q[1] - Q[0]
        e1 /= np.linalg.norm(e1)
        e2 = Q[2] - Q[0] - ((Q[2] - Q[0]) @ e1) * e1
        e2 /= np.linalg.norm(e2)
        E = np.array([e1, e2])
        v = np.cross(e1, e2)
        return cls(shift, p, E, v, Q @ E.T)

    def lift(self, z, t) -> np.ndarray:
        """Extension point in original coordinates from a unit-scale (z, t)."""
        return self.shift - self.p * (np.asarray(z) @ self.E + t * self.v)


def _min_norm_offset(norm: NormSpec, E, v):
    """``q0`` minimising ``||v + q0 E||``; returns (q0, t_max = 1/min)."""
    F = facet_functionals(norm)
    if F is not None:
        # min s subject to |f.(v + qE)| <= s
        G = F @ E.T
        h = F @ v
        A = np.vstack([np.column_stack([G, -np.ones(len(F))]), np.column_stack([-G, -np.ones(len(F))])])
        bnd = np.concatenate([-h, h])
        res = optimize.linprog([0, 0, 1], A_ub=A, b_ub=bnd, bounds=[(None, None)] * 3, method="highs")
        if res.status == 0:
            q0 = res.x[:2]
            return q0, 1.0 / float(norm_batch(norm, v + q0 @ E))
    f = lambda q: float(norm_batch(norm, v + np.asarray(q) @ E))
    best = optimize.minimize(f, np.zeros(2), method="Nelder-Mead",
                             options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
    q0 = best.x
    return q0, 1.0 / f(q0)


class _SectionBatch:
    """Batch of planar sections ``{q : ||q E + t v|| <= 1}`` for an array of t."""

    def __init__(self, norm, E, v, ts, centers=None, scale=None, max_radius=1e6):
        self.norm = norm
        self.E = E
        self.v = v
        self.ts = np.asarray(ts, float)
        self.centers = centers
        self.scale = scale
        self.max_radius = max_radius

    def level(self, Q):
        Q = np.asarray(Q, float)
        ts = self.ts.reshape(self.ts.shape + (1,) * (Q.ndim - 2))
        return norm_batch(self.norm, Q @ self.E + ts[..., None] * self.v)

    def level_rows(self, P, rows):
        return norm_batch(self.norm, P @ self.E + self.ts[rows][:, None] * self.v)

    def inside(self, Q):
        return self.level(Q) <= 1.0

    def take(self, idx):
        idx = np.asarray(idx)
        return _SectionBatch(self.norm, self.E, self.v, self.ts[idx], self.centers[idx],
                             self.scale[idx], self.max_radius)

    def locate(self, q0, width, rounds=2):
        """Interior points by chord-midpoint (centroid) probing, plus a width scale."""
        C = self.ts[:, None] * q0[None, :]
        self.scale = np.full(len(self.ts), float(width))
        ang = np.linspace(0, np.pi, 6, endpoint=False)
        U = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        for _ in range(rounds):
            X = np.broadcast_to(C[:, None, :], (len(C), len(U), 2))
            rows = np.arange(len(C))[:, None]
            fwd = exit_params(self.inside, X, U, scale=self.scale[:, None], level=self.level_rows, rows=rows)
            bwd = exit_params(self.inside, X, -U, scale=self.scale[:, None], level=self.level_rows, rows=rows)
            mids = C[:, None, :] + (0.5 * (fwd - bwd))[..., None] * U
            C = mids.mean(axis=1)
            self.scale = np.maximum((fwd + bwd).max(axis=1), 1e-300)
        self.centers = C
        return self


def _ball_extent(norm: NormSpec) -> float:
    rng = np.random.default_rng(12345)
    U = rng.normal(size=(512, 3))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    return float(np.max(1.0 / norm_batch(norm, U)))


def section_body(norm: NormSpec, v, t: float, basis=None) -> ConvexBodyOracle2D:
    """Planar oracle for ``{q : ||q E + t v|| <= 1}`` with ``E`` a basis orthogonal to ``v``."""
    if norm.dim != 3:
        raise InputError("section_body needs a norm on R^3")
    v = np.asarray(v, float)
    if not np.isclose(np.linalg.norm(v), 1.0, atol=1e-12):
        raise InputError("v must be a unit vector")
    E = plane_basis(v) if basis is None else np.asarray(basis, float)
    q0, t_max = _min_norm_offset(norm, E, v)
    if abs(t) >= t_max * (1 - 1e-12):
        raise SectionTrivial(f"section at t={t} has at most one point", t_bounds=(-t_max, t_max))
    batch = _SectionBatch(norm, E, v, [t]).locate(q0, 2 * _ball_extent(norm))
    level = lambda Q: norm_batch(norm, np.asarray(Q, float) @ E + t * v)
    return ConvexBodyOracle2D.from_level(level, batch.centers[0])


# ---------------------------------------------------------------------------
# the sweep


def _solve_sections(frame: _Frame, norm, ts, q0, width, tol, samples=256):
    """Inscribe the triangle in every section; returns a list (z, r, residual) or None."""
    batch = _SectionBatch(norm, frame.E, frame.v, ts).locate(q0, width)
    sols = _inscribe_batch(batch, frame.P, tol, 0, None, samples)
    missing = [i for i, s in enumerate(sols) if s is None]
    for k in (1, 2):
        if not missing:
            break
        sub = batch.take(missing)
        extra = _inscribe_batch(sub, frame.P, tol, k, None, samples)
        for i, s in zip(missing, extra):
            sols[i] = s
        missing = [i for i, s in enumerate(sols) if s is None]
    return sols


def _sweep(frame: _Frame, norm, grid_size, tol, max_gap_fraction=0.25) -> SectionSweep:
    q0, t_max = _min_norm_offset(norm, frame.E, frame.v)
    width = 2 * _ball_extent(norm)
    h = 2 * t_max / grid_size
    ts = -t_max + h * (np.arange(grid_size) + 0.5)
    ts = np.concatenate([ts, [0.0]])
    sols = _solve_sections(frame, norm, ts, q0, width, tol)
    records, gaps = [], []
    for t, s in zip(ts[:-1], sols[:-1]):
        if s is None:
            gaps.append(float(t))
        else:
            records.append(SectionRecord(float(t), s.z, s.r, float(s.residuals.max())))
    c = sols[-1]
    central = None if c is None else SectionRecord(0.0, c.z, c.r, float(c.residuals.max()))
    if len(gaps) > max_gap_fraction * grid_size:
        raise SolverError(f"sweep failed at {len(gaps)} of {grid_size} sections")
    tr = np.array([[s.t, s.r] for s in records])
    lip = float(np.max(np.abs(np.diff(tr[:, 1]) / np.diff(tr[:, 0])))) if len(tr) > 1 else float("nan")
    return SectionSweep(norm, frame.v, -t_max, t_max, records, central, gaps, lip, frame.E)


def sweep_r(norm: NormSpec, a, b, c, grid_size: int = GRID_SIZE, tol: float = DEFAULT_TOL) -> SectionSweep:
    """Sample ``r(t)`` on a uniform grid of sections of the unit ball.

    Coordinates are those of the triangle moved to its centroid and scaled
    to unit side; the plane through the origin is the central section.
    """
    frame = _Frame.build(norm, a, b, c, tol)
    return _sweep(frame, norm, grid_size, tol)


# ---------------------------------------------------------------------------
# locating r(t) = 1


def _brackets(sweep: SectionSweep):
    """Up to two brackets of r = 1: first crossing above and below the central section."""
    recs = sorted(sweep.samples + ([sweep.central] if sweep.central else []), key=lambda s: s.t)
    t = np.array([s.t for s in recs])
    g = np.array([s.r for s in recs]) - 1.0
    k0 = int(np.argmin(np.abs(t)))
    out = []
    for direction in (1, -1):
        k = k0
        while 0 <= k + direction < len(t):
            j = k + direction
            if g[k] >= 0 > g[j]:
                out.append((recs[k], recs[j]))
                break
            k = j
    return out


def _refine_t(frame, norm, pairs, q0, width, tol, xtol=1e-12):
    """Illinois on ``r(t) - 1`` for several brackets at once; returns records at the roots."""
    t_in = np.array([a.t for a, _ in pairs])  # r >= 1 side
    t_out = np.array([b.t for _, b in pairs])
    span = t_out - t_in
    cache = {}

    def F(idx, u):
        ts = t_in[idx] + u * span[idx]
        sols = _solve_sections(frame, norm, ts, q0, width, tol)
        vals = np.empty(len(idx))
        for j, (i, t, s) in enumerate(zip(idx, ts, sols)):
            if s is None:
                # a gap counts as the r < 1 side; the bracket's r >= 1 end
                # always holds a valid record and the polish decides
                vals[j] = 1.0
                continue
            cache[(int(i), float(u[j]))] = s
            vals[j] = 1.0 - s.r
        return vals

    n = len(pairs)
    flo = np.array([1.0 - a.r for a, _ in pairs])
    fhi = np.array([1.0 - b.r for _, b in pairs])
    for i, (a, _) in enumerate(pairs):
        cache[(i, 0.0)] = a
    u, _ = illinois(F, np.zeros(n), np.ones(n), flo, fhi, xtol=xtol / np.abs(span), fstop=1e-13)
    out = []
    for i in range(n):
        s = cache.get((i, float(u[i])))
        t = float(t_in[i] + u[i] * span[i])
        if isinstance(s, SectionRecord):
            out.append(s)
        else:
            out.append(SectionRecord(t, s.z, s.r, float(s.residuals.max())))
    return out


# ---------------------------------------------------------------------------
# polishing the extension point


def _deviations(norm, pts, d, p):
    return np.abs(norm_batch(norm, d[None, :] - pts) - p)


def _polish_smooth(norm, pts, d0, p):
    fun = lambda d: norm_batch(norm, d[None, :] - pts) / p - 1.0
    try:
        res = optimize.least_squares(fun, d0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200,
                                     x_scale=p)
        return res.x
    except (ValueError, np.linalg.LinAlgError):
        return d0


def _polish_polyhedral(F, pts, d0, p, radius=None):
    """Exact-active-set polish for ``||x|| = max |F x|``.

    For every point pick a candidate facet (and sign) attaining its norm at
    ``d0``; an LP pushes the three chosen facet values to ``p`` while
    keeping all facet values at most ``p``.  The best candidate is cleaned
    up by solving the 3x3 active system.
    """
    from itertools import product

    radius = 0.25 * p if radius is None else radius
    D0 = d0[None, :] - pts  # (3, 3)
    vals = D0 @ F.T  # (3, m)
    best = (np.inf, d0)
    for slack in (1e-9, 1e-3, 3e-2, 1e-1):
        cands = []
        for i in range(3):
            top = np.max(np.abs(vals[i]))
            js = np.flatnonzero(np.abs(vals[i]) >= top - slack * p)
            cands.append([(j, 1.0 if vals[i, j] >= 0 else -1.0) for j in js][:6])
        combos = list(product(*cands))
        if len(combos) > 216:
            combos = combos[:216]
        for combo in combos:
            rows = np.array([s * F[j] for j, s in combo])
            # maximize sum rows_i . (d - x_i) subject to |F (d - x_i)| <= p and a box
            c = -rows.sum(axis=0)
            A = np.vstack([np.vstack([F, -F]) for _ in range(3)])
            b = np.concatenate([np.concatenate([p + F @ x, p - F @ x]) for x in pts])
            bounds = [(d0[k] - radius, d0[k] + radius) for k in range(3)]
            res = optimize.linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
            if res.status != 0:
                continue
            d = res.x
            # exact solve of the active system when it is regular
            M = rows
            rhs = p + np.einsum("ij,ij->i", rows, pts)
            if abs(np.linalg.det(M)) > 1e-12:
                d_exact = np.linalg.solve(M, rhs)
                if np.max(_facet_dev(F, pts, d_exact, p)) <= np.max(_facet_dev(F, pts, d, p)):
                    d = d_exact
            dev = float(np.max(_facet_dev(F, pts, d, p)))
            if dev < best[0]:
                best = (dev, d)
            if dev <= 1e-12 * p:
                return d
        if best[0] <= 1e-9 * p:
            return best[1]
    return best[1]


def _facet_dev(F, pts, d, p):
    return np.abs(np.abs((d[None, :] - pts) @ F.T).max(axis=1) - p)


def _polish(norm, pts, d0, p):
    F = facet_functionals(norm)
    if F is not None:
        return _polish_polyhedral(F, pts, d0, p)
    return _polish_smooth(norm, pts, d0, p)


# ---------------------------------------------------------------------------
# public entry point


def _direct(frame, norm, pts, tol, grid_size):
    sweep = _sweep(frame, norm, grid_size, tol)
    pairs = _brackets(sweep)
    if not pairs:
        raise SweepBracketFailure("no bracket with r >= 1 on one side and r < 1 on the other", sweep=sweep)
    q0, _ = _min_norm_offset(norm, frame.E, frame.v)
    roots = _refine_t(frame, norm, pairs, q0, 2 * _ball_extent(norm), tol)
    cands = []
    for rec in roots:
        d = _polish(norm, pts, frame.lift(rec.z, rec.t), frame.p)
        cands.append((float(np.max(_deviations(norm, pts, d, frame.p))), d, rec))
    cands.sort(key=lambda c: c[0])
    return sweep, cands


def petty_extend(norm: NormSpec, a, b, c, tol: float = 1e-6, mode: str = "auto",
                 grid_size: int = GRID_SIZE, levels=SMOOTHING_LEVELS) -> ExtensionResult:
    """Point ``d`` with ``||d - a|| = ||d - b|| = ||d - c|| = p`` up to ``tol * p``.

    ``mode``: ``"direct"`` sweeps the given norm, ``"smoothing"`` runs the
    sweep on smooth approximations with ``eps = 1/k`` and polishes the
    accumulation point in the original norm, ``"auto"`` tries direct first
    and falls back to smoothing for norms that are not smooth and strictly
    convex.
    """
    if mode not in ("auto", "direct", "smoothing"):
        raise InputError(f"unknown mode {mode!r}")
    frame = _Frame.build(norm, a, b, c, DEFAULT_TOL)
    pts = np.array([a, b, c], dtype=float)
    p = frame.p
    smooth = is_smooth_strictly_convex(norm)
    if mode in ("auto", "direct"):
        try:
            sweep, cands = _direct(frame, norm, pts, DEFAULT_TOL, grid_size)
            dev, d, rec = cands[0]
            if dev <= tol * p:
                return ExtensionResult(d, _deviations(norm, pts, d, p), "direct", rec.t, sweep)
            if mode == "direct" or smooth:
                raise SweepBracketFailure(f"best extension deviates by {dev / p:.3g} p", sweep=sweep)
        except SweepBracketFailure:
            if mode == "direct" or smooth:
                raise
        except SolverError:
            if mode == "direct":
                raise
    return _smoothing_sequence(frame, norm, pts, tol, grid_size, levels)


def _smoothing_sequence(frame, norm, pts, tol, grid_size, levels):
    p = frame.p
    anchors = []
    for u in (pts[0] - pts[1], pts[1] - pts[2], pts[2] - pts[0]):
        anchors.append(u / float(norm_batch(norm, u)))
    history = []
    d = None
    sweep = None
    t_star = float("nan")
    for k in levels:
        sm = smooth_approx(norm, anchors, SmoothingParams(1.0 / k))
        d_k = None
        central = None
        if d is not None:
            guess = _polish_smooth(sm, pts, d, p)
            if np.max(_deviations(sm, pts, guess, p)) <= 1e-9 * p:
                d_k = guess
        if d_k is None:
            fr = _Frame.build(sm, *pts, DEFAULT_TOL)
            sweep, cands = _direct(fr, sm, pts, DEFAULT_TOL, grid_size)
            if d is not None:
                # stay on the branch we are following
                cands.sort(key=lambda c: (c[0] > 1e-9 * p, np.linalg.norm(c[1] - d)))
            dev, d_k, rec = cands[0]
            t_star = rec.t
            central = sweep.central.r if sweep.central is not None else None
        dev_s = float(np.max(_deviations(sm, pts, d_k, p)))
        dev_o = float(np.max(_deviations(norm, pts, d_k, p)))
        history.append({"k": k, "d": d_k.tolist(), "dev_smoothed": dev_s / p, "dev_original": dev_o / p,
                        "central_r": central})
        d = d_k
    final = _polish(norm, pts, d, p)
    devs = _deviations(norm, pts, final, p)
    if np.max(devs) > tol * p:
        raise SmoothingFailed(
            f"smoothing sequence did not converge: deviation {np.max(devs) / p:.3g} p after k={levels[-1]}",
            sample=history,
        )
    return ExtensionResult(final, devs, "smoothing", t_star, sweep, history)
