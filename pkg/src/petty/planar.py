"""Planar solvers: the boundary-extent function, circumcircles of equilateral
triples in arbitrary norms, and inscribed homothets of triangles.

The homothet search follows the intermediate-value argument: walk a point
``x`` along the boundary, shoot rays from ``x`` along the two triangle
edges leaving the base vertex, and look for the place where both rays exit
the body at the same parameter ``r``.  Then ``x``, ``x + r*e1``,
``x + r*e2`` is an inscribed homothet.

Internally everything runs on *batches* of bodies so that a section sweep can
scan all its sections in one pass.  A batch needs ``centers`` (B, 2),
``scale`` (B,), ``inside(Q)`` for points of shape (B, ..., 2) and
``take(idx)``; an optional ``level`` (body = ``{level <= 1}``) enables the
faster exit search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BracketNotFound, InputError, NoInscribedHomothet
from .norms import ConvexBodyOracle2D, NormSpec, _near_member, exit_params, illinois, norm_batch

DEFAULT_TOL = 1e-9
ARC_SAMPLES = 256


@dataclass(frozen=True)
class Triangle2D:
    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    degeneracy: float = 1e-12

    def __post_init__(self):
        P = np.array([self.p0, self.p1, self.p2], dtype=float)
        if P.shape != (3, 2):
            raise InputError("triangle vertices must be 2-vectors")
        spread = float(np.ptp(P)) or 1.0
        u, w = P[1] - P[0], P[2] - P[0]
        area2 = abs(u[0] * w[1] - u[1] * w[0])
        if area2 <= self.degeneracy * spread**2:
            raise InputError("degenerate triangle")
        for name, row in zip(("p0", "p1", "p2"), P):
            object.__setattr__(self, name, row)

    @property
    def vertices(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p2])


@dataclass
class HomothetSolution:
    z: np.ndarray
    r: float
    residuals: np.ndarray
    angle: float = float("nan")
    base_vertex: int = 0

    def points(self, tri: Triangle2D) -> np.ndarray:
        return self.z + self.r * tri.vertices


@dataclass
class Circumcircle:
    center: np.ndarray
    radius: float
    deviation: float
    homothet: Optional[HomothetSolution] = field(default=None, repr=False)


# ---------------------------------------------------------------------------
# batches


class _OracleBatch:
    def __init__(self, body: ConvexBodyOracle2D, centers=None, scale=None):
        self.body = body
        c = np.asarray(body.interior_point, float)
        self.centers = np.atleast_2d(c) if centers is None else centers
        if scale is None:
            ang = np.linspace(0, 2 * np.pi, 16, endpoint=False)
            U = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
            t = exit_params(body.inside, c, U, max_radius=body.max_radius)
            scale = np.array([float(np.max(t[:8] + t[8:]))])
        self.scale = scale
        self.max_radius = body.max_radius
        self.level = body.level

    def inside(self, Q):
        return self.body.inside(Q)

    def take(self, idx):
        idx = np.asarray(idx)
        return _OracleBatch(self.body, self.centers[idx], self.scale[idx])


def _bshape(a, ndim):
    return a.reshape(a.shape + (1,) * (ndim - a.ndim))


def _exits(batch, X, V):
    """Exit parameters for rays from X (B, ..., 2) along V (broadcastable)."""
    X = np.asarray(X, float)
    nrays = X[..., 0].size
    fan = 16 if nrays <= 4096 else 4
    iters = int(math.ceil(56 / math.log2(fan)))
    scale = _bshape(batch.scale, X.ndim - 1)
    scale = np.broadcast_to(scale, X.shape[:-1])
    V = np.broadcast_to(np.asarray(V, float), X.shape)
    speed = np.sqrt((V * V).sum(axis=-1))
    level = getattr(batch, "level_rows", None)
    rows = None
    if level is not None:
        rows = np.arange(X.shape[0]).reshape((-1,) + (1,) * (X.ndim - 2))
    else:
        level = getattr(batch, "level", None)
    return exit_params(batch.inside, X, V, scale=scale * speed, max_radius=batch.max_radius,
                       iterations=iters, fan=fan, level=level, rows=rows)


def _boundary(batch, phi):
    """Boundary points at angles phi (B, K) seen from each body's center."""
    U = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    C = _bshape(batch.centers, phi.ndim + 1)
    C = batch.centers.reshape((batch.centers.shape[0],) + (1,) * (phi.ndim - 1) + (2,))
    t = _exits(batch, np.broadcast_to(C, U.shape), U)
    return C + t[..., None] * U


def _probe(batch, phi, e1, e2):
    X = _boundary(batch, phi)
    g1 = _exits(batch, X, e1)
    g2 = _exits(batch, X, e2)
    return X, g1, g2


def _residuals(batch, Y):
    """Euclidean distance of points Y (B, k, 2) to the boundary along the ray from the center."""
    C = batch.centers[:, None, :]
    D = Y - C
    t = _exits(batch, np.broadcast_to(C, Y.shape), D)
    return np.abs(1.0 - t) * np.sqrt((D * D).sum(axis=-1))


def _kary_boundary(batch, lo, hi, predicate, e1, e2, width_tol=1e-13, fan=32):
    """Bracket the last point where ``predicate`` holds on [lo, hi], per row.

    ``predicate`` is true at ``lo`` and false at ``hi``; brackets may run
    in either direction.  Returns the final ``(lo, hi)``.
    """
    lo = lo.copy()
    hi = hi.copy()
    steps = np.arange(1, fan) / fan
    while np.max(np.abs(hi - lo)) > width_tol:
        w = hi - lo
        phi = lo[:, None] + w[:, None] * steps
        _, g1, g2 = _probe(batch, phi, e1, e2)
        ok = predicate(g1, g2)
        first_bad = np.where(ok.all(axis=1), fan - 1, np.argmin(ok, axis=1))
        lo, hi = lo + w * first_bad / fan, lo + w * (first_bad + 1) / fan
    return lo, hi


def _refine_angles(sub, lo, hi, sg, zt, e1, e2, coarse_tol=1e-4, fine_tol=1e-13):
    """Locate the sign change of ``h = g2 - g1`` in every bracket ``[lo, hi]``.

    ``sg`` is the sign of ``h`` at ``lo``.  Two k-ary searches track the end
    of the strictly signed region and the end of the zero band.  When no
    band is visible at ``coarse_tol`` regula falsi finishes the crossing;
    otherwise both ends are refined and the band midpoint is returned.
    Also returns the final bracket ends: when ``h`` jumps across zero (a
    vertex of a polygon) only one side of the jump is an actual solution.
    """
    R = len(lo)
    sg2 = np.concatenate([sg, sg])[:, None]
    zt2 = np.concatenate([zt, zt])[:, None]
    flag = np.concatenate([np.zeros(R), np.ones(R)])[:, None]

    def make_pred(sel):
        s_, z_, f_ = sg2[sel], zt2[sel], flag[sel]

        def pred(g1, g2):
            v = s_ * (g2 - g1)
            return np.where(f_ == 0, v > z_, v >= -z_)

        return pred

    pair = np.concatenate([np.arange(R), np.arange(R)])
    sub2 = sub.take(pair)
    w0 = float(np.max(np.abs(hi - lo)))
    L, H = _kary_boundary(sub2, np.concatenate([lo, lo]), np.concatenate([hi, hi]),
                          make_pred(np.arange(2 * R)), e1, e2, width_tol=coarse_tol * w0, fan=16)
    ls, hs, lb, hb = L[:R], H[:R], L[R:], H[R:]
    cell = np.abs(hs - ls)
    mid = 0.5 * (ls + lb)
    left, right = ls.copy(), hb.copy()
    # [ls, hb] carries a strict sign change; it is short unless a band sits inside
    crisp = np.abs(hb - ls) <= 2 * cell * (1 + 1e-9)
    ci = np.flatnonzero(crisp)
    if ci.size:
        base, span = ls[ci], hb[ci] - ls[ci]
        sub_c = sub.take(ci)
        s_c = sg[ci]

        def F(idx, u):
            _, u1, u2 = _probe(sub_c.take(idx), (base[idx] + u * span[idx])[:, None], e1, e2)
            return -s_c[idx] * (u2[:, 0] - u1[:, 0])

        every = np.arange(ci.size)
        u, uh = illinois(F, np.zeros(ci.size), np.ones(ci.size), F(every, np.zeros(ci.size)),
                         F(every, np.ones(ci.size)), xtol=1e-15 * w0 / np.abs(span),
                         fstop=1e-14 * float(np.max(sub.scale)))
        mid[ci] = base + u * span
        left[ci], right[ci] = mid[ci], base + uh * span
    bi = np.flatnonzero(~crisp)
    if bi.size:
        sel = np.concatenate([bi, R + bi])
        L2, _ = _kary_boundary(sub2.take(sel), L[sel], H[sel], make_pred(sel), e1, e2, width_tol=fine_tol)
        mid[bi] = 0.5 * (L2[: bi.size] + L2[bi.size:])
        left[bi], right[bi] = L2[: bi.size], L2[bi.size:]
    return mid, left, right


def _inscribe_batch(batch, P, tol=DEFAULT_TOL, base_vertex=0, arcs=None, samples=ARC_SAMPLES):
    """Inscribe the triangle P (3, 2) in every body of the batch.

    Returns a list with one HomothetSolution (or None) per body.
    """
    B = batch.centers.shape[0]
    b = base_vertex % 3
    e1 = P[(b + 1) % 3] - P[b]
    e2 = P[(b + 2) % 3] - P[b]
    if arcs is None:
        phi = np.broadcast_to(np.linspace(0, 2 * np.pi, samples, endpoint=False), (B, samples))
        closed = True
    else:
        arcs = np.atleast_2d(np.asarray(arcs, float))
        phi = np.linspace(arcs[:, 0], arcs[:, 1], samples, axis=-1)
        closed = False
    X, g1, g2 = _probe(batch, phi, e1, e2)
    scale = batch.scale[:, None]
    ztol = 1e-12 * scale
    rmin = 1e-9 * scale
    h = g2 - g1
    sgn = np.where(np.abs(h) <= ztol, 0, np.sign(h)).astype(int)
    live = np.minimum(g1, g2) > rmin

    rows, los, his, signs = [], [], [], []
    zero_only = []
    for i in range(B):
        idx = np.flatnonzero(live[i])
        if idx.size == 0:
            continue
        seq = [(k, sgn[i, k]) for k in idx]
        if closed:
            seq = seq + [(k + samples, s) for k, s in seq]
        last = None
        for k, s in seq:
            if s == 0:
                continue
            if last is not None and last[1] == -s:
                ka, kb = last[0], k
                between = np.arange(ka + 1, kb) % samples
                if (not closed or ka < samples) and live[i, between].all():
                    # a dead stretch between the endpoints is no IVT bracket
                    rows.append(i)
                    step = (2 * np.pi / samples) if closed else (phi[i, 1] - phi[i, 0])
                    base = phi[i, 0]
                    los.append(base + ka * step)
                    his.append(base + kb * step)
                    signs.append(last[1])
            last = (k, s)
        if sgn[i, idx].min() == 0 and sgn[i, idx].max() == 0:
            zero_only.append(i)
        elif not closed and (sgn[i, idx[0]] == 0 or sgn[i, idx[-1]] == 0):
            zero_only.append(i)

    cand_rows, cand_phi, group = [], [], []
    if rows:
        rows_a = np.array(rows)
        found = _refine_angles(batch.take(rows_a), np.array(los), np.array(his),
                               np.array(signs, float), ztol[rows_a, 0], e1, e2)
        for k, i in enumerate(rows):
            for ph in found:
                cand_rows.append(i)
                cand_phi.append(float(ph[k]))
                group.append(k)
    for i in zero_only:
        ks = np.flatnonzero(live[i] & (sgn[i] == 0))
        cand_rows.append(i)
        cand_phi.append(float(0.5 * (phi[i, ks[0]] + phi[i, ks[-1]])))
        group.append(len(rows) + len(group))

    out: list = [None] * B
    if not cand_rows:
        return out
    cr = np.array(cand_rows)
    sub = batch.take(cr)
    cphi = np.array(cand_phi)[:, None]
    Xc, c1, c2 = _probe(sub, cphi, e1, e2)
    r = 0.5 * (c1[:, 0] + c2[:, 0])
    z = Xc[:, 0, :] - r[:, None] * P[b]
    Y = z[:, None, :] + r[:, None, None] * P[None, :, :]
    res = _residuals(sub, Y)
    # one candidate per bracket: the best of its midpoint and two ends
    best = {}
    for j, gk in enumerate(group):
        if gk not in best or res[j].max() < res[best[gk]].max():
            best[gk] = j
    for j in sorted(best.values()):
        i = cand_rows[j]
        if r[j] <= rmin[i, 0] or res[j].max() > tol * max(1.0, batch.scale[i]):
            continue
        sol = HomothetSolution(z[j].copy(), float(r[j]), res[j].copy(), float(cphi[j, 0]), b)
        if out[i] is None or sol.r > out[i].r:
            out[i] = sol
    return out


def _live_edges(batch, phi, P, b):
    """Consecutive sample pairs of ``phi`` (rows, k) where liveness flips."""
    e1 = P[(b + 1) % 3] - P[b]
    e2 = P[(b + 2) % 3] - P[b]
    _, g1, g2 = _probe(batch, phi, e1, e2)
    live = np.minimum(g1, g2) > 1e-9 * batch.scale[:, None]
    i, k = np.nonzero(live[:, 1:] != live[:, :-1])
    return np.stack([phi[i, k], phi[i, k + 1]], axis=1)


def _zoom(batch, P, tol, base_vertex, samples, depth=4, max_arcs=64):
    """Rescan the short arcs where a ray from the boundary starts or stops
    pointing inward.  Near sharp corners the whole solution window can fall
    between two samples of the coarse scan."""
    b = base_vertex % 3
    phi = np.linspace(0, 2 * np.pi, samples + 1)[None]
    arcs = _live_edges(batch, phi, P, b)
    for _ in range(depth):
        if len(arcs) == 0:
            return None
        arcs = arcs[:max_arcs]
        sub = batch.take(np.zeros(len(arcs), int))
        found = [s for s in _inscribe_batch(sub, P, tol, b, arcs, samples) if s is not None]
        if found:
            return max(found, key=lambda s: s.r)
        arcs = _live_edges(sub, np.linspace(arcs[:, 0], arcs[:, 1], samples, axis=-1), P, b)
    return None


# ---------------------------------------------------------------------------
# public operations


def boundary_extent(body: ConvexBodyOracle2D, x, v) -> float:
    """``max{t >= 0 : x + t v on the boundary}`` for a member ``x``."""
    x = np.asarray(x, float)
    v = np.asarray(v, float)
    if not np.any(v):
        raise InputError("direction must be nonzero")
    if not _near_member(body, x):
        raise InputError("x is not a member of the body")
    batch = _OracleBatch(body)
    return float(np.ravel(_exits(batch, x[None, :], v))[0])


def inscribe_homothet_2d(
    body: ConvexBodyOracle2D,
    tri: Triangle2D,
    tol: float = DEFAULT_TOL,
    base_vertex: int = 0,
    arc: Optional[Sequence[float]] = None,
    samples: int = ARC_SAMPLES,
) -> HomothetSolution:
    """Find ``z, r > 0`` with ``z + r * p_i`` on the boundary of ``body``.

    ``base_vertex`` selects which triangle vertex rides along the boundary
    during the scan; ``arc`` restricts the scan to an angular window seen
    from the body's interior point.  Runs with different base vertices scan
    disjoint parts of the boundary and serve as independent checks.
    """
    batch = _OracleBatch(body)
    arcs = None if arc is None else np.array([arc], float)
    sol = _inscribe_batch(batch, tri.vertices, tol, base_vertex, arcs, samples)[0]
    if sol is None and arc is None:
        # other base vertices see different parts of the boundary
        for k in (1, 2):
            sol = _inscribe_batch(batch, tri.vertices, tol, base_vertex + k, None, samples)[0]
            if sol is not None:
                break
    if sol is None and arc is None:
        for k in range(3):
            sol = _zoom(batch, tri.vertices, tol, base_vertex + k, samples)
            if sol is not None:
                break
    if sol is None:
        raise NoInscribedHomothet("no inscribed homothet found")
    return sol


def circumcircle_equilateral(norm: NormSpec, a, b, c, tol: float = DEFAULT_TOL) -> Circumcircle:
    """Circumcircle of a planar p-equilateral triple with radius at most p.

    Rescales to p = 1, inscribes the homothet of (a, b, c) in the unit ball
    by scanning the arc between ``a - b`` and ``a - c``, and maps back with
    ``s = -z / r``, ``R = p / r``.
    """
    if norm.dim != 2:
        raise InputError("circumcircle_equilateral needs a planar norm")
    P = np.array([a, b, c], dtype=float)
    if P.shape != (3, 2):
        raise InputError("points must be 2-vectors")
    d = norm_batch(norm, np.array([P[0] - P[1], P[1] - P[2], P[2] - P[0]]))
    p = float(d.mean())
    if p <= 0 or np.max(np.abs(d - p)) > max(tol, 1e-12) * p * 10:
        raise InputError(f"points are not equilateral (distances {d.tolist()})")
    shift = P[0]
    Pn = (P - shift) / p
    body = ConvexBodyOracle2D.unit_ball(norm)
    batch = _OracleBatch(body, scale=np.array([2.0 * _ball_width(norm)]))
    u, w = Pn[0] - Pn[1], Pn[0] - Pn[2]
    phi0 = math.atan2(u[1], u[0])
    dphi = math.atan2(w[1], w[0]) - phi0
    dphi = (dphi + math.pi) % (2 * math.pi) - math.pi
    sol = _inscribe_batch(batch, Pn, tol, 0, np.array([[phi0, phi0 + dphi]]))[0]
    if sol is None:
        raise BracketNotFound("IVT bracket not found on the arc between a-b and a-c")
    center = shift + p * (-sol.z / sol.r)
    R = p / sol.r
    dev = float(np.max(np.abs(norm_batch(norm, P - center) - R)))
    return Circumcircle(center, R, dev, sol)


def _ball_width(norm: NormSpec) -> float:
    ang = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    U = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    return float(np.max(1.0 / norm_batch(norm, U)))
