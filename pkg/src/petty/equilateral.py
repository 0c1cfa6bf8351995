"""Equilateral sets: verification, standard families, numeric extension
search and the vertex check for difference polytopes of simplices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from . import rational
from .errors import InputError
from .norms import Lp, NormSpec, PolytopeV, facet_functionals, norm_batch, norm_eval

N_STARTS = 32
NOT_FOUND_FACTOR = 1e3


# ---------------------------------------------------------------------------
# verification


@dataclass
class EquilateralCertificate:
    points: list
    p: object  # Fraction on the exact path, float otherwise
    max_deviation: object
    tol: float
    exact: bool = False
    distances: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return self.max_deviation <= self.tol * self.p


def _exact_capable(norm: NormSpec) -> bool:
    return isinstance(norm, PolytopeV) or (isinstance(norm, Lp) and (norm.p == 1 or math.isinf(norm.p)))


def _as_points(points, dim=None):
    pts = [list(x) for x in points]
    if dim is not None and any(len(x) != dim for x in pts):
        raise InputError(f"every point must have dimension {dim}")
    return pts


def verify_equilateral(norm: NormSpec, points, tol: float = 1e-9) -> EquilateralCertificate:
    """Pairwise distances, their mean ``p`` and the worst deviation from it.

    Rational points under a polyhedral norm are handled in exact arithmetic,
    so a genuinely equilateral set comes back with deviation exactly 0.
    """
    pts = _as_points(points, norm.dim)
    if len(pts) < 2:
        raise InputError("need at least two points")
    exact = _exact_capable(norm) and all(rational.is_rational_like(v) for x in pts for v in x)
    if exact:
        pts = [rational.to_vector(x) for x in pts]
        if isinstance(norm, Lp):
            fast = _lattice_distances(norm, pts)
            if fast is not None:
                return _certificate_from_lattice(pts, *fast, tol)
    else:
        pts = [[float(v) for v in x] for x in pts]
    dist = {}
    for i, j in combinations(range(len(pts)), 2):
        if list(pts[i]) == list(pts[j]):
            raise InputError(f"points {i} and {j} coincide")
        diff = [a - b for a, b in zip(pts[i], pts[j])]
        dist[(i, j)] = norm_eval(norm, diff) if exact else float(norm_batch(norm, np.array(diff)))
    vals = list(dist.values())
    if exact:
        p = sum(vals, Fraction(0)) / len(vals)
    else:
        p = float(np.mean(vals))
    dev = max(abs(d - p) for d in vals)
    return EquilateralCertificate([tuple(x) for x in pts], p, dev, tol, exact, dist)


def _lattice_distances(norm: Lp, pts):
    """l1 / l-inf distances of rational points as integers over a common
    denominator, or None when the integers would not fit in int64."""
    L = math.lcm(*(v.denominator for x in pts for v in x))
    M = [[v.numerator * (L // v.denominator) for v in x] for x in pts]
    big = max((abs(v) for x in M for v in x), default=0)
    if 2 * big * len(M[0]) >= 2**62:
        return None
    M = np.array(M, dtype=np.int64)
    i, j = np.triu_indices(len(M), 1)
    D = np.empty(len(i), dtype=np.int64)
    step = 1 << 16
    for s in range(0, len(i), step):
        A = np.abs(M[i[s:s + step]] - M[j[s:s + step]])
        D[s:s + step] = A.sum(axis=1) if norm.p == 1 else A.max(axis=1)
    return L, i, j, D


def _certificate_from_lattice(pts, L, i, j, D, tol):
    if np.any(D == 0):
        k = int(np.argmax(D == 0))
        raise InputError(f"points {i[k]} and {j[k]} coincide")
    total = sum(int(d) for d in D.tolist())
    npairs = len(D)
    p = Fraction(total, npairs * L)
    dev = Fraction(max(abs(int(D.max()) * npairs - total), abs(int(D.min()) * npairs - total)), npairs * L)
    dist = {}
    if npairs <= 4096:
        dist = {(int(a), int(b)): Fraction(int(d), L) for a, b, d in zip(i, j, D)}
    return EquilateralCertificate([tuple(x) for x in pts], p, dev, tol, True, dist)


# ---------------------------------------------------------------------------
# standard families

KINDS = ("euclidean-simplex", "linf-cube", "l1-crosspolytope", "petty-l1")


def petty_l1_points(n: int) -> List[Tuple[Fraction, ...]]:
    """The four-point 2-equilateral set in l1^n (n >= 4) with no fifth point.

    The fourth point splits the mass 1 of its last n - 1 coordinates as
    1/4, 3/4, 1, ..., 1 shares of 1/(n - 2), so that its l1 norm is 1.
    """
    if n < 4:
        raise InputError("petty-l1 needs n >= 4")
    z = Fraction(0)
    a1 = (Fraction(1),) + (z,) * (n - 1)
    a2 = (Fraction(-1),) + (z,) * (n - 1)
    a3 = (z,) + (Fraction(1, n - 1),) * (n - 1)
    m = n - 2
    a4 = (z, Fraction(-1, 4 * m), Fraction(-3, 4 * m)) + (Fraction(-1, m),) * (n - 3)
    return [a1, a2, a3, a4]


def _euclidean_simplex(n: int) -> List[Tuple[float, ...]]:
    # scaled basis vectors plus one point on the diagonal; side length 1
    s = 1.0 / math.sqrt(2.0)
    pts = [tuple(s if k == i else 0.0 for k in range(n)) for i in range(n)]
    t = s * (1.0 - math.sqrt(n + 1.0)) / n
    pts.append((t,) * n)
    return pts


def generators(kind: str, n: int) -> list:
    """Standard equilateral families.

    ``euclidean-simplex`` (p = 1, floats), ``linf-cube`` ({0,1}^n, p = 1),
    ``l1-crosspolytope`` (+-e_i, p = 2) and ``petty-l1`` (four points, p = 2).
    The last three are exact rationals.
    """
    if not isinstance(n, int) or n < 1:
        raise InputError(f"dimension must be a positive integer, got {n!r}")
    if kind == "euclidean-simplex":
        return _euclidean_simplex(n)
    if kind == "linf-cube":
        if n > 20:
            raise InputError("linf-cube is limited to n <= 20")
        return [tuple(Fraction((m >> (n - 1 - k)) & 1) for k in range(n)) for m in range(2**n)]
    if kind == "l1-crosspolytope":
        out = []
        for i in range(n):
            for s in (1, -1):
                out.append(tuple(Fraction(s if k == i else 0) for k in range(n)))
        return out
    if kind == "petty-l1":
        return petty_l1_points(n)
    raise InputError(f"unknown family {kind!r}; expected one of {', '.join(KINDS)}")


def generator_norm(kind: str, n: int) -> NormSpec:
    return {"euclidean-simplex": Lp(2.0, n), "linf-cube": Lp(math.inf, n)}.get(kind, Lp(1.0, n))


# ---------------------------------------------------------------------------
# numeric extension


@dataclass
class Found:
    x: np.ndarray
    residual: float
    certificate: EquilateralCertificate
    start: int

    status = "found"


@dataclass
class NotFound:
    best_residual: float
    best_point: np.ndarray
    threshold: float
    residuals: list  # per start, after polishing

    @property
    def status(self) -> str:
        # below the threshold the search merely failed to converge
        return "not_found" if self.best_residual > self.threshold else "inconclusive"


def _residual(norm, A, p, X):
    X = np.atleast_2d(X)
    D = norm_batch(norm, X[:, None, :] - A[None, :, :])
    return np.abs(D - p).max(axis=1)


def _starts(A, p, rng, count):
    m, n = A.shape
    c = A.mean(axis=0)
    out = [c]
    for a in A:
        out.append(2 * c - a)
        if len(out) >= count:
            break
    while len(out) < count:
        u = rng.normal(size=n)
        out.append(c + p * rng.uniform(0, 1.5) ** (1 / n) * u / np.linalg.norm(u))
    return np.array(out[:count])


def _pattern_search(norm, A, p, X, rng, min_step, max_iter=4000):
    """Compass search on all starts at once, with fresh random directions."""
    S, n = X.shape
    f = _residual(norm, A, p, X)
    h = np.full(S, 0.5 * p)
    basis = np.vstack([np.eye(n), -np.eye(n)])
    for _ in range(max_iter):
        live = h > min_step
        if not live.any():
            break
        R = rng.normal(size=(n, n))
        R /= np.linalg.norm(R, axis=1, keepdims=True)
        D = np.vstack([basis, R, -R])
        idx = np.flatnonzero(live)
        trial = X[idx, None, :] + h[idx, None, None] * D[None, :, :]
        ft = _residual(norm, A, p, trial.reshape(-1, n)).reshape(len(idx), len(D))
        k = ft.argmin(axis=1)
        best = ft[np.arange(len(idx)), k]
        up = best < f[idx]
        X[idx[up]] = trial[up, k[up]]
        f[idx[up]] = best[up]
        h[idx[~up]] *= 0.5
    return X, f


def _polish_polyhedral(F, A, p, x0, rounds=12):
    """Sequential LP on min t with ||x - a_i|| <= p + t and a linearized lower side.

    The lower side uses one attaining facet per point, which under-estimates
    the norm, so every LP solution is a true upper bound on the residual.
    """
    m, n = A.shape
    x = x0.copy()
    rho = 0.25 * p
    best_t = float(np.abs(np.abs((x[None] - A) @ F.T).max(axis=1) - p).max())
    ub_rows = np.vstack([F, -F])
    for _ in range(rounds):
        V = (x[None] - A) @ F.T
        k = np.abs(V).argmax(axis=1)
        s = np.sign(V[np.arange(m), k])
        s[s == 0] = 1.0
        rows, rhs = [], []
        for i in range(m):
            rows.append(np.hstack([ub_rows, -np.ones((len(ub_rows), 1))]))
            rhs.append(p + ub_rows @ A[i])
            g = s[i] * F[k[i]]
            rows.append(np.hstack([-g, [-1.0]])[None])
            rhs.append([-p - g @ A[i]])
        res = optimize.linprog(
            np.r_[np.zeros(n), 1.0], A_ub=np.vstack(rows), b_ub=np.concatenate(rhs),
            bounds=[(xi - rho, xi + rho) for xi in x] + [(0, None)], method="highs",
        )
        if res.status != 0:
            break
        xn = res.x[:n]
        t = float(np.abs(np.abs((xn[None] - A) @ F.T).max(axis=1) - p).max())
        if t < best_t:
            moved = np.abs(xn - x).max()
            x, best_t = xn, t
            if moved < 1e-15 * p:
                break
        else:
            rho *= 0.3
            if rho < 1e-14 * p:
                break
    return x


def _polish_smooth(norm, A, p, x0):
    fun = lambda x: norm_batch(norm, x[None] - A) / p - 1.0
    try:
        return optimize.least_squares(fun, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                      max_nfev=400, x_scale=p).x
    except (ValueError, np.linalg.LinAlgError):
        return x0


def extend_numeric(norm: NormSpec, points, p=None, tol: float = 1e-9, seeds: int = 0,
                   starts: int = N_STARTS):
    """Search for ``x`` with ``max_i | ||x - a_i|| - p | <= tol * p``.

    Returns :class:`Found` or :class:`NotFound`.  ``NotFound`` is a report,
    not a proof; :mod:`petty.exactcert` decides the l1 case exactly.
    """
    pts = _as_points(points, norm.dim)
    if len(pts) < 1:
        raise InputError("need at least one point")
    if len(pts) >= 2:
        cert = verify_equilateral(norm, pts, max(tol, 1e-9))
        if not cert.valid:
            raise InputError(f"points are not equilateral (deviation {float(cert.max_deviation):.3g})")
        p = float(cert.p) if p is None else float(p)
    elif p is None:
        raise InputError("p is required for a single point")
    p = float(p)
    if not p > 0:
        raise InputError("p must be positive")
    A = np.array([[float(v) for v in x] for x in pts])
    rng = np.random.default_rng(seeds)
    X0 = _starts(A, p, rng, starts)
    X, f = _pattern_search(norm, A, p, X0, rng, min_step=1e-10 * p)
    F = facet_functionals(norm)
    polished = []
    for s in range(len(X)):
        x = _polish_polyhedral(F, A, p, X[s]) if F is not None else _polish_smooth(norm, A, p, X[s])
        r = float(_residual(norm, A, p, x)[0])
        if r > f[s]:
            x, r = X[s], float(f[s])
        polished.append((r, tuple(x), s, x))
    # deterministic merge: residual, then lexicographic witness
    polished.sort(key=lambda e: (e[0], e[1]))
    for r, _, s, x in polished:
        if r > tol * p:
            break
        cert = verify_equilateral(norm, [*pts, list(x)], tol)
        if cert.valid:
            return Found(x, r, cert, s)
    r, _, _, x = polished[0]
    return NotFound(r, x, NOT_FOUND_FACTOR * tol * p, [e[0] for e in sorted(polished, key=lambda e: e[2])])


# ---------------------------------------------------------------------------
# difference polytope vertices


@dataclass
class VertexReport:
    i: int
    j: int
    functional: Tuple[Fraction, ...]
    value: Fraction  # at p_i - p_j
    runner_up: Fraction  # largest value over every other difference


@dataclass
class VertexCertificate:
    points: List[Tuple[Fraction, ...]]
    reports: List[VertexReport]

    @property
    def all_vertices(self) -> bool:
        return all(r.value > r.runner_up for r in self.reports)


def _differences(pts):
    return {(k, l): rational.sub(pts[k], pts[l]) for k in range(len(pts)) for l in range(len(pts)) if k != l}


def diff_polytope_vertex_check(points) -> VertexCertificate:
    """Certify that every ``p_i - p_j`` is a vertex of ``conv{p_k - p_l}``.

    For affinely independent points there is an affine map ``g`` with
    ``g(p_i) = 1``, ``g(p_j) = -1`` and ``g = 0`` at the other points.  Its
    linear part takes the value 2 at ``p_i - p_j`` and at most 1 at every
    other difference; it is computed exactly inside the span of the
    differences ``p_k - p_0``.
    """
    pts = [rational.to_vector(x) for x in points]
    if len(pts) < 2:
        raise InputError("need at least two points")
    dim = len(pts[0])
    if any(len(x) != dim for x in pts):
        raise InputError("points have different dimensions")
    B = [rational.sub(x, pts[0]) for x in pts[1:]]
    if rational.rank(B) != len(B):
        raise InputError("points are affinely dependent (degenerate simplex)")
    gram = [[rational.dot(u, v) for v in B] for u in B]
    diffs = _differences(pts)
    reports = []
    for (i, j) in sorted(diffs):
        g = [Fraction(0)] * len(pts)
        g[i], g[j] = Fraction(1), Fraction(-1)
        # phi = sum_c coef_c B_c with phi . B_k = g(p_k) - g(p_0)
        coef = rational.solve(gram, [g[k + 1] - g[0] for k in range(len(B))])
        phi = tuple(sum((c * b[d] for c, b in zip(coef, B)), Fraction(0)) for d in range(dim))
        reports.append(_report(phi, i, j, diffs))
    return VertexCertificate(pts, reports)


def _report(phi, i, j, diffs) -> VertexReport:
    value = rational.dot(phi, diffs[(i, j)])
    other = max(rational.dot(phi, v) for key, v in diffs.items() if key != (i, j))
    return VertexReport(i, j, phi, value, other)


def audit_vertex_certificate(cert: VertexCertificate) -> bool:
    """Recompute every report by substitution; True iff all are strict separations."""
    diffs = _differences(cert.points)
    if len(cert.reports) != len(diffs):
        return False
    for r in cert.reports:
        again = _report(r.functional, r.i, r.j, diffs)
        if again.value != r.value or again.runner_up != r.runner_up or not r.value > r.runner_up:
            return False
    return True
