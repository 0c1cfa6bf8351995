"""Exact certification that an l1 equilateral set has no further
equidistant point.

The distance ``||x - a_j||_1`` is affine on every cell of the arrangement
cut out by the coordinate values of the points, so the question becomes
finitely many exact LP feasibility problems.  Coordinates whose columns
agree across all points are interchangeable; only one cell per orbit of
that permutation group is examined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product
from typing import Dict, List, Optional, Sequence, Tuple

from . import rational
from .equilateral import petty_l1_points
from .errors import CellBudgetExceeded, InputError

N_MAX = 10
DEFAULT_CAP = 200_000

INFEASIBLE = "infeasible"
OUTSIDE = "solution-outside-cell"
INSIDE = "solution-in-cell"


@dataclass
class CellReport:
    index: int
    cell: Tuple[int, ...]  # interval index per coordinate
    bounds: Tuple[Tuple[Optional[Fraction], Optional[Fraction]], ...]
    matrix: List[Tuple[Fraction, ...]]
    rhs: Tuple[Fraction, ...]
    outcome: str
    witness: Optional[Tuple[Fraction, ...]] = None
    farkas: Optional[Tuple[Fraction, ...]] = None


@dataclass
class MaximalityCertificate:
    n: int
    points: List[Tuple[Fraction, ...]]
    p: Fraction
    cell_count: int  # cells of the full arrangement
    cells_checked: int  # orbit representatives actually solved
    reports: List[CellReport]
    verdict: str  # "maximal" | "extendable"
    witnesses: List[Tuple[Fraction, ...]] = field(default_factory=list)

    @property
    def witness(self):
        return self.witnesses[0] if self.witnesses else None


# ---------------------------------------------------------------------------
# arrangement


def _breakpoints(points, n):
    return [sorted({a[i] for a in points}) for i in range(n)]


def _interval(bps, k):
    lo = bps[k - 1] if k > 0 else None
    hi = bps[k] if k < len(bps) else None
    return lo, hi


def _coordinate_classes(points, n):
    classes: Dict[tuple, list] = {}
    for i in range(n):
        classes.setdefault(tuple(a[i] for a in points), []).append(i)
    return list(classes.values())


def representative_cells(points, n):
    """One cell per orbit under permutations of interchangeable coordinates."""
    bps = _breakpoints(points, n)
    classes = _coordinate_classes(points, n)
    per_class = [list(combinations_with_replacement(range(len(bps[c[0]]) + 1), len(c))) for c in classes]
    for choice in product(*per_class):
        cell = [0] * n
        for cls, ks in zip(classes, choice):
            for i, k in zip(cls, ks):
                cell[i] = k
        yield tuple(cell)


def cell_count(points, n) -> int:
    return math.prod(len(b) + 1 for b in _breakpoints(points, n))


def orbit_count(points, n) -> int:
    bps = _breakpoints(points, n)
    return math.prod(math.comb(len(bps[c[0]]) + len(c), len(c)) for c in _coordinate_classes(points, n))


def cell_system(points, radii, bps, cell):
    """Affine system of ``||x - a_j||_1 = r_j`` on a closed cell, and its box."""
    n = len(cell)
    bounds = tuple(_interval(bps[i], cell[i]) for i in range(n))
    A, b = [], []
    for a, r in zip(points, radii):
        # on the cell, x_i >= a_i exactly when a_i is at most the lower end
        sig = tuple(1 if (bounds[i][0] is not None and a[i] <= bounds[i][0]) else -1 for i in range(n))
        A.append(tuple(Fraction(s) for s in sig))
        b.append(r + sum((s * a[i] for i, s in enumerate(sig)), Fraction(0)))
    return bounds, A, tuple(b)


def _in_box(x, bounds):
    return all((lo is None or v >= lo) and (hi is None or v <= hi) for v, (lo, hi) in zip(x, bounds))


def _unique_solution(A, b):
    n = len(A[0])
    if rational.rank(A) < n:
        return None
    return rational.solve(A, b)


def solve_cell(index, points, radii, bps, cell) -> CellReport:
    bounds, A, b = cell_system(points, radii, bps, cell)
    lower = [lo for lo, _ in bounds]
    upper = [hi for _, hi in bounds]
    res = rational.linprog_exact([0] * len(cell), A, b, lower, upper, feasibility_only=True)
    if res.status == "infeasible":
        sol = _unique_solution(A, b)
        outcome = OUTSIDE if sol is not None else INFEASIBLE
        return CellReport(index, cell, bounds, A, b, outcome, witness=sol, farkas=res.farkas)
    return CellReport(index, cell, bounds, A, b, INSIDE, witness=res.x)


# ---------------------------------------------------------------------------
# entry points


def _validate(points, p, n_max):
    pts = [rational.to_vector(a) for a in points]
    if len(pts) < 2:
        raise InputError("need at least two points")
    n = len(pts[0])
    if any(len(a) != n for a in pts):
        raise InputError("points have different dimensions")
    if n > n_max:
        raise InputError(f"dimension {n} exceeds n_max = {n_max}")
    p = rational.to_fraction(p)
    if p <= 0:
        raise InputError("p must be positive")
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = rational.l1(rational.sub(pts[i], pts[j]))
            if d != p:
                raise InputError(f"||a_{i + 1} - a_{j + 1}||_1 = {d}, expected {p}")
    return pts, n, p


def solve_l1_system(centers, radii, cap: int = DEFAULT_CAP):
    """All orbit-representative cells for ``||x - c_j||_1 = r_j``.

    Returns the list of reports and the distinct exact in-cell witnesses.
    """
    pts = [rational.to_vector(c) for c in centers]
    radii = [rational.to_fraction(r) for r in radii]
    n = len(pts[0])
    bps = _breakpoints(pts, n)
    reports, witnesses = [], []
    for idx, cell in enumerate(representative_cells(pts, n)):
        if idx >= cap:
            raise CellBudgetExceeded(
                f"cell budget {cap} exhausted ({orbit_count(pts, n)} cells needed)",
                partial={"reports": reports, "witnesses": witnesses},
            )
        rep = solve_cell(idx, pts, radii, bps, cell)
        reports.append(rep)
        # cells are closed, so a solution on a shared face shows up repeatedly
        if rep.outcome == INSIDE and rep.witness not in witnesses:
            witnesses.append(rep.witness)
    return reports, witnesses


def l1_maximality_general(points, p, cap: int = DEFAULT_CAP, n_max: int = N_MAX) -> MaximalityCertificate:
    """Decide exactly whether some x has ``||x - a_j||_1 = p`` for every j."""
    pts, n, p = _validate(points, p, n_max)
    reports, witnesses = solve_l1_system(pts, [p] * len(pts), cap)
    good = [w for w in witnesses if all(rational.l1(rational.sub(w, a)) == p for a in pts)]
    verdict = "extendable" if good else "maximal"
    return MaximalityCertificate(n, pts, p, cell_count(pts, n), len(reports), reports, verdict, good)


def l1_maximality_check(n: int, cap: int = DEFAULT_CAP, n_max: int = N_MAX) -> MaximalityCertificate:
    """Certificate for the four-point 2-equilateral set of ``petty_l1_points(n)``."""
    if not isinstance(n, int) or n < 4:
        raise InputError("n must be an integer >= 4")
    return l1_maximality_general(petty_l1_points(n), 2, cap, n_max)


# ---------------------------------------------------------------------------
# audit and serialization


def audit_certificate(cert: MaximalityCertificate) -> dict:
    """Independent re-check of a certificate; returns a summary with ``ok``.

    Every cell is rebuilt from the points, every infeasible cell's Farkas
    vector is checked, every witness is re-substituted into exact l1
    distances, and the verdict is recomputed from the reports alone.
    """
    problems = []
    pts = [tuple(a) for a in cert.points]
    n, p = cert.n, cert.p
    try:
        _validate(pts, p, max(n, N_MAX))
    except InputError as exc:
        problems.append(str(exc))
    if cert.cell_count != cell_count(pts, n):
        problems.append("cell count does not match the arrangement")
    expected = list(representative_cells(pts, n))
    if [r.cell for r in cert.reports] != expected:
        problems.append("reports do not cover every cell orbit")
    bps = _breakpoints(pts, n)
    valid = []
    for r in cert.reports:
        bounds, A, b = cell_system(pts, [p] * len(pts), bps, r.cell)
        if tuple(bounds) != tuple(r.bounds) or list(map(tuple, A)) != list(map(tuple, r.matrix)) or tuple(b) != tuple(r.rhs):
            problems.append(f"cell {r.index}: system differs from the arrangement")
            continue
        lower = [lo for lo, _ in bounds]
        upper = [hi for _, hi in bounds]
        if r.outcome in (INFEASIBLE, OUTSIDE):
            if r.farkas is None or not rational.check_farkas(A, b, lower, upper, r.farkas):
                problems.append(f"cell {r.index}: infeasibility certificate rejected")
        elif r.outcome == INSIDE:
            w = r.witness
            if w is None or not _in_box(w, bounds):
                problems.append(f"cell {r.index}: witness outside its cell")
            elif all(rational.l1(rational.sub(w, a)) == p for a in pts):
                valid.append(w)
            else:
                problems.append(f"cell {r.index}: witness fails the distance check")
        else:
            problems.append(f"cell {r.index}: unknown outcome {r.outcome!r}")
    verdict = "extendable" if valid else "maximal"
    if verdict != cert.verdict:
        problems.append(f"verdict {cert.verdict!r} but reports imply {verdict!r}")
    return {"ok": not problems, "verdict": verdict, "cells": len(cert.reports), "problems": problems}


def _q(v):
    return None if v is None else rational.fraction_str(v)


def _vec(v):
    return None if v is None else [rational.fraction_str(x) for x in v]


def _unq(v):
    return None if v is None else Fraction(v)


def _unvec(v):
    return None if v is None else tuple(Fraction(x) for x in v)


def certificate_to_json(cert: MaximalityCertificate) -> dict:
    return {
        "kind": "l1-maximality",
        "n": cert.n,
        "p": _q(cert.p),
        "points": [_vec(a) for a in cert.points],
        "cell_count": cert.cell_count,
        "cells_checked": cert.cells_checked,
        "verdict": cert.verdict,
        "witnesses": [_vec(w) for w in cert.witnesses],
        "reports": [
            {
                "index": r.index,
                "cell": list(r.cell),
                "bounds": [[_q(lo), _q(hi)] for lo, hi in r.bounds],
                "matrix": [_vec(row) for row in r.matrix],
                "rhs": _vec(r.rhs),
                "outcome": r.outcome,
                "witness": _vec(r.witness),
                "farkas": _vec(r.farkas),
            }
            for r in cert.reports
        ],
    }


def certificate_from_json(data: dict) -> MaximalityCertificate:
    if data.get("kind") != "l1-maximality":
        raise InputError("not an l1-maximality certificate")
    try:
        reports = [
            CellReport(
                r["index"], tuple(r["cell"]), tuple((_unq(lo), _unq(hi)) for lo, hi in r["bounds"]),
                [_unvec(row) for row in r["matrix"]], _unvec(r["rhs"]), r["outcome"],
                _unvec(r.get("witness")), _unvec(r.get("farkas")),
            )
            for r in data["reports"]
        ]
        return MaximalityCertificate(
            int(data["n"]), [_unvec(a) for a in data["points"]], Fraction(data["p"]),
            int(data["cell_count"]), int(data["cells_checked"]), reports, data["verdict"],
            [_unvec(w) for w in data.get("witnesses", [])],
        )
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"malformed certificate: {exc}") from None
