"""The acceptance suite, shared by the test-suite and ``petty reproduce-all``.

Every check returns a :class:`CriterionResult`; nothing here raises on a
failed criterion.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List

import numpy as np

from . import exactcert
from .equilateral import (
    Found,
    audit_vertex_certificate,
    diff_polytope_vertex_check,
    extend_numeric,
    generators,
    petty_l1_points,
    verify_equilateral,
)
from .errors import PettyError
from .norms import ConvexBodyOracle2D, Lp, SmoothingParams, norm_batch, smooth_approx
from .petty3d import petty_extend
from .planar import Triangle2D, boundary_extent, circumcircle_equilateral, inscribe_homothet_2d
from .samples import random_equilateral_triple, random_lp, random_polytope, random_smoothed_polytope

SEED = 20240601


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float = 0.0
    detail: Dict = field(default_factory=dict)

    def line(self) -> str:
        return f"criterion {self.number:2d} {'PASS' if self.passed else 'FAIL'}  {self.seconds:7.1f}s  {self.title}"


def _timed(number, title):
    def wrap(fn):
        def run(*args, **kw) -> CriterionResult:
            t0 = time.perf_counter()
            try:
                ok, detail = fn(*args, **kw)
            except PettyError as exc:
                ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
            return CriterionResult(number, title, bool(ok), time.perf_counter() - t0, detail)

        run.number = number
        run.title = title
        return run

    return wrap


def _planar_norm(i, rng):
    if i % 2 == 0:
        return random_polytope(2, int(rng.integers(6, 21)), rng)
    return random_lp(2, rng)


@_timed(1, "planar circumcircle radius at most p")
def criterion_1(count=200, seed=SEED):
    rng = np.random.default_rng(seed)
    worst_ratio, worst_dev, failures = 0.0, 0.0, []
    for i in range(count):
        norm = _planar_norm(i, rng)
        a, b, c, p = random_equilateral_triple(norm, rng)
        try:
            circ = circumcircle_equilateral(norm, a, b, c)
        except PettyError as exc:
            failures.append((i, str(exc)))
            continue
        worst_ratio = max(worst_ratio, circ.radius / p)
        worst_dev = max(worst_dev, circ.deviation / p)
    ok = not failures and worst_ratio <= 1 + 1e-8 and worst_dev <= 1e-8
    return ok, {"cases": count, "max_R_over_p": worst_ratio, "max_relative_deviation": worst_dev,
                "failures": failures[:5]}


@_timed(2, "boundary extent equals 2 at a-c and a-b")
def criterion_2(count=50, seed=SEED + 2):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(count):
        norm = _planar_norm(i, rng)
        a, b, c, _ = random_equilateral_triple(norm, rng, p=1.0)
        body = ConvexBodyOracle2D.unit_ball(norm)
        f = boundary_extent(body, a - c, c - a)
        g = boundary_extent(body, a - b, b - a)
        worst = max(worst, abs(f - 2), abs(g - 2))
    return worst <= 1e-9, {"cases": count, "max_error": worst}


_C3_CACHE: Dict = {}


def _criterion_3_runs(n_smooth=100, n_rough=50, seed=SEED + 3):
    key = (n_smooth, n_rough, seed)
    if key in _C3_CACHE:
        return _C3_CACHE[key]
    rng = np.random.default_rng(seed)
    runs = []
    for i in range(n_smooth + n_rough):
        if i < n_smooth:
            norm = random_lp(3, rng) if i % 2 == 0 else random_smoothed_polytope(3, rng)
            mode, tol = "auto", 1e-6
        else:
            j = i - n_smooth
            norm = (Lp(1.0, 3), Lp(math.inf, 3), None)[j % 3]
            if norm is None:
                norm = random_polytope(3, int(rng.integers(6, 21)), rng)
            mode, tol = "smoothing", 1e-4
        a, b, c, p = random_equilateral_triple(norm, rng)
        rec = {"index": i, "norm": type(norm).__name__, "mode": mode, "tol": tol}
        try:
            res = petty_extend(norm, a, b, c, tol=tol, mode=mode)
            rec["deviation"] = res.max_deviation / p
            rec["method"] = res.method
            centrals = []
            if res.sweep is not None and res.sweep.central is not None:
                centrals.append(res.sweep.central.r)
            centrals += [h["central_r"] for h in res.history if h.get("central_r") is not None]
            rec["central_r"] = centrals
        except PettyError as exc:
            rec["error"] = f"{type(exc).__name__}: {exc}"
        runs.append(rec)
    _C3_CACHE[key] = runs
    return runs


@_timed(3, "fourth equidistant point in 3-D norms")
def criterion_3(**kw):
    runs = _criterion_3_runs(**kw)
    bad = [r for r in runs if "error" in r or r["deviation"] > r["tol"]]
    smooth = [r["deviation"] for r in runs if r["mode"] == "auto" and "deviation" in r]
    rough = [r["deviation"] for r in runs if r["mode"] == "smoothing" and "deviation" in r]
    return not bad, {
        "cases": len(runs),
        "max_deviation_smooth": max(smooth, default=None),
        "max_deviation_nonsmooth": max(rough, default=None),
        "failures": bad[:5],
    }


@_timed(4, "central section has r >= 1")
def criterion_4(**kw):
    runs = _criterion_3_runs(**kw)
    values = [v for r in runs for v in r.get("central_r", [])]
    missing = [r["index"] for r in runs if not r.get("central_r")]
    low = min(values, default=float("nan"))
    return bool(values) and low >= 1 - 1e-8 and not missing, {
        "sweeps": len(values), "min_central_r": low, "runs_without_sweep": missing[:10]}


@_timed(5, "inscribed homothet is unique on strictly convex bodies")
def criterion_5(count=100, seed=SEED + 5):
    rng = np.random.default_rng(seed)
    worst, failures = 0.0, []
    for i in range(count):
        norm = random_lp(2, rng) if i % 2 == 0 else random_smoothed_polytope(2, rng)
        body = ConvexBodyOracle2D.unit_ball(norm)
        while True:
            P = rng.normal(size=(3, 2))
            if abs(np.linalg.det(np.c_[P, np.ones(3)])) > 0.2:
                break
        tri = Triangle2D(*P)
        try:
            s0 = inscribe_homothet_2d(body, tri, base_vertex=0)
            s1 = inscribe_homothet_2d(body, tri, base_vertex=1)
        except PettyError as exc:
            failures.append((i, str(exc)))
            continue
        worst = max(worst, float(np.linalg.norm(s0.z - s1.z) + abs(s0.r - s1.r)))
    return not failures and worst <= 1e-6, {"cases": count, "max_difference": worst, "failures": failures[:5]}


def random_rational_simplex(dim, rng):
    while True:
        pts = [tuple(Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 7))) for _ in range(dim))
               for _ in range(dim + 1)]
        try:
            return pts, diff_polytope_vertex_check(pts)
        except PettyError:
            continue


@_timed(6, "differences of simplex vertices are polytope vertices")
def criterion_6(count=100, seed=SEED + 6):
    rng = np.random.default_rng(seed)
    bad = []
    for i in range(count):
        dim = 2 + i % 4
        _, cert = random_rational_simplex(dim, rng)
        if not (cert.all_vertices and audit_vertex_certificate(cert)):
            bad.append(i)
    return not bad, {"cases": count, "failed": bad}


@_timed(7, "exact l1 maximality of the four-point set")
def criterion_7(dims=(4, 5, 6, 7, 8)):
    detail = {}
    ok = True
    for n in dims:
        t0 = time.perf_counter()
        pts = petty_l1_points(n)
        eq = verify_equilateral(Lp(1.0, n), pts)
        cert = exactcert.l1_maximality_check(n)
        audit = exactcert.audit_certificate(cert)
        control = exactcert.l1_maximality_general(pts[:3], 2)
        w = control.witness
        w_ok = w is not None and all(sum(abs(x - y) for x, y in zip(w, a)) == 2 for a in pts[:3])
        good = (eq.exact and eq.p == 2 and eq.max_deviation == 0 and cert.verdict == "maximal"
                and audit["ok"] and control.verdict == "extendable" and w_ok)
        ok &= good
        detail[n] = {"verdict": cert.verdict, "cells": cert.cell_count, "orbits": cert.cells_checked,
                     "control": control.verdict, "witness": None if w is None else [str(x) for x in w],
                     "seconds": round(time.perf_counter() - t0, 2)}
    return ok, detail


@_timed(8, "smoothed l1 keeps the sandwich and the anchors")
def criterion_8(ks=(2, 8, 32), samples=10_000, seed=SEED + 8):
    n = 4
    pts = np.array([[float(v) for v in a] for a in petty_l1_points(n)])
    base = Lp(1.0, n)
    diffs = [(pts[i] - pts[j]) / 2 for i in range(4) for j in range(4) if i != j]
    rng = np.random.default_rng(seed)
    detail, ok = {}, True
    for k in ks:
        eps = 1.0 / k
        sm = smooth_approx(base, diffs, SmoothingParams(eps, sample_count=samples, seed=seed))
        X = rng.normal(size=(samples, n))
        N, N0 = norm_batch(base, X), norm_batch(sm, X)
        sandwich = bool(np.all((1 - eps) * N0 <= N * (1 + 1e-12)) and np.all(N <= (1 + eps) * N0 * (1 + 1e-12)))
        anchor_dev = float(np.max(np.abs(norm_batch(sm, np.array(diffs)) - 1)))
        D = norm_batch(sm, np.array([pts[i] - pts[j] for i in range(4) for j in range(i + 1, 4)]))
        dist_ok = bool(np.all(D >= 2 * (1 - eps)) and np.all(D <= 2 * (1 + eps)))
        good = sandwich and anchor_dev <= 1e-9 and dist_ok
        ok &= good
        detail[k] = {"sandwich": sandwich, "anchor_deviation": anchor_dev,
                     "distances": [float(x) for x in D]}
    return ok, detail


@_timed(9, "cube and simplex generators")
def criterion_9(n_max=10):
    bad = []
    for n in range(1, n_max + 1):
        cube = verify_equilateral(Lp(math.inf, n), generators("linf-cube", n))
        if not (len(cube.points) == 2**n and cube.p == 1 and cube.max_deviation == 0):
            bad.append(("linf-cube", n))
        simplex = verify_equilateral(Lp(2.0, n), generators("euclidean-simplex", n))
        if not (len(simplex.points) == n + 1 and simplex.max_deviation <= 1e-12):
            bad.append(("euclidean-simplex", n))
    return not bad, {"n_max": n_max, "failed": bad}


def agreement_instances():
    out = []
    for n in (4, 5, 6):
        pts = petty_l1_points(n)
        out.append((f"petty-l1 n={n}", pts, Fraction(2)))
        out.append((f"petty-l1 n={n} without a4", pts[:3], Fraction(2)))
    for n in (2, 3):
        out.append((f"l1-crosspolytope n={n}", generators("l1-crosspolytope", n), Fraction(2)))
    out.append(("two points", [(0, 0), (2, 0)], Fraction(2)))
    return out


@_timed(10, "numeric search agrees with exact verdicts")
def criterion_10(seed=SEED + 10):
    detail, ok = {}, True
    for name, pts, p in agreement_instances():
        cert = exactcert.l1_maximality_general(pts, p)
        n = len(pts[0])
        res = extend_numeric(Lp(1.0, n), pts, p, tol=1e-6 / float(p), seeds=seed)
        found = isinstance(res, Found)
        agree = found == (cert.verdict == "extendable")
        if found:
            agree &= res.residual <= 1e-6
        ok &= agree
        detail[name] = {"exact": cert.verdict, "numeric": res.status,
                        "residual": res.residual if found else res.best_residual}
    return ok, detail


CRITERIA: List[Callable[..., CriterionResult]] = [
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
    criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
]


def run_all(select=None) -> List[CriterionResult]:
    return [c() for c in CRITERIA if select is None or c.number in select]


def result_to_json(res: CriterionResult) -> dict:
    return asdict(res)
