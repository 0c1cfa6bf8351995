"""Command-line interface: one subcommand per operation, JSON in and out.

Exit codes: 0 success, 1 bad input, 2 no extension (numeric NotFound,
maximal verdict, rejected audit), 3 internal failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import numpy as np

from . import acceptance, exactcert
from .equilateral import (
    KINDS,
    Found,
    audit_vertex_certificate,
    diff_polytope_vertex_check,
    extend_numeric,
    generator_norm,
    generators,
    verify_equilateral,
)
from .errors import InputError, PettyError, SolverError
from .figures import circumcircle_figure, profile_figure
from .norms import ConvexBodyOracle2D, Lp, SmoothingParams, smooth_approx, spec_from_json, spec_to_json, validate_smoothing
from .petty3d import petty_extend
from .planar import Triangle2D, circumcircle_equilateral, inscribe_homothet_2d

EXIT_OK, EXIT_INPUT, EXIT_NEGATIVE, EXIT_INTERNAL = 0, 1, 2, 3


def version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.0.0"


# ---------------------------------------------------------------------------
# JSON


def to_jsonable(obj):
    """Fractions become "p/q" strings, arrays lists, floats stay shortest round-trip."""
    if isinstance(obj, Fraction):
        return str(obj.numerator) if obj.denominator == 1 else f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


_SHORT = {"l1": 1.0, "l2": 2.0, "linf": math.inf}


def parse_norm(value):
    """A norm from a JSON file, inline JSON, or shorthand ``l1:N``, ``linf:N``, ``lp:P:N``."""
    if value is None:
        return None
    if isinstance(value, dict):
        return spec_from_json(value)
    if os.path.exists(value):
        return spec_from_json(_read_json(value))
    if value.lstrip().startswith("{"):
        try:
            return spec_from_json(json.loads(value))
        except json.JSONDecodeError as exc:
            raise InputError(f"inline norm is not valid JSON: {exc}") from None
    parts = value.split(":")
    try:
        if parts[0] in _SHORT and len(parts) == 2:
            return Lp(_SHORT[parts[0]], int(parts[1]))
        if parts[0] == "lp" and len(parts) == 3:
            return Lp(float(parts[1]), int(parts[2]))
    except ValueError:
        pass
    raise InputError(f"cannot interpret norm {value!r} (file, JSON, l1:N, l2:N, linf:N or lp:P:N)")


def _number(v):
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise InputError(f"not a number: {v!r}")
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(f"not a number: {v!r}") from None
    return v


def parse_points(data):
    if not isinstance(data, list) or not data or not all(isinstance(x, list) for x in data):
        raise InputError("points must be a non-empty list of vectors")
    if len({len(x) for x in data}) != 1:
        raise InputError("points have different dimensions")
    return [[_number(v) for v in x] for x in data]


def load_scenario(args):
    """Merge a scenario file with command-line flags (flags win)."""
    sc = {}
    if getattr(args, "scenario", None):
        sc = _read_json(args.scenario)
        if not isinstance(sc, dict):
            raise InputError("scenario must be a JSON object")
    if getattr(args, "points", None):
        data = _read_json(args.points)
        if isinstance(data, dict):
            sc = {**data, **{k: v for k, v in sc.items() if k not in data}}
        else:
            sc["points"] = data
    if getattr(args, "norm", None):
        sc["norm"] = args.norm
    return sc


def _need(sc, key):
    if key not in sc:
        raise InputError(f"missing {key!r} (use --{key} or a scenario file)")
    return sc[key]


def _float_points(pts):
    return np.array([[float(v) for v in x] for x in pts])


def _write_svg(path, fig):
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(fig.to_svg())


# ---------------------------------------------------------------------------
# commands; each returns (exit code, result dict)


def cmd_verify(args, sc):
    norm = parse_norm(_need(sc, "norm"))
    pts = parse_points(_need(sc, "points"))
    cert = verify_equilateral(norm, pts, args.tol)
    res = {"valid": cert.valid, "exact": cert.exact, "p": cert.p, "max_deviation": cert.max_deviation,
           "count": len(cert.points), "tol": args.tol}
    return (EXIT_OK if cert.valid else EXIT_NEGATIVE), res


def cmd_generate(args, sc):
    pts = generators(args.kind, args.n)
    norm = generator_norm(args.kind, args.n)
    cert = verify_equilateral(norm, pts)
    return EXIT_OK, {"kind": args.kind, "n": args.n, "norm": spec_to_json(norm), "points": pts,
                     "p": cert.p, "max_deviation": cert.max_deviation}


def cmd_extend_numeric(args, sc):
    norm = parse_norm(_need(sc, "norm"))
    pts = parse_points(_need(sc, "points"))
    p = args.p if args.p is not None else sc.get("p")
    p = None if p is None else float(_number(p))
    res = extend_numeric(norm, pts, p, tol=args.tol, seeds=args.seed)
    if isinstance(res, Found):
        return EXIT_OK, {"status": res.status, "x": res.x, "residual": res.residual, "start": res.start}
    return EXIT_NEGATIVE, {"status": res.status, "best_residual": res.best_residual,
                           "best_point": res.best_point, "threshold": res.threshold}


def cmd_extend3(args, sc):
    norm = parse_norm(_need(sc, "norm"))
    pts = _float_points(parse_points(_need(sc, "points")))
    if pts.shape != (3, 3):
        raise InputError("extend3 needs three points in R^3")
    res = petty_extend(norm, *pts, tol=args.tol, mode=args.mode)
    out = {"d": res.d, "deviations": res.deviations, "max_deviation": res.max_deviation,
           "method": res.method, "t": res.t}
    if res.sweep is not None:
        t, r = res.sweep.profile()
        out["sweep"] = {"t": t, "r": r, "t_range": [res.sweep.t_lo, res.sweep.t_hi],
                        "central_r": None if res.sweep.central is None else res.sweep.central.r}
        _write_svg(args.svg, profile_figure(t, r, [res.t] if math.isfinite(res.t) else []))
    if res.history:
        out["history"] = res.history
    return EXIT_OK, out


def cmd_circumcircle(args, sc):
    norm = parse_norm(_need(sc, "norm"))
    pts = _float_points(parse_points(_need(sc, "points")))
    if pts.shape != (3, 2):
        raise InputError("circumcircle needs three points in the plane")
    circ = circumcircle_equilateral(norm, *pts, tol=args.tol)
    _write_svg(args.svg, circumcircle_figure(norm, *pts, circ.center, circ.radius))
    return EXIT_OK, {"center": circ.center, "radius": circ.radius, "deviation": circ.deviation}


def cmd_inscribe(args, sc):
    norm = parse_norm(_need(sc, "norm"))
    pts = _float_points(parse_points(_need(sc, "points")))
    if pts.shape != (3, 2):
        raise InputError("inscribe needs a triangle in the plane")
    body = ConvexBodyOracle2D.unit_ball(norm)
    sol = inscribe_homothet_2d(body, Triangle2D(*pts), tol=args.tol, base_vertex=args.base_vertex)
    return EXIT_OK, {"z": sol.z, "r": sol.r, "residuals": sol.residuals, "base_vertex": sol.base_vertex,
                     "vertices": sol.points(Triangle2D(*pts))}


def cmd_lemma7(args, sc):
    pts = parse_points(_need(sc, "points"))
    if any(isinstance(v, float) for x in pts for v in x):
        raise InputError("lemma7 needs rational coordinates (integers or \"p/q\" strings)")
    cert = diff_polytope_vertex_check(pts)
    ok = cert.all_vertices and audit_vertex_certificate(cert)
    reports = [{"i": r.i, "j": r.j, "functional": r.functional, "value": r.value, "runner_up": r.runner_up}
               for r in cert.reports]
    return (EXIT_OK if ok else EXIT_NEGATIVE), {"all_vertices": ok, "reports": reports}


def cmd_certify_l1(args, sc):
    if args.n is not None:
        cert = exactcert.l1_maximality_check(args.n, cap=args.cap)
    else:
        pts = parse_points(_need(sc, "points"))
        p = args.p if args.p is not None else _need(sc, "p")
        cert = exactcert.l1_maximality_general(pts, _number(p), cap=args.cap)
    data = exactcert.certificate_to_json(cert)
    if args.cert_out:
        Path(args.cert_out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.cert_out).write_text(json.dumps(data))
    summary = {"verdict": cert.verdict, "n": cert.n, "p": cert.p, "cell_count": cert.cell_count,
               "cells_checked": cert.cells_checked, "witness": cert.witness,
               "certificate": args.cert_out or data}
    # 2 mirrors extend-numeric: no fifth point exists
    return (EXIT_NEGATIVE if cert.verdict == "maximal" else EXIT_OK), summary


def cmd_audit_cert(args, sc):
    cert = exactcert.certificate_from_json(_read_json(args.cert))
    rep = exactcert.audit_certificate(cert)
    return (EXIT_OK if rep["ok"] else EXIT_NEGATIVE), rep


def cmd_smooth(args, sc):
    base = parse_norm(_need(sc, "norm"))
    anchors = [[float(v) for v in a] for a in parse_points(sc["points"])] if sc.get("points") else []
    params = SmoothingParams(args.epsilon, sample_count=args.samples, seed=args.seed)
    out = smooth_approx(base, anchors, params)
    report = validate_smoothing(out, base, params)
    return EXIT_OK, {"norm": spec_to_json(out), "q": out.q, "theta": out.theta, "validation": report}


def cmd_reproduce_all(args, sc):
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    select = set(args.only) if args.only else None
    rows = []
    for crit in acceptance.CRITERIA:
        if select is not None and crit.number not in select:
            continue
        res = crit()
        print(res.line(), file=sys.stderr, flush=True)
        rows.append(res)
    summary = [acceptance.result_to_json(r) for r in rows]
    (out_dir / "summary.json").write_text(json.dumps(to_jsonable(summary), indent=1))
    (out_dir / "summary.txt").write_text("\n".join(r.line() for r in rows) + "\n")
    ok = all(r.passed for r in rows)
    return (EXIT_OK if ok else EXIT_INPUT), {"passed": ok, "criteria": [
        {"number": r.number, "passed": r.passed, "seconds": r.seconds} for r in rows]}


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="petty", description="Equilateral sets in normed spaces.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {version()}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, *, norm=True, points=True, tol=1e-9, svg=False):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        p.add_argument("--scenario", help="JSON scenario with norm, points and options")
        if norm:
            p.add_argument("--norm", help="norm JSON file, inline JSON, or l1:N / l2:N / linf:N / lp:P:N")
        if points:
            p.add_argument("--points", help="JSON file with a list of vectors (or a scenario object)")
        p.add_argument("--tol", type=float, default=tol)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", dest="json_out", help="write the result here instead of stdout")
        if svg:
            p.add_argument("--svg", help="write an SVG figure here")
        return p

    add("verify", cmd_verify, "check that a point set is equilateral")
    g = add("generate", cmd_generate, "standard equilateral families", norm=False, points=False)
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--n", type=int, required=True)
    e = add("extend-numeric", cmd_extend_numeric, "multistart search for an equidistant point")
    e.add_argument("--p", type=str, default=None)
    e3 = add("extend3", cmd_extend3, "fourth point for a 3-D equilateral triangle", tol=1e-6, svg=True)
    e3.add_argument("--mode", choices=("auto", "direct", "smoothing"), default="auto")
    add("circumcircle", cmd_circumcircle, "circumcircle of a planar equilateral triple", svg=True)
    i = add("inscribe", cmd_inscribe, "inscribe a homothet of a triangle in the unit ball")
    i.add_argument("--base-vertex", type=int, default=0)
    add("lemma7", cmd_lemma7, "vertex check for differences of simplex vertices", norm=False)
    c = add("certify-l1", cmd_certify_l1, "exact l1 maximality certificate", norm=False)
    c.add_argument("--n", type=int, default=None)
    c.add_argument("--p", type=str, default=None)
    c.add_argument("--cap", type=int, default=exactcert.DEFAULT_CAP)
    c.add_argument("--cert-out", help="write the full certificate JSON here")
    a = add("audit-cert", cmd_audit_cert, "re-check a certificate written by certify-l1",
            norm=False, points=False)
    a.add_argument("--cert", required=True)
    s = add("smooth", cmd_smooth, "smooth strictly convex approximation keeping anchors")
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--samples", type=int, default=10_000)
    r = add("reproduce-all", cmd_reproduce_all, "run the acceptance suite", norm=False, points=False)
    r.add_argument("--out", default="reproduce-output")
    r.add_argument("--only", type=int, nargs="*")
    return ap


def _config(args) -> dict:
    skip = {"func", "json_out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    t0 = time.perf_counter()
    try:
        sc = load_scenario(args)
        code, result = args.func(args, sc)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        code, result = EXIT_NEGATIVE, {"status": "solver_failure", "error": f"{type(exc).__name__}: {exc}"}
    except PettyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - reported as an internal failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    doc = {"command": args.command, "version": version(), "config": _config(args),
           "result": result, "exit_code": code}
    if args.command == "reproduce-all":
        doc["seconds"] = time.perf_counter() - t0
    text = json.dumps(to_jsonable(doc), indent=1)
    if args.json_out:
        Path(args.json_out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.json_out).write_text(text + "\n")
    else:
        print(text)
    return code


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
