"""Static SVG figures: a planar circumcircle diagram and the r(t) profile
of a section sweep."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .norms import NormSpec, norm_batch

SIZE = 480


@dataclass
class Layer:
    kind: str  # "polyline" | "polygon" | "points" | "text"
    coords: np.ndarray
    style: str
    labels: Sequence[str] = ()


@dataclass
class FigureSpec:
    viewbox: Tuple[float, float, float, float]  # xmin, ymin, width, height in data units
    layers: List[Layer] = field(default_factory=list)
    title: str = ""

    def to_svg(self) -> str:
        x0, y0, w, h = self.viewbox
        s = SIZE / max(w, h)

        def tx(P):
            P = np.atleast_2d(np.asarray(P, float))
            if not np.all(np.isfinite(P)):
                raise ValueError("figure coordinates must be finite")
            # flip y so the picture has the usual orientation
            return np.column_stack([(P[:, 0] - x0) * s, (y0 + h - P[:, 1]) * s])

        def pts(P):
            return " ".join(f"{x:.3f},{y:.3f}" for x, y in tx(P))

        out = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * s:.0f}" height="{h * s:.0f}" '
            f'viewBox="0 0 {w * s:.3f} {h * s:.3f}">',
        ]
        if self.title:
            out.append(f"<title>{escape(self.title)}</title>")
        for layer in self.layers:
            if layer.kind in ("polyline", "polygon"):
                out.append(f'<{layer.kind} points="{pts(layer.coords)}" style={quoteattr(layer.style)}/>')
            elif layer.kind == "points":
                for k, (x, y) in enumerate(tx(layer.coords)):
                    out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="3" style={quoteattr(layer.style)}/>')
                    if k < len(layer.labels):
                        out.append(f'<text x="{x + 5:.3f}" y="{y - 5:.3f}" font-size="12">{escape(layer.labels[k])}</text>')
            elif layer.kind == "text":
                (x, y), = tx(layer.coords)
                out.append(f'<text x="{x:.3f}" y="{y:.3f}" font-size="12" style={quoteattr(layer.style)}>'
                           f"{escape(layer.labels[0])}</text>")
            else:
                raise ValueError(f"unknown layer kind {layer.kind!r}")
        out.append("</svg>")
        return "\n".join(out) + "\n"


def unit_sphere_polyline(norm: NormSpec, center=(0.0, 0.0), radius: float = 1.0, n: int = 720) -> np.ndarray:
    ang = np.linspace(0.0, 2.0 * math.pi, n + 1)
    U = np.column_stack([np.cos(ang), np.sin(ang)])
    return np.asarray(center, float) + radius * U / norm_batch(norm, U)[:, None]


def _bbox(*arrays, pad=0.1):
    P = np.vstack([np.atleast_2d(a) for a in arrays])
    lo, hi = P.min(axis=0), P.max(axis=0)
    span = max(hi - lo) * (1 + 2 * pad)
    mid = 0.5 * (lo + hi)
    return (mid[0] - span / 2, mid[1] - span / 2, span, span)


def circumcircle_figure(norm: NormSpec, a, b, c, center, radius: float) -> FigureSpec:
    """Triangle, its norm circumcircle and the unit sphere around it."""
    tri = np.array([a, b, c], float)
    circle = unit_sphere_polyline(norm, center, radius)
    unit = unit_sphere_polyline(norm, center, 1.0)
    fig = FigureSpec(_bbox(circle, unit, tri), title="circumcircle of an equilateral triple")
    fig.layers += [
        Layer("polyline", unit, "fill:none;stroke:#999;stroke-dasharray:4 3"),
        Layer("polyline", circle, "fill:none;stroke:#1f5fa8;stroke-width:1.5"),
        Layer("polygon", tri, "fill:none;stroke:#b22;stroke-width:1.5"),
        Layer("points", tri, "fill:#b22", ("a", "b", "c")),
        Layer("points", np.asarray(center, float)[None], "fill:#1f5fa8", ("s",)),
    ]
    return fig


def profile_figure(t: Sequence[float], r: Sequence[float], roots: Sequence[float] = ()) -> FigureSpec:
    """``r(t)`` across the sweep with the level r = 1 and the located roots."""
    t = np.asarray(t, float)
    r = np.asarray(r, float)
    tspan = max(t.max() - t.min(), 1e-9)
    rmax = max(float(r.max()), 1.2)
    # stretch t to a square-ish panel
    k = rmax / tspan
    curve = np.column_stack([(t - t.min()) * k, r])
    fig = FigureSpec((-0.05 * rmax, -0.1 * rmax, 1.1 * rmax, 1.2 * rmax), title="r(t) along the section sweep")
    fig.layers += [
        Layer("polyline", np.array([[0.0, 0.0], [rmax, 0.0]]), "stroke:#000"),
        Layer("polyline", np.array([[0.0, 1.0], [rmax, 1.0]]), "stroke:#999;stroke-dasharray:4 3"),
        Layer("polyline", curve, "fill:none;stroke:#1f5fa8;stroke-width:1.5"),
    ]
    if len(roots):
        R = np.column_stack([(np.asarray(roots, float) - t.min()) * k, np.ones(len(roots))])
        fig.layers.append(Layer("points", R, "fill:#b22", tuple(f"t={x:.4g}" for x in roots)))
    return fig
