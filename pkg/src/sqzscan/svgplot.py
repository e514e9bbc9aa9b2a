"""Minimal self-contained SVG line plots, so result curves can be eyeballed
without pulling in a plotting stack."""

from __future__ import annotations

from pathlib import Path

import numpy as np

_COLORS = ["#c0392b", "#2980b9", "#8e44ad", "#27ae60", "#f39c12", "#16a085"]


def line_plot(path, curves, title="", xlabel="", ylabel="",
              width=640, height=420) -> Path:
    """Write a simple multi-line SVG plot.

    ``curves`` is a list of (label, x, y) triples.  Axes are linear with
    auto-scaled ranges and a handful of tick labels.
    """
    ml, mr, mt, mb = 60, 20, 30, 45
    pw, ph = width - ml - mr, height - mt - mb

    xs = np.concatenate([np.asarray(x, float) for _, x, _ in curves])
    ys = np.concatenate([np.asarray(y, float) for _, _, y in curves])
    finite = np.isfinite(xs) & ~np.isnan(xs)
    x0, x1 = xs[finite].min(), xs[finite].max()
    yf = ys[np.isfinite(ys)]
    y0, y1 = yf.min(), yf.max()
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="#333"/>',
        f'<text x="{width / 2:.0f}" y="18" text-anchor="middle" '
        f'font-size="13">{title}</text>',
        f'<text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle">'
        f'{xlabel}</text>',
        f'<text x="14" y="{height / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {height / 2:.0f})">{ylabel}</text>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        parts.append(f'<text x="{sx(xv):.1f}" y="{mt + ph + 14}" '
                     f'text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<text x="{ml - 6}" y="{sy(yv) + 4:.1f}" '
                     f'text-anchor="end">{yv:.3g}</text>')
        parts.append(f'<line x1="{ml}" y1="{sy(yv):.1f}" x2="{ml + pw}" '
                     f'y2="{sy(yv):.1f}" stroke="#ddd"/>')

    for k, (label, x, y) in enumerate(curves):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        ok = np.isfinite(x) & np.isfinite(y)
        pts = " ".join(f"{sx(a):.1f},{sy(b):.1f}" for a, b in zip(x[ok], y[ok]))
        color = _COLORS[k % len(_COLORS)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        parts.append(f'<text x="{ml + pw - 6}" y="{mt + 16 + 14 * k}" '
                     f'text-anchor="end" fill="{color}">{label}</text>')
    parts.append("</svg>")

    path = Path(path)
    path.write_text("\n".join(parts))
    return path
