"""Tiny self-contained SVG line charts: axes, polylines, legend text.

Deliberately minimal; publication-quality plotting is out of scope.  Output
is deterministic (fixed palette, fixed float formatting, no timestamps).
"""

from __future__ import annotations

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
           "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f")

_W, _H = 840, 480
_ML, _MR, _MT, _MB = 64, 16, 36, 44


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def line_chart(title: str, x, curves) -> str:
    """Render curves = [(label, y-array), ...] against x into one SVG string."""
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(y, dtype=float) for _, y in curves]
    x_lo, x_hi = float(x.min()), float(x.max())
    y_lo = min(float(y.min()) for y in ys)
    y_hi = max(float(y.max()) for y in ys)
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    if x_hi == x_lo:
        x_hi = x_lo + 1.0

    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB

    def px(v):
        return _ML + (v - x_lo) / (x_hi - x_lo) * plot_w

    def py(v):
        return _MT + (y_hi - v) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.0f}" y="22" font-family="sans-serif" font-size="15" '
        f'text-anchor="middle">{title}</text>',
        f'<rect x="{_ML}" y="{_MT}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333"/>',
    ]
    # axis ticks: 5 per axis, value labels
    for i in range(5):
        xv = x_lo + (x_hi - x_lo) * i / 4
        yv = y_lo + (y_hi - y_lo) * i / 4
        parts.append(f'<text x="{_fmt(px(xv))}" y="{_H - _MB + 18}" font-family="sans-serif" '
                     f'font-size="11" text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<text x="{_ML - 6}" y="{_fmt(py(yv) + 4)}" font-family="sans-serif" '
                     f'font-size="11" text-anchor="end">{yv:.3g}</text>')
    for i, (label, y) in enumerate(zip((c[0] for c in curves), ys)):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(px(xx))},{_fmt(py(yy))}" for xx, yy in zip(x, y))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.2"/>')
        parts.append(f'<text x="{_ML + 10}" y="{_MT + 16 + 14 * i}" font-family="sans-serif" '
                     f'font-size="11" fill="{color}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_chart(path, title, x, curves):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(line_chart(title, x, curves))
