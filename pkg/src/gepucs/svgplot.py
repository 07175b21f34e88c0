"""Measured-vs-predicted scattergrams as standalone SVG."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 480, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 60


def nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    x = first
    while x <= hi + 1e-9 * step:
        ticks.append(round(x, 10))
        x += step
    return ticks


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def scatter_svg(measured, predicted, r2: float | None = None,
                title: str = "Measured vs. predicted UCS") -> str:
    """One ``<circle class="marker">`` per pair plus a 1:1 reference line."""
    measured = [float(x) for x in measured]
    predicted = [float(y) for y in predicted]
    finite = [v for v in measured + predicted if math.isfinite(v)]
    lo, hi = (min(finite), max(finite)) if finite else (0.0, 1.0)
    pad = 0.05 * (hi - lo) if hi > lo else 1.0
    lo, hi = lo - pad, hi + pad

    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    sx = lambda v: LEFT + (v - lo) / (hi - lo) * pw
    sy = lambda v: TOP + ph - (v - lo) / (hi - lo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="{TOP / 2 + 5}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in nice_ticks(lo, hi):
        x, y = sx(t), sy(t)
        out.append(f'<line class="tick" x1="{x:.2f}" y1="{TOP + ph}" x2="{x:.2f}" '
                   f'y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{TOP + ph + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>')
        out.append(f'<line class="tick" x1="{LEFT - 5}" y1="{y:.2f}" x2="{LEFT}" '
                   f'y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y + 4:.2f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>')
    out.append(f'<line class="identity" x1="{sx(lo):.2f}" y1="{sy(lo):.2f}" '
               f'x2="{sx(hi):.2f}" y2="{sy(hi):.2f}" stroke="gray" stroke-dasharray="4 3"/>')
    for m, p in zip(measured, predicted):
        if not (math.isfinite(m) and math.isfinite(p)):
            continue
        out.append(f'<circle class="marker" cx="{sx(m):.2f}" cy="{sy(p):.2f}" r="3.5" '
                   f'fill="none" stroke="#1f4e9c"/>')
    out.append(f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 15}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">Measured UCS (MPa)</text>')
    out.append(f'<text x="18" y="{TOP + ph / 2}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12" '
               f'transform="rotate(-90 18 {TOP + ph / 2})">Predicted UCS (MPa)</text>')
    label = "n/a" if r2 is None else f"{r2:.4f}"
    out.append(f'<text class="r2" x="{LEFT + 10}" y="{TOP + 20}" '
               f'font-family="sans-serif" font-size="12">R² = {label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
