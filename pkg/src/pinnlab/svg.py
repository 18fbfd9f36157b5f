"""Standalone SVG line charts with no plotting dependency."""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
DASHES = ("", "6,3", "2,2", "8,3,2,3")

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 80, 160, 40, 60


def _ticks(lo, hi, log):
    if log:
        return [10.0 ** e for e in range(math.floor(lo), math.ceil(hi) + 1) if lo <= e <= hi] or [10.0 ** lo]
    span = hi - lo or 1.0
    step = 10 ** math.floor(math.log10(span / 5))
    for m in (1, 2, 5, 10):
        if span / (step * m) <= 6:
            step *= m
            break
    first = math.ceil(lo / step) * step
    return [first + i * step for i in range(int((hi - first) / step + 1e-9) + 1)]


def write_svg_plot(series, axes: str = "linear", path="plot.svg", *, title="", xlabel="x", ylabel="y"):
    """Render ``series`` (dicts with ``label``, ``x``, ``y``) as one polyline each.

    Series with a ``markers_only`` flag are drawn as markers without a line.
    Under ``axes="loglog"`` every coordinate must be strictly positive.
    """
    if axes not in ("linear", "loglog"):
        raise ValueError(f"axes must be 'linear' or 'loglog', got {axes!r}")
    series = [s for s in series]
    if not series or any(len(s["x"]) == 0 for s in series):
        raise ValueError("need at least one non-empty series")
    log = axes == "loglog"
    xs_all, ys_all = [], []
    for s in series:
        if len(s["x"]) != len(s["y"]):
            raise ValueError(f"series {s.get('label')!r}: x and y lengths differ")
        for x, y in zip(s["x"], s["y"]):
            if log and (x <= 0 or y <= 0):
                raise ValueError(f"series {s.get('label')!r}: non-positive value on log axes")
            xs_all.append(math.log10(x) if log else float(x))
            ys_all.append(math.log10(y) if log else float(y))
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all), max(ys_all)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(v):
        return LEFT + (v - x0) / (x1 - x0) * pw

    def py(v):
        return TOP + ph - (v - y0) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1, log):
        v = math.log10(t) if log else t
        parts.append(f'<line x1="{px(v):.2f}" y1="{TOP + ph}" x2="{px(v):.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{px(v):.2f}" y="{TOP + ph + 18}" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y0, y1, log):
        v = math.log10(t) if log else t
        parts.append(f'<line x1="{LEFT - 5}" y1="{py(v):.2f}" x2="{LEFT}" y2="{py(v):.2f}" stroke="black"/>')
        parts.append(f'<text x="{LEFT - 8}" y="{py(v) + 4:.2f}" text-anchor="end">{t:.3g}</text>')
    if title:
        parts.append(f'<text x="{LEFT + pw / 2}" y="{TOP - 14}" text-anchor="middle" font-size="14">{escape(title)}</text>')
    parts.append(f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 14}" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(f'<text x="18" y="{TOP + ph / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {TOP + ph / 2})">{escape(ylabel)}</text>')

    for i, s in enumerate(series):
        color = COLORS[i % len(COLORS)]
        dash = DASHES[i % len(DASHES)]
        coords = [(px(math.log10(x) if log else x), py(math.log10(y) if log else y))
                  for x, y in zip(s["x"], s["y"])]
        if len(coords) > 1 and not s.get("markers_only"):
            pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in coords)
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"{dash_attr}/>')
        if len(coords) == 1 or s.get("markers_only"):
            parts.extend(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3.5" fill="{color}"/>' for a, b in coords)
        ly = TOP + 14 + 18 * i
        parts.append(f'<line x1="{LEFT + pw + 12}" y1="{ly}" x2="{LEFT + pw + 36}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{LEFT + pw + 40}" y="{ly + 4}">{escape(str(s.get("label", f"series {i}")))}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path
