"""Minimal native SVG line/point plots with log axes.

Only what the runner needs: log or linear axes with decade ticks, point
series with optional error bars, straight reference lines, shaded bands and
text annotations.  Output is a deterministic function of the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=80, right=20, top=40, bottom=60)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Series:
    name: str
    x: np.ndarray
    y: np.ndarray
    err: Optional[np.ndarray] = None
    style: str = "points"  # points | line | dashed
    color: Optional[str] = None


@dataclass
class Band:
    x: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    color: str = "#1f77b4"


@dataclass
class Figure:
    title: str
    xlabel: str
    ylabel: str
    logx: bool = True
    logy: bool = True
    series: list = field(default_factory=list)
    bands: list = field(default_factory=list)
    notes: list = field(default_factory=list)


def _fmt(v):
    return f"{v:.2f}"


def _finite(xs, log):
    xs = np.asarray(xs, dtype=float)
    ok = np.isfinite(xs)
    if log:
        ok &= xs > 0
    return xs[ok]


def _range(values, log):
    if values.size == 0:
        return (1.0, 10.0) if log else (0.0, 1.0)
    lo, hi = float(values.min()), float(values.max())
    if log:
        lo, hi = math.log10(lo), math.log10(hi)
        if hi - lo < 1e-9:
            lo, hi = lo - 0.5, hi + 0.5
        pad = 0.05 * (hi - lo)
        return lo - pad, hi + pad
    if hi - lo < 1e-12 * max(1.0, abs(hi)):
        lo, hi = lo - 0.5 * max(abs(lo), 1.0), hi + 0.5 * max(abs(hi), 1.0)
    pad = 0.08 * (hi - lo)
    return lo - pad, hi + pad


def _ticks(lo, hi, log):
    if log:
        return [float(k) for k in range(math.ceil(lo), math.floor(hi) + 1)]
    step = 10 ** math.floor(math.log10((hi - lo) / 4))
    for mult in (1, 2, 5, 10):
        if (hi - lo) / (step * mult) <= 6:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    return [start + k * step for k in range(int((hi - start) / step) + 1)]


def render(fig: Figure) -> str:
    """SVG document for ``fig``."""
    xs = [s.x for s in fig.series] + [b.x for b in fig.bands]
    ys = [s.y for s in fig.series] + [b.lower for b in fig.bands] + [b.upper for b in fig.bands]
    ys += [s.y - s.err for s in fig.series if s.err is not None]
    ys += [s.y + s.err for s in fig.series if s.err is not None]
    allx = _finite(np.concatenate([np.ravel(x) for x in xs]) if xs else [], fig.logx)
    ally = _finite(np.concatenate([np.ravel(y) for y in ys]) if ys else [], fig.logy)
    x0, x1 = _range(allx, fig.logx)
    y0, y1 = _range(ally, fig.logy)
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x):
        v = math.log10(x) if fig.logx else x
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def py(y):
        v = math.log10(y) if fig.logy else y
        return MARGIN["top"] + (1 - (v - y0) / (y1 - y0)) * ph

    def ok(x, y):
        good = math.isfinite(x) and math.isfinite(y)
        if fig.logx:
            good = good and x > 0
        if fig.logy:
            good = good and y > 0
        return good

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{WIDTH / 2:.2f}" y="22" text-anchor="middle" font-size="14">'
           f'{escape(fig.title)}</text>']

    out.append('<g class="axes" stroke="black" fill="none">')
    out.append(f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}"/>')
    out.append("</g>")
    out.append('<g class="ticks" font-size="11">')
    for v in _ticks(x0, x1, fig.logx):
        x = MARGIN["left"] + (v - x0) / (x1 - x0) * pw
        label = f"1e{int(v)}" if fig.logx else f"{v:g}"
        out.append(f'<line x1="{_fmt(x)}" y1="{MARGIN["top"] + ph}" x2="{_fmt(x)}" '
                   f'y2="{MARGIN["top"] + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(x)}" y="{MARGIN["top"] + ph + 18}" '
                   f'text-anchor="middle">{label}</text>')
    for v in _ticks(y0, y1, fig.logy):
        y = MARGIN["top"] + (1 - (v - y0) / (y1 - y0)) * ph
        label = f"1e{int(v)}" if fig.logy else f"{v:.6g}"
        out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{_fmt(y)}" x2="{MARGIN["left"]}" '
                   f'y2="{_fmt(y)}" stroke="black"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{_fmt(y + 4)}" '
                   f'text-anchor="end">{label}</text>')
    out.append("</g>")
    out.append(f'<text x="{MARGIN["left"] + pw / 2:.2f}" y="{HEIGHT - 15}" '
               f'text-anchor="middle">{escape(fig.xlabel)}</text>')
    out.append(f'<text x="18" y="{MARGIN["top"] + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {MARGIN["top"] + ph / 2:.2f})">'
               f'{escape(fig.ylabel)}</text>')

    for b in fig.bands:
        upper = [(px(x), py(y)) for x, y in zip(b.x, b.upper) if ok(x, y)]
        lower = [(px(x), py(y)) for x, y in zip(b.x, b.lower) if ok(x, y)]
        if upper and lower:
            pts = " ".join(f"{_fmt(a)},{_fmt(c)}" for a, c in upper + lower[::-1])
            out.append(f'<polygon class="band" points="{pts}" fill="{b.color}" '
                       f'fill-opacity="0.2" stroke="none"/>')

    for k, s in enumerate(fig.series):
        color = s.color or COLORS[k % len(COLORS)]
        pts = [(px(x), py(y)) for x, y in zip(s.x, s.y) if ok(x, y)]
        out.append(f'<g class="series" data-name="{escape(s.name)}">')
        if s.style in ("line", "dashed") and len(pts) > 1:
            dash = ' stroke-dasharray="6,4"' if s.style == "dashed" else ""
            path = " ".join(f"{_fmt(a)},{_fmt(c)}" for a, c in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" '
                       f'stroke-width="1.5"{dash}/>')
        else:
            for i, (x, y) in enumerate(zip(s.x, s.y)):
                if not ok(x, y):
                    continue
                if s.err is not None and math.isfinite(s.err[i]):
                    lo, hi = y - s.err[i], y + s.err[i]
                    if not fig.logy or lo > 0:
                        out.append(f'<line x1="{_fmt(px(x))}" y1="{_fmt(py(lo))}" '
                                   f'x2="{_fmt(px(x))}" y2="{_fmt(py(hi))}" stroke="{color}"/>')
                out.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3" '
                           f'fill="{color}"/>')
        out.append("</g>")

    legend_y = MARGIN["top"] + 16
    for k, s in enumerate(fig.series):
        color = s.color or COLORS[k % len(COLORS)]
        y = legend_y + 16 * k
        out.append(f'<rect x="{MARGIN["left"] + 10}" y="{y - 8}" width="10" height="10" '
                   f'fill="{color}"/>')
        out.append(f'<text x="{MARGIN["left"] + 26}" y="{y + 1}">{escape(s.name)}</text>')
    for k, note in enumerate(fig.notes):
        y = MARGIN["top"] + ph - 10 - 16 * (len(fig.notes) - 1 - k)
        out.append(f'<text class="note" x="{MARGIN["left"] + pw - 10}" y="{y}" '
                   f'text-anchor="end">{escape(note)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def power_line(x, exponent, log_constant) -> np.ndarray:
    """y = exp(log_constant) * x**exponent evaluated at the ends of ``x``."""
    x = np.asarray(x, dtype=float)
    return np.exp(log_constant) * x ** exponent
