"""Minimal deterministic SVG line charts (800x500, no plotting dependencies)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence
from xml.sax.saxutils import escape

WIDTH = 800
HEIGHT = 500
MARGIN_LEFT = 70
MARGIN_RIGHT = 30
MARGIN_TOP = 40
MARGIN_BOTTOM = 55


@dataclass
class Series:
    xs: Sequence[float]
    ys: Sequence[float]
    color: str = "#1f77b4"
    width: float = 1.5
    dash: Optional[str] = None


@dataclass
class Band:
    xs: Sequence[float]
    lower: Sequence[float]
    upper: Sequence[float]
    color: str = "#d0d0d0"


@dataclass
class Marker:
    x: float
    y: float
    label: str
    color: str = "#000000"


@dataclass
class Chart:
    title: str
    xlabel: str
    ylabel: str
    series: list[Series] = field(default_factory=list)
    bands: list[Band] = field(default_factory=list)
    markers: list[Marker] = field(default_factory=list)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 10) + 0.0)
        v += step
    return ticks


def _tick_label(v: float) -> str:
    text = f"{v:.6g}"
    return "0" if text in ("-0", "0") else text


def render(chart: Chart) -> str:
    xs_all: list[float] = []
    ys_all: list[float] = []
    for s in chart.series:
        xs_all += list(s.xs)
        ys_all += list(s.ys)
    for b in chart.bands:
        xs_all += list(b.xs)
        ys_all += list(b.lower) + list(b.upper)
    for m in chart.markers:
        xs_all.append(m.x)
        ys_all.append(m.y)
    if not xs_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    pad = 0.05 * (y_hi - y_lo or 1.0)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    if x_hi == x_lo:
        x_hi = x_lo + 1.0

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x: float) -> float:
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16">{escape(chart.title)}</text>',
    ]
    for b in chart.bands:
        pts = [(px(x), py(y)) for x, y in zip(b.xs, b.upper)]
        pts += [(px(x), py(y)) for x, y in reversed(list(zip(b.xs, b.lower)))]
        coords = " ".join(f"{_fmt(a)},{_fmt(c)}" for a, c in pts)
        out.append(f'<polygon points="{coords}" fill="{b.color}" stroke="none"/>')

    # axes and ticks
    x0, y0 = MARGIN_LEFT, MARGIN_TOP + plot_h
    out.append(
        f'<path d="M{x0},{MARGIN_TOP} L{x0},{y0} L{x0 + plot_w},{y0}" '
        f'fill="none" stroke="#000000" stroke-width="1"/>'
    )
    for v in nice_ticks(x_lo, x_hi):
        p = _fmt(px(v))
        out.append(f'<line x1="{p}" y1="{y0}" x2="{p}" y2="{y0 + 5}" stroke="#000000"/>')
        out.append(
            f'<text x="{p}" y="{y0 + 20}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="12">{_tick_label(v)}</text>'
        )
    for v in nice_ticks(y_lo, y_hi):
        p = _fmt(py(v))
        out.append(f'<line x1="{x0 - 5}" y1="{p}" x2="{x0}" y2="{p}" stroke="#000000"/>')
        out.append(
            f'<text x="{x0 - 8}" y="{p}" text-anchor="end" dominant-baseline="middle" '
            f'font-family="sans-serif" font-size="12">{_tick_label(v)}</text>'
        )
    out.append(
        f'<text x="{MARGIN_LEFT + plot_w // 2}" y="{HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{escape(chart.xlabel)}</text>'
    )
    out.append(
        f'<text x="18" y="{MARGIN_TOP + plot_h // 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14" '
        f'transform="rotate(-90 18 {MARGIN_TOP + plot_h // 2})">{escape(chart.ylabel)}</text>'
    )

    for s in chart.series:
        coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(s.xs, s.ys))
        dash = f' stroke-dasharray="{s.dash}"' if s.dash else ""
        out.append(
            f'<polyline points="{coords}" fill="none" stroke="{s.color}" '
            f'stroke-width="{s.width}"{dash}/>'
        )
    for m in chart.markers:
        cx, cy = _fmt(px(m.x)), _fmt(py(m.y))
        out.append(f'<circle cx="{cx}" cy="{cy}" r="4" fill="{m.color}"/>')
        out.append(
            f'<text x="{_fmt(px(m.x) + 8)}" y="{_fmt(py(m.y) - 8)}" font-family="sans-serif" '
            f'font-size="12">{escape(m.label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
