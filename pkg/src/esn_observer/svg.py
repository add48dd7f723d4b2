"""Minimal SVG charts: sweep scatter/median line and topology bar chart.

Every plotted mark carries ``data-x``/``data-y`` attributes holding the raw
values, so a chart can be checked against its CSV by parsing the XML.
"""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 50


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _num(v: float) -> str:
    return f"{v:.6g}"


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
            f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>',
            f'<text x="16" y="{HEIGHT / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 16 {HEIGHT / 2:.1f})">{escape(ylabel)}</text>',
            f'<rect x="{LEFT}" y="{TOP}" width="{WIDTH - LEFT - RIGHT}" '
            f'height="{HEIGHT - TOP - BOTTOM}" fill="none" stroke="black"/>',
        ]

    def add(self, s: str) -> None:
        self.parts.append(s)

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _yaxis(ys: Sequence[float], log: bool):
    vals = [math.log10(y) if log else y for y in ys]
    lo, hi = min(vals), max(vals)
    if hi == lo:
        lo, hi = lo - 1, hi + 1
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    h = HEIGHT - TOP - BOTTOM

    def to_px(y: float) -> float:
        v = math.log10(y) if log else y
        return TOP + h * (hi - v) / (hi - lo)
    return to_px, lo, hi


def sweep_plot(parameter: str, points: Sequence[tuple[float, float]],
               medians: Sequence[tuple[float, float]], title: str | None = None) -> str:
    """Per-seed MSE points with the median curve; log y axis when all MSE > 0.

    Non-finite MSE values are left out of the chart.
    """
    pts = [(float(x), float(y)) for x, y in points if math.isfinite(y)]
    med = [(float(x), float(y)) for x, y in medians if math.isfinite(y)]
    canvas = _Canvas(title or f"MSE vs {parameter}", parameter, "MSE")
    if not pts:
        canvas.add(f'<text x="{WIDTH / 2}" y="{HEIGHT / 2}" text-anchor="middle">no finite results</text>')
        return canvas.render()
    xs = [x for x, _ in pts]
    ys = [y for _, y in pts]
    log = min(ys) > 0
    xlo, xhi = min(xs), max(xs)
    if xhi == xlo:
        xlo, xhi = xlo - 1, xhi + 1
    w = WIDTH - LEFT - RIGHT

    def xpx(x: float) -> float:
        return LEFT + w * (x - xlo) / (xhi - xlo)
    ypx, ylo, yhi = _yaxis(ys, log)

    for t in _ticks(xlo, xhi):
        canvas.add(f'<text x="{xpx(t):.2f}" y="{HEIGHT - BOTTOM + 16}" text-anchor="middle">{_num(t)}</text>')
    for t in _ticks(ylo, yhi):
        label = _num(10 ** t) if log else _num(t)
        y = TOP + (HEIGHT - TOP - BOTTOM) * (yhi - t) / (yhi - ylo)
        canvas.add(f'<text x="{LEFT - 6}" y="{y + 4:.2f}" text-anchor="end">{label}</text>')

    canvas.add('<g class="trials" fill="steelblue" fill-opacity="0.5">')
    for x, y in pts:
        canvas.add(f'<circle cx="{xpx(x):.2f}" cy="{ypx(y):.2f}" r="3" '
                   f'data-x="{x!r}" data-y="{y!r}"/>')
    canvas.add('</g>')
    if med:
        path = " ".join(f"{xpx(x):.2f},{ypx(y):.2f}" for x, y in med)
        canvas.add(f'<polyline class="median" points="{path}" fill="none" stroke="crimson" stroke-width="2"/>')
        canvas.add('<g class="medians" fill="crimson">')
        for x, y in med:
            canvas.add(f'<rect x="{xpx(x) - 3:.2f}" y="{ypx(y) - 3:.2f}" width="6" height="6" '
                       f'data-x="{x!r}" data-y="{y!r}"/>')
        canvas.add('</g>')
    return canvas.render()


def bar_chart(labels: Sequence[str], values: Sequence[float],
              references: Sequence[float | None] | None = None,
              title: str = "Median MSE by reservoir topology") -> str:
    """Bars for ``values``; optional reference values drawn as dashed markers."""
    refs = list(references) if references is not None else [None] * len(labels)
    finite = [v for v in values if math.isfinite(v)] + [r for r in refs if r is not None]
    canvas = _Canvas(title, "topology", "MSE")
    top = max(finite) * 1.15 if finite else 1.0
    h = HEIGHT - TOP - BOTTOM
    slot = (WIDTH - LEFT - RIGHT) / max(len(labels), 1)

    def ypx(y: float) -> float:
        return TOP + h * (1 - y / top)
    for t in _ticks(0.0, top):
        canvas.add(f'<text x="{LEFT - 6}" y="{ypx(t) + 4:.2f}" text-anchor="end">{_num(t)}</text>')
    for i, (label, v, ref) in enumerate(zip(labels, values, refs)):
        x = LEFT + i * slot + 0.2 * slot
        bw = 0.6 * slot
        if math.isfinite(v):
            canvas.add(f'<rect class="bar" x="{x:.2f}" y="{ypx(v):.2f}" width="{bw:.2f}" '
                       f'height="{TOP + h - ypx(v):.2f}" fill="steelblue" '
                       f'data-label="{escape(label)}" data-y="{v!r}"/>')
        if ref is not None:
            canvas.add(f'<line class="reference" x1="{x:.2f}" x2="{x + bw:.2f}" y1="{ypx(ref):.2f}" '
                       f'y2="{ypx(ref):.2f}" stroke="crimson" stroke-dasharray="4,3" stroke-width="2" '
                       f'data-label="{escape(label)}" data-y="{ref!r}"/>')
            canvas.add(f'<text x="{x + bw / 2:.2f}" y="{ypx(ref) - 5:.2f}" text-anchor="middle" '
                       f'fill="crimson">ref {_num(ref)}</text>')
        canvas.add(f'<text x="{x + bw / 2:.2f}" y="{HEIGHT - BOTTOM + 16}" '
                   f'text-anchor="middle">{escape(label)}</text>')
    if any(r is not None for r in refs):
        canvas.add(f'<text x="{WIDTH - RIGHT - 4}" y="{TOP + 14}" text-anchor="end" fill="crimson">'
                   'dashed: published single-run values</text>')
    return canvas.render()
