"""Tiny deterministic SVG line plots (no plotting dependency).

Good enough for the report figures: multiple polyline/marker series on a
linear axis box with ticks.  All coordinates are emitted with fixed
precision so identical data produce byte-identical files.
"""

from __future__ import annotations

import math

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_W, _H = 640.0, 440.0
_ML, _MR, _MT, _MB = 70.0, 20.0, 34.0, 52.0


def _nice_ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


class LinePlot:
    """Accumulate (x, y) series and write them as one SVG image."""

    def __init__(self, title="", xlabel="", ylabel=""):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.series = []

    def add(self, x, y, label="", markers=False):
        pts = [(float(a), float(b)) for a, b in zip(x, y)
               if math.isfinite(a) and math.isfinite(b)]
        self.series.append((pts, label, markers))
        return self

    def _limits(self):
        xs = [p[0] for pts, _, _ in self.series for p in pts] or [0.0, 1.0]
        ys = [p[1] for pts, _, _ in self.series for p in pts] or [0.0, 1.0]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        if x1 == x0:
            x1 = x0 + 1.0
        if y1 == y0:
            y1 = y0 + 1.0
        pad = 0.04 * (y1 - y0)
        return x0, x1, y0 - pad, y1 + pad

    def write(self, path):
        x0, x1, y0, y1 = self._limits()
        pw, ph = _W - _ML - _MR, _H - _MT - _MB

        def px(x):
            return _ML + (x - x0) / (x1 - x0) * pw

        def py(y):
            return _MT + (y1 - y) / (y1 - y0) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W:g}" '
            f'height="{_H:g}" viewBox="0 0 {_W:g} {_H:g}">',
            f'<rect x="0" y="0" width="{_W:g}" height="{_H:g}" fill="white"/>',
            f'<rect x="{_ML:g}" y="{_MT:g}" width="{pw:g}" height="{ph:g}" '
            'fill="none" stroke="#333" stroke-width="1"/>',
        ]
        for t in _nice_ticks(x0, x1):
            X = px(t)
            out.append(f'<line x1="{X:.2f}" y1="{_MT + ph:.2f}" x2="{X:.2f}" '
                       f'y2="{_MT + ph + 5:.2f}" stroke="#333"/>')
            out.append(f'<text x="{X:.2f}" y="{_MT + ph + 18:.2f}" '
                       f'font-size="11" text-anchor="middle">{t:.6g}</text>')
        for t in _nice_ticks(y0, y1):
            Y = py(t)
            out.append(f'<line x1="{_ML - 5:.2f}" y1="{Y:.2f}" x2="{_ML:.2f}" '
                       f'y2="{Y:.2f}" stroke="#333"/>')
            out.append(f'<text x="{_ML - 8:.2f}" y="{Y + 4:.2f}" font-size="11" '
                       f'text-anchor="end">{t:.6g}</text>')
        if self.title:
            out.append(f'<text x="{_W / 2:.1f}" y="20" font-size="14" '
                       f'text-anchor="middle">{self.title}</text>')
        if self.xlabel:
            out.append(f'<text x="{_ML + pw / 2:.1f}" y="{_H - 12:.1f}" '
                       f'font-size="12" text-anchor="middle">{self.xlabel}</text>')
        if self.ylabel:
            out.append(f'<text x="16" y="{_MT + ph / 2:.1f}" font-size="12" '
                       f'text-anchor="middle" transform="rotate(-90 16 '
                       f'{_MT + ph / 2:.1f})">{self.ylabel}</text>')
        for i, (pts, label, markers) in enumerate(self.series):
            color = _COLORS[i % len(_COLORS)]
            if len(pts) > 1 and not markers:
                path_d = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
                out.append(f'<polyline points="{path_d}" fill="none" '
                           f'stroke="{color}" stroke-width="1.6"/>')
            else:
                for x, y in pts:
                    out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" '
                               f'r="3" fill="{color}"/>')
            if label:
                ly = _MT + 16 + 16 * i
                out.append(f'<line x1="{_ML + pw - 120:.1f}" y1="{ly - 4:.1f}" '
                           f'x2="{_ML + pw - 96:.1f}" y2="{ly - 4:.1f}" '
                           f'stroke="{color}" stroke-width="2"/>')
                out.append(f'<text x="{_ML + pw - 90:.1f}" y="{ly:.1f}" '
                           f'font-size="11">{label}</text>')
        out.append("</svg>")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(out) + "\n")
