"""Dependency-free SVG scatter plots and box plots."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666")

_W, _H = 640, 420
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 160, 40, 60


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def _ticks(lo: float, hi: float, n: int = 5):
    if not math.isfinite(lo) or not math.isfinite(hi):
        return []
    if hi == lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / n))
    for mult in (1, 2, 5, 10):
        if (hi - lo) / (step * mult) <= n:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


class _Canvas:
    def __init__(self, title, xlabel, ylabel, xlim, ylim):
        self.parts = []
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.xlim = self._pad(*xlim)
        self.ylim = self._pad(*ylim)

    @staticmethod
    def _pad(lo, hi):
        if hi == lo:
            return lo - 1.0, hi + 1.0
        span = hi - lo
        return lo - 0.05 * span, hi + 0.05 * span

    def sx(self, x):
        lo, hi = self.xlim
        return _LEFT + (x - lo) / (hi - lo) * (_W - _LEFT - _RIGHT)

    def sy(self, y):
        lo, hi = self.ylim
        return _H - _BOTTOM - (y - lo) / (hi - lo) * (_H - _TOP - _BOTTOM)

    def add(self, element: str):
        self.parts.append(element)

    def axes(self, xticks=True):
        x0, x1 = _LEFT, _W - _RIGHT
        y0, y1 = _H - _BOTTOM, _TOP
        self.add(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="#333"/>')
        for t in _ticks(*self.ylim):
            y = self.sy(t)
            self.add(f'<line x1="{x0 - 4}" y1="{y:.2f}" x2="{x0}" y2="{y:.2f}" stroke="#333"/>')
            self.add(f'<text x="{x0 - 6}" y="{y + 4:.2f}" text-anchor="end" font-size="11">{_fmt(t)}</text>')
        if xticks:
            for t in _ticks(*self.xlim):
                x = self.sx(t)
                self.add(f'<line x1="{x:.2f}" y1="{y0}" x2="{x:.2f}" y2="{y0 + 4}" stroke="#333"/>')
                self.add(f'<text x="{x:.2f}" y="{y0 + 17}" text-anchor="middle" font-size="11">{_fmt(t)}</text>')
        cx = (x0 + x1) / 2
        self.add(f'<text x="{cx}" y="{_H - 15}" text-anchor="middle" font-size="13">{escape(self.xlabel)}</text>')
        cy = (y0 + y1) / 2
        self.add(f'<text x="18" y="{cy}" text-anchor="middle" font-size="13" '
                 f'transform="rotate(-90 18 {cy})">{escape(self.ylabel)}</text>')
        self.add(f'<text x="{cx}" y="24" text-anchor="middle" font-size="15">{escape(self.title)}</text>')

    def legend(self, labels):
        x = _W - _RIGHT + 15
        for k, label in enumerate(labels):
            y = _TOP + 10 + 20 * k
            color = PALETTE[k % len(PALETTE)]
            self.add(f'<rect x="{x}" y="{y - 9}" width="12" height="12" fill="{color}"/>')
            self.add(f'<text x="{x + 18}" y="{y + 1}" font-size="12">{escape(str(label))}</text>')

    def render(self) -> str:
        body = "\n".join(self.parts)
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">\n<rect width="100%" height="100%" fill="white"/>\n'
            f"{body}\n</svg>\n"
        )


def _limits(arrays):
    vals = np.concatenate([np.asarray(a, dtype=float) for a in arrays]) if arrays else np.array([])
    if vals.size == 0:
        raise ValueError("nothing to plot: empty selection")
    return float(vals.min()), float(vals.max())


def scatter(x, y, groups, title="", xlabel="", ylabel="") -> str:
    """Scatter ``y`` against ``x``; ``groups`` is a list of ``(label, mask)``
    pairs, one colour each (empty groups are dropped)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    groups = [(label, np.asarray(mask, dtype=bool)) for label, mask in groups]
    groups = [(label, mask) for label, mask in groups if mask.any()]
    if not groups:
        raise ValueError("nothing to plot: empty selection")
    sel = np.any([m for _, m in groups], axis=0)
    canvas = _Canvas(title, xlabel, ylabel, _limits([x[sel]]), _limits([y[sel]]))
    canvas.axes()
    for k, (_, mask) in enumerate(groups):
        color = PALETTE[k % len(PALETTE)]
        canvas.add(f'<g fill="{color}" fill-opacity="0.75">')
        for xi, yi in zip(x[mask], y[mask]):
            canvas.add(f'<circle cx="{canvas.sx(xi):.2f}" cy="{canvas.sy(yi):.2f}" r="2.5"/>')
        canvas.add("</g>")
    canvas.legend([label for label, _ in groups])
    return canvas.render()


def boxplot(groups, title="", ylabel="", xlabel="") -> str:
    """One box per ``(label, values)`` group; whiskers span min to max."""
    groups = [(label, np.asarray(v, dtype=float)) for label, v in groups]
    groups = [(label, v) for label, v in groups if v.size]
    if not groups:
        raise ValueError("nothing to plot: empty selection")
    canvas = _Canvas(title, xlabel, ylabel, (0.0, 1.0), _limits([v for _, v in groups]))
    canvas.xlim = (0.0, float(len(groups)))
    canvas.axes(xticks=False)
    half = 0.3
    for k, (label, v) in enumerate(groups):
        q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75])
        lo, hi = v.min(), v.max()
        cx = canvas.sx(k + 0.5)
        bw = canvas.sx(k + 0.5 + half) - cx
        color = PALETTE[k % len(PALETTE)]
        canvas.add(f'<line x1="{cx:.2f}" y1="{canvas.sy(lo):.2f}" x2="{cx:.2f}" y2="{canvas.sy(hi):.2f}" stroke="#333"/>')
        for w in (lo, hi):
            canvas.add(f'<line x1="{cx - bw / 2:.2f}" y1="{canvas.sy(w):.2f}" x2="{cx + bw / 2:.2f}" '
                       f'y2="{canvas.sy(w):.2f}" stroke="#333"/>')
        top, bottom = canvas.sy(q3), canvas.sy(q1)
        canvas.add(f'<rect x="{cx - bw:.2f}" y="{top:.2f}" width="{2 * bw:.2f}" '
                   f'height="{max(bottom - top, 0.5):.2f}" fill="{color}" fill-opacity="0.6" stroke="#333"/>')
        canvas.add(f'<line x1="{cx - bw:.2f}" y1="{canvas.sy(med):.2f}" x2="{cx + bw:.2f}" '
                   f'y2="{canvas.sy(med):.2f}" stroke="#000" stroke-width="2"/>')
        canvas.add(f'<text x="{cx:.2f}" y="{_H - _BOTTOM + 17}" text-anchor="middle" font-size="11">'
                   f"{escape(str(label))} (n={v.size})</text>")
    return canvas.render()
