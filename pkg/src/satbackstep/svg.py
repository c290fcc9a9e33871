"""Minimal SVG line charts: a grid of panels with polylines and ticks.

Output is plain text with fixed number formatting so identical data gives
byte-identical files.
"""

import math
from xml.sax.saxutils import escape

import numpy as np

PANEL_W = 460
PANEL_H = 300
MARGIN = dict(left=64, right=16, top=30, bottom=42)
MAX_POINTS = 1200

# colour, dash pattern
STYLES = {
    "main": ("#1f77b4", None),
    "ref": ("#000000", "6,4"),
    "upper": ("#d62728", "2,3"),
    "lower": ("#d62728", "6,4"),
    "bound_hi": ("#000000", "6,4"),
    "bound_lo": ("#000000", "2,3"),
    "env": ("#2ca02c", "4,2"),
}


def nice_ticks(lo, hi, count=5):
    """Round tick positions covering ``[lo, hi]``."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(count, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        step = m * mag
        if step >= raw:
            break
    first = math.ceil(lo / step - 1e-9)
    last = math.floor(hi / step + 1e-9)
    return [k * step for k in range(first, last + 1)]


def _fmt(v):
    return f"{v:.1f}"


def _label(v):
    if v == 0:
        return "0"
    return f"{v:.4g}"


def _decimate(t, y):
    n = len(t)
    if n <= MAX_POINTS:
        return t, y
    idx = np.unique(np.linspace(0, n - 1, MAX_POINTS).round().astype(int))
    return t[idx], y[idx]


class Panel:
    """One chart: series are ``(t, y, style, label)``; hlines ``(y, style)``."""

    def __init__(self, title, ylabel):
        self.title = title
        self.ylabel = ylabel
        self.series = []
        self.hlines = []

    def line(self, t, y, style="main", label=None):
        self.series.append((np.asarray(t, float), np.asarray(y, float), style, label))
        return self

    def hline(self, y, style="bound_hi"):
        self.hlines.append((float(y), style))
        return self

    def _ranges(self):
        ts = [s[0] for s in self.series if len(s[0])]
        ys = [s[1][np.isfinite(s[1])] for s in self.series if len(s[1])]
        ys += [np.array([h[0]]) for h in self.hlines]
        t_lo = min((float(t.min()) for t in ts), default=0.0)
        t_hi = max((float(t.max()) for t in ts), default=1.0)
        ys = [y for y in ys if y.size]
        y_lo = min((float(y.min()) for y in ys), default=-1.0)
        y_hi = max((float(y.max()) for y in ys), default=1.0)
        if t_hi <= t_lo:
            t_hi = t_lo + 1.0
        pad = 0.05 * (y_hi - y_lo) if y_hi > y_lo else max(abs(y_hi), 1.0) * 0.1
        return t_lo, t_hi, y_lo - pad, y_hi + pad

    def render(self, x0, y0):
        t_lo, t_hi, y_lo, y_hi = self._ranges()
        left = x0 + MARGIN["left"]
        top = y0 + MARGIN["top"]
        w = PANEL_W - MARGIN["left"] - MARGIN["right"]
        h = PANEL_H - MARGIN["top"] - MARGIN["bottom"]

        def px(t):
            return left + (t - t_lo) / (t_hi - t_lo) * w

        def py(y):
            return top + (y_hi - y) / (y_hi - y_lo) * h

        out = [f'<g font-family="sans-serif" font-size="11">']
        out.append(f'<text x="{_fmt(left + w / 2)}" y="{_fmt(y0 + 18)}" text-anchor="middle" '
                   f'font-size="13">{escape(self.title)}</text>')
        out.append(f'<rect x="{_fmt(left)}" y="{_fmt(top)}" width="{_fmt(w)}" height="{_fmt(h)}" '
                   f'fill="none" stroke="#888"/>')
        for tick in nice_ticks(t_lo, t_hi, 6):
            x = px(tick)
            out.append(f'<line x1="{_fmt(x)}" y1="{_fmt(top + h)}" x2="{_fmt(x)}" '
                       f'y2="{_fmt(top + h + 4)}" stroke="#888"/>')
            out.append(f'<text x="{_fmt(x)}" y="{_fmt(top + h + 16)}" '
                       f'text-anchor="middle">{_label(tick)}</text>')
        for tick in nice_ticks(y_lo, y_hi, 5):
            y = py(tick)
            out.append(f'<line x1="{_fmt(left - 4)}" y1="{_fmt(y)}" x2="{_fmt(left)}" '
                       f'y2="{_fmt(y)}" stroke="#888"/>')
            out.append(f'<text x="{_fmt(left - 6)}" y="{_fmt(y + 4)}" '
                       f'text-anchor="end">{_label(tick)}</text>')
        out.append(f'<text x="{_fmt(left + w / 2)}" y="{_fmt(top + h + 34)}" '
                   f'text-anchor="middle">t [s]</text>')
        out.append(f'<text x="{_fmt(x0 + 14)}" y="{_fmt(top + h / 2)}" text-anchor="middle" '
                   f'transform="rotate(-90 {_fmt(x0 + 14)} {_fmt(top + h / 2)})">'
                   f'{escape(self.ylabel)}</text>')
        for value, style in self.hlines:
            color, dash = STYLES[style]
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            y = py(value)
            out.append(f'<line x1="{_fmt(left)}" y1="{_fmt(y)}" x2="{_fmt(left + w)}" '
                       f'y2="{_fmt(y)}" stroke="{color}"{dash_attr}/>')
        for t, y, style, label in self.series:
            color, dash = STYLES[style]
            t, y = _decimate(t, y)
            ok = np.isfinite(y)
            pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(t[ok], y[ok]))
            if not pts:
                continue
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            title = f"<title>{escape(label)}</title>" if label else ""
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.4"{dash_attr} '
                       f'points="{pts}">{title}</polyline>')
        out.append("</g>")
        return "\n".join(out)


def render_figure(panels, columns=2, title=None):
    """Lay panels out on a grid and return the SVG document text."""
    rows = math.ceil(len(panels) / columns)
    head = 28 if title else 0
    width = columns * PANEL_W
    height = rows * PANEL_H + head
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    if title:
        parts.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="15">{escape(title)}</text>')
    for k, panel in enumerate(panels):
        r, c = divmod(k, columns)
        parts.append(panel.render(c * PANEL_W, head + r * PANEL_H))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
