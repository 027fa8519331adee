"""Small SVG 1.1 chart writer (line panels and grouped bars), no plotting deps."""

from __future__ import annotations

import math
from typing import Optional, Sequence

COLORS = [
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#ff7f0e",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
]


def _escape(text: str) -> str:
    return (
        str(text).replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _fmt(value: float) -> str:
    if value == 0:
        return "0"
    if abs(value) >= 1e4 or abs(value) < 1e-2:
        return f"{value:.1e}"
    return f"{value:.3g}"


def nice_ticks(lo: float, hi: float, n: int = 5) -> list:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


class Canvas:
    def __init__(self, width: int, height: int, title: str = ""):
        self.width = width
        self.height = height
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        ]
        if title:
            self.text(width / 2, 24, title, size=16, anchor="middle")

    def text(self, x, y, s, size=12, anchor="start", color="#000000", rotate=None):
        transform = f' transform="rotate({rotate} {x:.2f} {y:.2f})"' if rotate is not None else ""
        self.parts.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-family="Arial, sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}" fill="{color}"{transform}>{_escape(s)}</text>'
        )

    def line(self, x1, y1, x2, y2, color="#000000", width=1.0):
        self.parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{color}" stroke-width="{width}"/>'
        )

    def rect(self, x, y, w, h, fill):
        self.parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" fill="{fill}"/>')

    def polyline(self, points, color, width=1.5):
        if not points:
            return
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"/>'
        )

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>", ""])


class Panel:
    """Axes box inside a canvas mapping data coordinates to pixels."""

    def __init__(self, canvas: Canvas, left, top, width, height, xlim, ylim,
                 title="", xlabel="", ylabel=""):
        self.c = canvas
        self.left, self.top, self.width, self.height = left, top, width, height
        self.xlim, self.ylim = xlim, ylim
        if title:
            canvas.text(left + width / 2, top - 10, title, size=13, anchor="middle")
        if xlabel:
            canvas.text(left + width / 2, top + height + 38, xlabel, anchor="middle")
        if ylabel:
            canvas.text(left - 52, top + height / 2, ylabel, anchor="middle", rotate=-90)

    def px(self, x):
        lo, hi = self.xlim
        return self.left + (x - lo) / (hi - lo) * self.width

    def py(self, y):
        lo, hi = self.ylim
        return self.top + self.height - (y - lo) / (hi - lo) * self.height

    def axes(self, xticks=True):
        c = self.c
        bottom = self.top + self.height
        for v in nice_ticks(*self.ylim):
            y = self.py(v)
            c.line(self.left, y, self.left + self.width, y, color="#e0e0e0")
            c.text(self.left - 6, y + 4, _fmt(v), size=10, anchor="end")
        if xticks:
            for v in nice_ticks(*self.xlim):
                x = self.px(v)
                c.line(x, bottom, x, bottom + 5)
                c.text(x, bottom + 18, _fmt(v), size=10, anchor="middle")
        c.line(self.left, bottom, self.left + self.width, bottom, width=1.5)
        c.line(self.left, self.top, self.left, bottom, width=1.5)


def _limits(values: Sequence[float], pad: float = 0.05):
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return (0.0, 1.0)
    lo, hi = min(finite), max(finite)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    return (lo - pad * span, hi + pad * span)


def line_panels(title: str, panels: Sequence[dict], width: int = 1100, height: int = 460) -> str:
    """Side-by-side line panels.

    Each panel dict has ``x`` (sequence), ``series`` (list of (label, ys)),
    plus optional ``title``, ``xlabel``, ``ylabel`` and ``legend`` (bool).
    """
    canvas = Canvas(width, height, title)
    n = len(panels)
    slot = width / n
    for i, spec in enumerate(panels):
        xs = list(spec["x"])
        all_y = [v for _, ys in spec["series"] for v in ys]
        legend = spec.get("legend", False)
        left = i * slot + 75
        pw = slot - 75 - (110 if legend else 30)
        panel = Panel(canvas, left, 60, pw, height - 130, _limits(xs, 0.0), _limits(all_y),
                      spec.get("title", ""), spec.get("xlabel", ""), spec.get("ylabel", ""))
        panel.axes()
        if spec.get("zero_line") and panel.ylim[0] < 0 < panel.ylim[1]:
            canvas.line(panel.left, panel.py(0), panel.left + pw, panel.py(0), color="#888888")
        for s, (label, ys) in enumerate(spec["series"]):
            color = COLORS[s % len(COLORS)]
            pts = [(panel.px(x), panel.py(y)) for x, y in zip(xs, ys) if math.isfinite(y)]
            canvas.polyline(pts, color)
            if legend:
                ly = 70 + 18 * s
                canvas.line(left + pw + 12, ly, left + pw + 32, ly, color=color, width=2)
                canvas.text(left + pw + 36, ly + 4, label, size=11)
    return canvas.render()


def grouped_bars(title: str, groups: Sequence, series: Sequence[str], values, errors,
                 annotations, ylabel: str = "", xlabel: str = "", hline: Optional[float] = None,
                 width: int = 1100, height: int = 520) -> str:
    """Grouped bar chart with symmetric error bars.

    ``values[s][g]`` / ``errors[s][g]`` may be None (bar omitted);
    ``annotations[s][g]`` is drawn above the bar when non-empty.
    """
    canvas = Canvas(width, height, title)
    tops = [
        (v or 0.0) + (e or 0.0)
        for vs, es in zip(values, errors)
        for v, e in zip(vs, es)
    ]
    ymax = max(tops + ([hline] if hline else []) + [1.0]) * 1.15
    panel = Panel(canvas, 80, 60, width - 300, height - 140, (0.0, float(len(groups))), (0.0, ymax),
                  "", xlabel, ylabel)
    panel.axes(xticks=False)
    n = max(len(series), 1)
    bar_w = 0.8 / n
    for g, label in enumerate(groups):
        canvas.text(panel.px(g + 0.5), panel.top + panel.height + 18, str(label), size=11, anchor="middle")
        for s in range(len(series)):
            v = values[s][g]
            x0 = g + 0.1 + s * bar_w
            note = annotations[s][g]
            if v is not None and math.isfinite(v):
                canvas.rect(panel.px(x0), panel.py(v), panel.px(x0 + bar_w) - panel.px(x0),
                            panel.py(0) - panel.py(v), COLORS[s % len(COLORS)])
                e = errors[s][g]
                xm = panel.px(x0 + bar_w / 2)
                top = v
                if e is not None and math.isfinite(e) and e > 0:
                    canvas.line(xm, panel.py(v - e), xm, panel.py(v + e), width=1.2)
                    canvas.line(xm - 4, panel.py(v + e), xm + 4, panel.py(v + e), width=1.2)
                    canvas.line(xm - 4, panel.py(v - e), xm + 4, panel.py(v - e), width=1.2)
                    top = v + e
            else:
                xm = panel.px(x0 + bar_w / 2)
                top = 0.0
            if note:
                canvas.text(xm, panel.py(top) - 6, note, size=9, anchor="middle")
    if hline is not None:
        canvas.line(panel.left, panel.py(hline), panel.left + panel.width, panel.py(hline), color="#888888")
    for s, name in enumerate(series):
        ly = 80 + 20 * s
        canvas.rect(width - 205, ly - 9, 14, 12, COLORS[s % len(COLORS)])
        canvas.text(width - 185, ly + 1, name, size=11)
    return canvas.render()
