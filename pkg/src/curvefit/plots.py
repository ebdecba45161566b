"""Standalone SVG charts: scatter, line, histogram, box, QQ, residuals vs fitted.

Output is a pure function of the input (no timestamps, fixed number
formatting), so identical data always renders to identical bytes.
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyData, WriteError
from .metrics import normal_quantiles

KINDS = ("scatter", "line", "histogram", "box", "qq", "residuals_vs_fitted")
ARITY = {"scatter": 2, "line": 2, "residuals_vs_fitted": 2, "histogram": 1, "box": 1, "qq": 1}

WIDTH, HEIGHT = 480, 360
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 30, 45
PAD = 0.05


@dataclass(frozen=True)
class PlotRequest:
    kind: str
    columns: Sequence[str]
    output_path: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown plot kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if len(self.columns) != ARITY[self.kind]:
            raise ValueError(f"{self.kind} needs {ARITY[self.kind]} column(s), got {len(self.columns)}")


def _fmt(v):
    return f"{v:.2f}".rstrip("0").rstrip(".") if v == v else "nan"


def _label(v):
    s = f"{v:.6g}"
    return "0" if s in ("-0", "0") else s


def nice_ticks(lo, hi, target=5):
    """Round-numbered tick positions covering [lo, hi]."""
    span = hi - lo
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9)
    stop = math.floor(hi / step + 1e-9)
    return [k * step for k in range(start, stop + 1)]


def padded_range(values):
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi == lo:
        half = max(abs(lo) * 0.5, 0.5)
        return lo - half, hi + half
    pad = PAD * (hi - lo)
    return lo - pad, hi + pad


class _Canvas:
    def __init__(self, title, xrange, yrange, xlabel="", ylabel=""):
        self.title = title
        self.x0, self.x1 = xrange
        self.y0, self.y1 = yrange
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.body = []

    def px(self, x):
        return LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)

    def py(self, y):
        return HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)

    def add(self, element):
        self.body.append(element)

    def circle(self, x, y, r=3, cls="pt"):
        self.add(f'<circle class="{cls}" cx="{_fmt(self.px(x))}" cy="{_fmt(self.py(y))}" r="{r}"/>')

    def line(self, xa, ya, xb, yb, cls="ref"):
        self.add(
            f'<line class="{cls}" x1="{_fmt(self.px(xa))}" y1="{_fmt(self.py(ya))}" '
            f'x2="{_fmt(self.px(xb))}" y2="{_fmt(self.py(yb))}"/>'
        )

    def rect(self, xa, ya, xb, yb, cls="bar"):
        x, y = self.px(min(xa, xb)), self.py(max(ya, yb))
        w, h = abs(self.px(xb) - self.px(xa)), abs(self.py(yb) - self.py(ya))
        self.add(f'<rect class="{cls}" x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}"/>')

    def polyline(self, xs, ys):
        pts = " ".join(f"{_fmt(self.px(a))},{_fmt(self.py(b))}" for a, b in zip(xs, ys))
        self.add(f'<polyline class="curve" fill="none" points="{pts}"/>')

    def _axes(self, show_x_ticks=True):
        out = []
        xb, yb = HEIGHT - BOTTOM, LEFT
        out.append(f'<line class="axis" x1="{LEFT}" y1="{xb}" x2="{WIDTH - RIGHT}" y2="{xb}"/>')
        out.append(f'<line class="axis" x1="{yb}" y1="{TOP}" x2="{yb}" y2="{xb}"/>')
        if show_x_ticks:
            for t in nice_ticks(self.x0, self.x1):
                p = _fmt(self.px(t))
                out.append(f'<line class="tick" x1="{p}" y1="{xb}" x2="{p}" y2="{xb + 5}"/>')
                out.append(f'<text x="{p}" y="{xb + 18}" text-anchor="middle">{_label(t)}</text>')
        for t in nice_ticks(self.y0, self.y1):
            p = _fmt(self.py(t))
            out.append(f'<line class="tick" x1="{yb - 5}" y1="{p}" x2="{yb}" y2="{p}"/>')
            out.append(f'<text x="{yb - 8}" y="{p}" text-anchor="end" dominant-baseline="middle">{_label(t)}</text>')
        if self.xlabel:
            out.append(f'<text x="{(LEFT + WIDTH - RIGHT) // 2}" y="{HEIGHT - 8}" text-anchor="middle">{_esc(self.xlabel)}</text>')
        if self.ylabel:
            out.append(
                f'<text x="14" y="{(TOP + HEIGHT - BOTTOM) // 2}" text-anchor="middle" '
                f'transform="rotate(-90 14 {(TOP + HEIGHT - BOTTOM) // 2})">{_esc(self.ylabel)}</text>'
            )
        return out

    def render(self, show_x_ticks=True):
        head = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
            "<style>.axis,.tick{stroke:#000}.pt{fill:#1f77b4}.bar{fill:#9ecae1;stroke:#3182bd}"
            ".ref{stroke:#d62728;stroke-dasharray:4 3}.curve{stroke:#1f77b4;stroke-width:1.5}"
            ".box{fill:#9ecae1;stroke:#000}.whisker{stroke:#000}.outlier{fill:none;stroke:#000}</style>",
            f'<text x="{WIDTH // 2}" y="18" text-anchor="middle" font-size="13">{_esc(self.title)}</text>',
        ]
        return "\n".join(head + self._axes(show_x_ticks) + self.body + ["</svg>"]) + "\n"


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def histogram_bins(v):
    """Bin edges by Freedman-Diaconis, Sturges when the IQR is zero.

    Constant data gets one bin of unit width centred on the value.
    """
    v = np.asarray(v, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        return np.array([lo - 0.5, hi + 0.5])
    q1, q3 = np.percentile(v, [25, 75])
    iqr = q3 - q1
    if iqr > 0:
        width = 2 * iqr * v.size ** (-1 / 3)
        nbins = max(1, int(math.ceil((hi - lo) / width)))
    else:
        nbins = int(math.ceil(math.log2(v.size))) + 1
    return np.linspace(lo, hi, nbins + 1)


def box_summary(v):
    """Quartiles, whisker ends (most extreme points within 1.5 IQR) and outliers."""
    v = np.sort(np.asarray(v, dtype=float))
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    inside = v[(v >= q1 - 1.5 * iqr) & (v <= q3 + 1.5 * iqr)]
    return {
        "min": float(v[0]), "q1": float(q1), "median": float(med), "q3": float(q3), "max": float(v[-1]),
        "whisker_low": float(inside[0]), "whisker_high": float(inside[-1]),
        "outliers": [float(o) for o in v if o < inside[0] or o > inside[-1]],
    }


def qq_data(v):
    """(theoretical normal quantile, sorted sample) pairs."""
    v = np.sort(np.asarray(v, dtype=float))
    return normal_quantiles(v.size), v


def render(kind, series, names=("x", "y"), title=None):
    """SVG text for one chart; ``series`` holds one or two arrays."""
    series = [np.asarray(s, dtype=float).ravel() for s in series]
    if not series or series[0].size == 0:
        raise EmptyData(f"nothing to plot for {kind}")
    if any(not np.all(np.isfinite(s)) for s in series):
        raise ValueError("plot data must be finite")
    title = title or kind.replace("_", " ")
    if ARITY[kind] == 2:
        xs, ys = series
        if xs.size != ys.size:
            raise ValueError("paired series differ in length")
        c = _Canvas(title, padded_range(xs), padded_range(ys), names[0], names[1])
        if kind == "line":
            order = np.argsort(xs, kind="stable")
            c.polyline(xs[order], ys[order])
        else:
            if kind == "residuals_vs_fitted":
                c.line(c.x0, 0.0, c.x1, 0.0)
            for a, b in zip(xs, ys):
                c.circle(a, b)
        return c.render()

    (v,) = series
    if kind == "histogram":
        edges = histogram_bins(v)
        counts, _ = np.histogram(v, bins=edges)
        c = _Canvas(title, padded_range(edges), (0.0, max(1.0, counts.max() * (1 + PAD))), names[0], "count")
        for lo, hi, k in zip(edges[:-1], edges[1:], counts):
            c.rect(lo, 0.0, hi, float(k))
        return c.render()
    if kind == "box":
        s = box_summary(v)
        c = _Canvas(title, (0.0, 2.0), padded_range(v), "", names[0])
        c.rect(0.7, s["q1"], 1.3, s["q3"], cls="box")
        c.line(0.7, s["median"], 1.3, s["median"], cls="whisker")
        c.line(1.0, s["q3"], 1.0, s["whisker_high"], cls="whisker")
        c.line(1.0, s["q1"], 1.0, s["whisker_low"], cls="whisker")
        c.line(0.85, s["whisker_high"], 1.15, s["whisker_high"], cls="whisker")
        c.line(0.85, s["whisker_low"], 1.15, s["whisker_low"], cls="whisker")
        for o in s["outliers"]:
            c.circle(1.0, o, cls="outlier")
        return c.render(show_x_ticks=False)
    # qq
    theo, sample = qq_data(v)
    both = np.concatenate([theo, sample])
    rng = padded_range(both)
    c = _Canvas(title, rng, rng, "normal quantile", names[0])
    c.line(rng[0], rng[0], rng[1], rng[1])
    for a, b in zip(theo, sample):
        c.circle(a, b)
    return c.render()


def emit_plot(req, data):
    """Render ``req`` from the mapping ``data`` (column name -> values) to an SVG file."""
    missing = [c for c in req.columns if c not in data]
    if missing:
        raise KeyError(f"no data for column(s) {missing}")
    svg = render(req.kind, [data[c] for c in req.columns], names=tuple(req.columns) + ("",))
    try:
        Path(req.output_path).write_text(svg, encoding="utf-8")
    except OSError as exc:
        raise WriteError(str(exc)) from exc
    return Path(req.output_path)
