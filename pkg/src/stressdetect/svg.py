"""Small native SVG plots: ROC curves, SHAP beeswarm, dependence scatter.

Output is plain text with fixed-precision coordinates, so identical inputs
give identical bytes. No plotting library is involved.
"""

from __future__ import annotations

from html import escape

import numpy as np

from .synth import splitmix64

WIDTH, HEIGHT = 480, 400
MARGIN = dict(left=64, right=16, top=28, bottom=48)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b")


def _f(v: float) -> str:
    return f"{v:.2f}"


class _Axes:
    def __init__(self, xlim, ylim, width=WIDTH, height=HEIGHT, margin=MARGIN):
        self.x0, self.x1 = map(float, xlim)
        self.y0, self.y1 = map(float, ylim)
        if self.x1 <= self.x0:
            self.x0, self.x1 = self.x0 - 0.5, self.x0 + 0.5
        if self.y1 <= self.y0:
            self.y0, self.y1 = self.y0 - 0.5, self.y0 + 0.5
        self.width, self.height, self.m = width, height, margin
        self.pw = width - margin["left"] - margin["right"]
        self.ph = height - margin["top"] - margin["bottom"]

    def px(self, x):
        return self.m["left"] + (np.asarray(x, dtype=float) - self.x0) / (self.x1 - self.x0) * self.pw

    def py(self, y):
        return self.m["top"] + (1.0 - (np.asarray(y, dtype=float) - self.y0) / (self.y1 - self.y0)) * self.ph

    def frame(self, title, xlabel, ylabel, xticks, yticks, ytick_labels=None) -> list[str]:
        left, top = self.m["left"], self.m["top"]
        bottom = top + self.ph
        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif" font-size="11">',
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="white"/>',
            f'<text x="{_f(self.width / 2)}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
            f'<rect x="{left}" y="{top}" width="{self.pw}" height="{self.ph}" fill="none" stroke="#444"/>',
        ]
        for t in xticks:
            x = _f(float(self.px(t)))
            out.append(f'<line x1="{x}" y1="{bottom}" x2="{x}" y2="{bottom + 4}" stroke="#444"/>')
            out.append(f'<text x="{x}" y="{bottom + 16}" text-anchor="middle">{t:g}</text>')
        labels = ytick_labels or [f"{t:g}" for t in yticks]
        for t, lab in zip(yticks, labels):
            y = _f(float(self.py(t)))
            out.append(f'<line x1="{left - 4}" y1="{y}" x2="{left}" y2="{y}" stroke="#444"/>')
            out.append(f'<text x="{left - 6}" y="{y}" text-anchor="end" dominant-baseline="middle">{escape(lab)}</text>')
        out.append(
            f'<text x="{_f(left + self.pw / 2)}" y="{self.height - 10}" text-anchor="middle">{escape(xlabel)}</text>'
        )
        if ylabel:
            cy = _f(top + self.ph / 2)
            out.append(
                f'<text x="14" y="{cy}" text-anchor="middle" transform="rotate(-90 14 {cy})">{escape(ylabel)}</text>'
            )
        return out


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [round(lo, 6)]
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [round(float(v), 10) for v in np.arange(start, hi + step * 1e-9, step)]


def _polyline(xs, ys, color, width=1.5, dash=None) -> str:
    pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in zip(xs, ys))
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>'


def roc_svg(curves) -> str:
    """``curves``: sequence of (label, fpr, tpr, auc)."""
    ax = _Axes((0, 1), (0, 1))
    ticks = [0, 0.2, 0.4, 0.6, 0.8, 1.0]
    out = ax.frame("ROC", "false positive rate", "true positive rate", ticks, ticks)
    out.append(_polyline(ax.px([0, 1]), ax.py([0, 1]), "#999", 1.0, "4 3"))
    for i, (label, fpr, tpr, area) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        out.append(_polyline(ax.px(fpr), ax.py(tpr), color))
        ly = ax.m["top"] + ax.ph - 14 - 16 * (len(curves) - 1 - i)
        lx = ax.m["left"] + ax.pw - 150
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 18}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 24}" y="{ly + 4}">{escape(label)} (AUC {area:.3f})</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _jitter(i: int) -> float:
    """Deterministic offset in [-0.5, 0.5) from a row index."""
    return (splitmix64(i)[1] >> 11) / float(1 << 53) - 0.5


def _blend(t: float) -> str:
    # low feature value blue, high red
    r = int(round(30 + t * (214 - 30)))
    g = int(round(119 + t * (39 - 119)))
    b = int(round(180 + t * (40 - 180)))
    return f"#{r:02x}{g:02x}{b:02x}"


def beeswarm_svg(feature_names, shap, X, ranking, max_points: int = 2000) -> str:
    """One lane per feature (most important on top); dots coloured by feature value.

    ``max_points`` caps the number of rows drawn; each row adds one dot per lane.
    """
    shap = np.asarray(shap, dtype=float)
    X = np.asarray(X, dtype=float)
    rows = np.arange(len(shap))
    if len(rows) > max_points:  # evenly thinned, still deterministic
        rows = np.unique(np.linspace(0, len(shap) - 1, max_points).round().astype(int))
    lo, hi = float(shap.min()), float(shap.max())
    pad = 0.05 * (hi - lo) if hi > lo else 0.5
    k = len(ranking)
    height = max(HEIGHT, 60 + 28 * k)
    ax = _Axes((lo - pad, hi + pad), (-0.5, k - 0.5), height=height, margin=dict(MARGIN, left=96))
    lanes = list(range(k - 1, -1, -1))
    out = ax.frame(
        "SHAP summary", "SHAP value (log-odds contribution)", "", _ticks(lo - pad, hi + pad), lanes, list(ranking)
    )
    zx = _f(float(ax.px(0.0)))
    out.append(f'<line x1="{zx}" y1="{ax.m["top"]}" x2="{zx}" y2="{ax.m["top"] + ax.ph}" stroke="#bbb"/>')
    for lane, name in zip(lanes, ranking):
        j = list(feature_names).index(name)
        col = X[rows, j]
        cmin, cmax = float(col.min()), float(col.max())
        for i in rows:
            t = 0.5 if cmax == cmin else (X[i, j] - cmin) / (cmax - cmin)
            x = float(ax.px(shap[i, j]))
            y = float(ax.py(lane + 0.6 * _jitter(int(i))))
            out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="2" fill="{_blend(t)}" fill-opacity="0.7"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def scatter_svg(feature: str, pairs) -> str:
    """Dependence scatter of (feature value, SHAP value) pairs."""
    if len(pairs):
        xs, ys = (np.array(v, dtype=float) for v in zip(*pairs))
    else:
        xs = ys = np.zeros(0)
    xlo, xhi = (float(xs.min()), float(xs.max())) if len(xs) else (0.0, 1.0)
    ylo, yhi = (float(ys.min()), float(ys.max())) if len(ys) else (0.0, 1.0)
    xpad = 0.05 * (xhi - xlo) if xhi > xlo else 0.5
    ypad = 0.05 * (yhi - ylo) if yhi > ylo else 0.5
    ax = _Axes((xlo - xpad, xhi + xpad), (ylo - ypad, yhi + ypad))
    out = ax.frame(
        f"SHAP dependence: {feature}",
        feature,
        f"SHAP value for {feature}",
        _ticks(xlo - xpad, xhi + xpad),
        _ticks(ylo - ypad, yhi + ypad),
    )
    for x, y in zip(ax.px(xs), ax.py(ys)):
        out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="2" fill="{PALETTE[0]}" fill-opacity="0.6"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
