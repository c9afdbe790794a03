"""Deterministic SVG plotting with no external dependencies.

Every coordinate and color is formatted with a fixed precision and nothing
time- or environment-dependent is emitted, so identical inputs always give
byte-identical files; the plots are golden-file testable.
"""

from __future__ import annotations

import math

import numpy as np

WIDTH = 720
HEIGHT = 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 72, 24, 40, 56

# dark-to-light ramp (anchors loosely follow a perceptual colormap)
_RAMP = (
    (0.00, (0, 0, 4)),
    (0.25, (59, 15, 112)),
    (0.50, (140, 41, 129)),
    (0.75, (222, 73, 104)),
    (0.90, (254, 159, 109)),
    (1.00, (252, 253, 191)),
)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round tick positions covering [lo, hi] using a 1/2/5 step ladder."""
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * mag
        if step >= raw:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 10))
        t += step
    return ticks


def color_at(fraction: float) -> str:
    """Hex color of the fixed ramp at a fraction in [0, 1]."""
    f = min(max(fraction, 0.0), 1.0)
    for (f0, c0), (f1, c1) in zip(_RAMP[:-1], _RAMP[1:]):
        if f <= f1:
            t = 0.0 if f1 == f0 else (f - f0) / (f1 - f0)
            rgb = tuple(int(round(a + t * (b - a))) for a, b in zip(c0, c1))
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#ffffff"


def _axes(x_lo, x_hi, y_lo, y_hi, xlabel, ylabel, title) -> tuple[list[str], callable, callable]:
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + plot_w * (x - x_lo) / (x_hi - x_lo)

    def sy(y):
        return MARGIN_T + plot_h * (1.0 - (y - y_lo) / (y_hi - y_lo))

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH // 2}" y="24" font-family="monospace" font-size="14" '
        f'text-anchor="middle">{title}</text>',
    ]
    for t in nice_ticks(x_lo, x_hi):
        if not x_lo <= t <= x_hi:
            continue
        x = sx(t)
        parts.append(
            f'<line x1="{_fmt(x)}" y1="{HEIGHT - MARGIN_B}" x2="{_fmt(x)}" '
            f'y2="{HEIGHT - MARGIN_B + 5}" stroke="#000000" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(x)}" y="{HEIGHT - MARGIN_B + 20}" font-family="monospace" '
            f'font-size="11" text-anchor="middle">{t:g}</text>'
        )
    for t in nice_ticks(y_lo, y_hi):
        if not y_lo <= t <= y_hi:
            continue
        y = sy(t)
        parts.append(
            f'<line x1="{MARGIN_L - 5}" y1="{_fmt(y)}" x2="{MARGIN_L}" y2="{_fmt(y)}" '
            f'stroke="#000000" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{MARGIN_L - 8}" y="{_fmt(y + 4)}" font-family="monospace" '
            f'font-size="11" text-anchor="end">{t:g}</text>'
        )
    parts.append(
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#000000" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{MARGIN_L + plot_w // 2}" y="{HEIGHT - 14}" font-family="monospace" '
        f'font-size="12" text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{MARGIN_T + plot_h // 2}" font-family="monospace" font-size="12" '
        f'text-anchor="middle" transform="rotate(-90 18 {MARGIN_T + plot_h // 2})">{ylabel}</text>'
    )
    return parts, sx, sy


def line_plot_svg(x, y, xlabel: str, ylabel: str, title: str) -> str:
    """Single-curve line plot; axes autoscale to the data."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x_lo, x_hi = float(x.min()), float(x.max())
    y_lo = 0.0 if y.min() >= 0.0 else float(y.min())
    y_hi = float(y.max())
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    y_hi *= 1.05
    parts, sx, sy = _axes(x_lo, x_hi, y_lo, y_hi, xlabel, ylabel, title)
    points = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x, y))
    parts.append(f'<polyline fill="none" stroke="#b2182b" stroke-width="1.5" points="{points}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def heatmap_svg(x_axis, y_axis, values, xlabel: str, ylabel: str, title: str, max_cells: int = 201) -> str:
    """Heatmap of values[i, j] over (x_axis[i], y_axis[j]).

    Dense grids are subsampled with a uniform stride so the emitted file
    stays below roughly ``max_cells**2`` rectangles.
    """
    x_axis = np.asarray(x_axis, dtype=float)
    y_axis = np.asarray(y_axis, dtype=float)
    values = np.asarray(values, dtype=float)
    sx_stride = max(1, -(-x_axis.size // max_cells))
    sy_stride = max(1, -(-y_axis.size // max_cells))
    xs = x_axis[::sx_stride]
    ys = y_axis[::sy_stride]
    vals = values[::sx_stride, ::sy_stride]
    top = vals.max()
    frac = vals / top if top > 0.0 else vals

    x_lo, x_hi = float(x_axis.min()), float(x_axis.max())
    y_lo, y_hi = float(y_axis.min()), float(y_axis.max())
    parts, sx, sy = _axes(x_lo, x_hi, y_lo, y_hi, xlabel, ylabel, title)

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B
    cell_w = plot_w / len(xs)
    cell_h = plot_h / len(ys)
    cells = []
    for i in range(len(xs)):
        px = MARGIN_L + plot_w * i / len(xs)
        for j in range(len(ys)):
            py = MARGIN_T + plot_h * (1.0 - (j + 1) / len(ys))
            cells.append(
                f'<rect x="{_fmt(px)}" y="{_fmt(py)}" width="{_fmt(cell_w + 0.5)}" '
                f'height="{_fmt(cell_h + 0.5)}" fill="{color_at(float(frac[i, j]))}"/>'
            )
    # cells go under the frame: splice them right after the background/title
    parts = parts[:4] + cells + parts[4:]
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
