"""Tiny deterministic SVG plotter.

Hand-rolled on purpose: no plotting dependency, output is a pure function
of the inputs (identical data -> identical bytes), and the files open in
any browser. Supports line and marker series plus horizontal reference
lines, which covers every diagnostic this package emits.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

__all__ = ["Series", "render_plot"]

WIDTH = 800
HEIGHT = 500
MARGIN_LEFT = 70
MARGIN_RIGHT = 20
MARGIN_TOP = 40
MARGIN_BOTTOM = 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


class Series:
    """One plotted dataset: paired x/y values drawn as a line or markers."""

    def __init__(self, x, y, mode: str = "line", color: str | None = None):
        if mode not in ("line", "markers"):
            raise ValueError(f"unknown series mode {mode!r}")
        self.x = [float(v) for v in x]
        self.y = [float(v) for v in y]
        if len(self.x) != len(self.y):
            raise ValueError("series x and y lengths differ")
        self.mode = mode
        self.color = color


def _bounds(values: list[float]) -> tuple[float, float]:
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return -1.0, 1.0
    lo, hi = min(finite), max(finite)
    if lo == hi:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def render_plot(
    path,
    series: list[Series],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    ref_lines_y: tuple[float, ...] = (),
) -> None:
    """Write one SVG figure containing the given series."""
    all_x = [v for s in series for v in s.x]
    all_y = [v for s in series for v in s.y] + [
        r for r in ref_lines_y if math.isfinite(r)
    ]
    x0, x1 = _bounds(all_x)
    y0, y1 = _bounds(all_y)
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(v: float) -> float:
        return MARGIN_LEFT + (v - x0) / (x1 - x0) * plot_w

    def sy(v: float) -> float:
        return MARGIN_TOP + (y1 - v) / (y1 - y0) * plot_h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#333333" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{escape(title)}</text>'
        )

    # Axis ticks: five evenly spaced per axis.
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        px = sx(xv)
        parts.append(
            f'<line x1="{px:.2f}" y1="{MARGIN_TOP + plot_h}" x2="{px:.2f}" '
            f'y2="{MARGIN_TOP + plot_h + 5}" stroke="#333333"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{MARGIN_TOP + plot_h + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{escape(_fmt(xv))}</text>'
        )
        yv = y0 + (y1 - y0) * i / 4
        py = sy(yv)
        parts.append(
            f'<line x1="{MARGIN_LEFT - 5}" y1="{py:.2f}" x2="{MARGIN_LEFT}" '
            f'y2="{py:.2f}" stroke="#333333"/>'
        )
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{py + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12">{escape(_fmt(yv))}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 12}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="13">'
            f"{escape(xlabel)}</text>"
        )
    if ylabel:
        cx, cy = 18, MARGIN_TOP + plot_h / 2
        parts.append(
            f'<text x="{cx}" y="{cy:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13" '
            f'transform="rotate(-90 {cx} {cy:.1f})">{escape(ylabel)}</text>'
        )

    for ref in ref_lines_y:
        if y0 <= ref <= y1:
            py = sy(ref)
            parts.append(
                f'<line x1="{MARGIN_LEFT}" y1="{py:.2f}" '
                f'x2="{MARGIN_LEFT + plot_w}" y2="{py:.2f}" '
                'stroke="#888888" stroke-dasharray="6 4"/>'
            )

    for idx, s in enumerate(series):
        color = s.color or PALETTE[idx % len(PALETTE)]
        points = [
            (sx(xv), sy(yv))
            for xv, yv in zip(s.x, s.y)
            if math.isfinite(xv) and math.isfinite(yv)
        ]
        if not points:
            continue
        if s.mode == "line":
            coords = " ".join(f"{px:.2f},{py:.2f}" for px, py in points)
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" '
                'stroke-width="1.5"/>'
            )
        else:
            for px, py in points:
                parts.append(
                    f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.5" fill="none" '
                    f'stroke="{color}" stroke-width="1"/>'
                )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
