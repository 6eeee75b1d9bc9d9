"""Dependency-free SVG rendering of score matrices (bar and radar plots).

Output is deterministic SVG 1.1 text so reports can be golden-tested
structurally: bars carry class="bar", radar spokes class="axis" and
candidate outlines class="series".
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape, quoteattr

from .experiment import ScoreMatrix

PALETTE = (
    "#4c78a8",
    "#f58518",
    "#54a24b",
    "#e45756",
    "#72b7b2",
    "#b279a2",
    "#ff9da6",
    "#9d755d",
)

_FONT = 'font-family="Helvetica, Arial, sans-serif"'


def _num(value: float) -> str:
    return f"{value:.2f}"


def render_bar(matrix: ScoreMatrix, metric: str) -> str:
    """One bar per candidate for a single metric, y axis fixed to [0, 1],
    with the metric's threshold drawn as a horizontal rule."""
    if metric not in matrix.metrics:
        raise ValueError(f"metric {metric!r} is not a column of this matrix")
    names = matrix.candidates
    slot, bar_w = 72.0, 44.0
    left, top = 64.0, 44.0
    plot_w = max(slot * len(names), 144.0)
    plot_h = 240.0
    width = left + plot_w + 24.0
    height = top + plot_h + 72.0
    threshold = matrix.thresholds[metric]

    def y_of(score: float) -> float:
        return top + (1.0 - score) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">',
        f'<text class="title" x="{_num(left + plot_w / 2)}" y="24" {_FONT} '
        f'font-size="15" text-anchor="middle">{escape(metric)}</text>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = y_of(tick)
        parts.append(
            f'<line class="grid" x1="{_num(left)}" y1="{_num(y)}" '
            f'x2="{_num(left + plot_w)}" y2="{_num(y)}" stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text class="tick" x="{_num(left - 8)}" y="{_num(y + 4)}" {_FONT} '
            f'font-size="11" text-anchor="end">{tick:.2f}</text>'
        )
    for i, name in enumerate(names):
        score = matrix.score(name, metric)
        x = left + i * slot + (slot - bar_w) / 2.0
        parts.append(
            f'<rect class="bar" x="{_num(x)}" y="{_num(y_of(score))}" '
            f'width="{_num(bar_w)}" height="{_num(score * plot_h)}" '
            f'fill="{PALETTE[i % len(PALETTE)]}"/>'
        )
        parts.append(
            f'<text class="bar-label" x="{_num(x + bar_w / 2)}" '
            f'y="{_num(top + plot_h + 18)}" {_FONT} font-size="11" '
            f'text-anchor="middle">{escape(name)}</text>'
        )
    parts.append(
        f'<line class="threshold" x1="{_num(left)}" y1="{_num(y_of(threshold))}" '
        f'x2="{_num(left + plot_w)}" y2="{_num(y_of(threshold))}" '
        f'stroke="#d62728" stroke-width="1.5" stroke-dasharray="6 3"/>'
    )
    parts.append(
        f'<line class="axis-y" x1="{_num(left)}" y1="{_num(top)}" '
        f'x2="{_num(left)}" y2="{_num(top + plot_h)}" stroke="#333333" stroke-width="1"/>'
    )
    parts.append(
        f'<line class="axis-x" x1="{_num(left)}" y1="{_num(top + plot_h)}" '
        f'x2="{_num(left + plot_w)}" y2="{_num(top + plot_h)}" stroke="#333333" stroke-width="1"/>'
    )
    parts.append(
        f'<text class="axis-title" x="{_num(left + plot_w / 2)}" '
        f'y="{_num(height - 16)}" {_FONT} font-size="12" text-anchor="middle">candidate</text>'
    )
    parts.append(
        f'<text class="axis-title" x="18" y="{_num(top + plot_h / 2)}" {_FONT} '
        f'font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 18 {_num(top + plot_h / 2)})">score</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_radar(matrix: ScoreMatrix) -> str:
    """One axis per metric (clockwise from 12 o'clock, column order) and
    one closed polygon per candidate on a [0, 1] radial scale."""
    metric_count = len(matrix.metrics)
    if metric_count < 3:
        raise ValueError(
            f"radar chart requires at least 3 metrics, got {metric_count}; "
            "use a bar chart instead"
        )
    cx, cy, radius = 230.0, 230.0, 165.0
    width, height = 620.0, 460.0

    def point(axis: int, score: float) -> tuple[float, float]:
        angle = -math.pi / 2.0 + 2.0 * math.pi * axis / metric_count
        return cx + radius * score * math.cos(angle), cy + radius * score * math.sin(angle)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">'
    ]
    for ring in (0.25, 0.5, 0.75, 1.0):
        parts.append(
            f'<circle class="ring" cx="{_num(cx)}" cy="{_num(cy)}" '
            f'r="{_num(radius * ring)}" fill="none" stroke="#dddddd" stroke-width="1"/>'
        )
    for k, metric in enumerate(matrix.metrics):
        x, y = point(k, 1.0)
        lx, ly = point(k, 1.12)
        parts.append(
            f'<line class="axis" x1="{_num(cx)}" y1="{_num(cy)}" '
            f'x2="{_num(x)}" y2="{_num(y)}" stroke="#999999" stroke-width="1"/>'
        )
        parts.append(
            f'<text class="axis-label" x="{_num(lx)}" y="{_num(ly + 4)}" {_FONT} '
            f'font-size="12" text-anchor="middle">{escape(metric)}</text>'
        )
    for i, candidate in enumerate(matrix.candidates):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(
            f"{_num(px)},{_num(py)}"
            for px, py in (
                point(k, matrix.score(candidate, metric))
                for k, metric in enumerate(matrix.metrics)
            )
        )
        parts.append(
            f'<polygon class="series" data-candidate={quoteattr(candidate)} '
            f'points="{coords}" fill="{color}" fill-opacity="0.12" '
            f'stroke="{color}" stroke-width="2"/>'
        )
    legend_x = cx + radius + 60.0
    for i, candidate in enumerate(matrix.candidates):
        y = 40.0 + i * 22.0
        parts.append(
            f'<rect class="legend-swatch" x="{_num(legend_x)}" y="{_num(y - 10)}" '
            f'width="14" height="14" fill="{PALETTE[i % len(PALETTE)]}"/>'
        )
        parts.append(
            f'<text class="legend-label" x="{_num(legend_x + 20)}" y="{_num(y + 2)}" '
            f'{_FONT} font-size="12">{escape(candidate)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
