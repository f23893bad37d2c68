"""Minimal deterministic SVG line charts for the batch metrics.

No plotting dependency: the harness only needs mean-metric-vs-cycle lines
with a legend, and string-built SVG keeps the output byte-reproducible.
"""

from __future__ import annotations

from typing import Sequence

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

_DASHES = ["", "6,3", "2,2", "8,3,2,3", "4,4", "1,3"]


def _fmt(value: float) -> str:
    return f"{value:.2f}".rstrip("0").rstrip(".")


def line_chart(
    title: str,
    series: Sequence[tuple[str, Sequence[tuple[float, float]]]],
    x_label: str = "examples",
    y_label: str = "",
    width: int = 640,
    height: int = 400,
    y_max: float = 1.0,
) -> str:
    """Render labelled (x, y) series as one SVG document string."""
    margin_left, margin_right, margin_top, margin_bottom = 52, 16, 34, 44
    plot_w = width - margin_left - margin_right
    plot_h = height - margin_top - margin_bottom

    xs = [x for _, points in series for x, _ in points]
    x_min, x_max = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if x_max == x_min:
        x_max = x_min + 1.0

    def sx(x: float) -> float:
        return margin_left + (x - x_min) / (x_max - x_min) * plot_w

    def sy(y: float) -> float:
        return margin_top + (1.0 - y / y_max) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">\n',
        f'<rect width="{width}" height="{height}" fill="white"/>\n',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{title}</text>\n',
    ]

    # axes
    x0, y0 = margin_left, margin_top + plot_h
    parts.append(
        f'<line x1="{x0}" y1="{margin_top}" x2="{x0}" y2="{y0}" stroke="#333"/>\n'
        f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" stroke="#333"/>\n'
    )

    # y ticks at 0, 0.2 ... y_max
    steps = 5
    for i in range(steps + 1):
        y_val = y_max * i / steps
        y = sy(y_val)
        parts.append(
            f'<line x1="{x0 - 4}" y1="{y:.1f}" x2="{x0}" y2="{y:.1f}" stroke="#333"/>\n'
            f'<line x1="{x0}" y1="{y:.1f}" x2="{x0 + plot_w}" y2="{y:.1f}" '
            f'stroke="#ddd" stroke-width="0.5"/>\n'
            f'<text x="{x0 - 7}" y="{y + 3.5:.1f}" text-anchor="end">{_fmt(y_val)}</text>\n'
        )

    # x ticks on integers, thinned to at most ~10 labels
    span = int(x_max - x_min)
    step = max(1, (span + 9) // 10)
    tick = int(x_min)
    while tick <= x_max:
        x = sx(tick)
        parts.append(
            f'<line x1="{x:.1f}" y1="{y0}" x2="{x:.1f}" y2="{y0 + 4}" stroke="#333"/>\n'
            f'<text x="{x:.1f}" y="{y0 + 16}" text-anchor="middle">{tick}</text>\n'
        )
        tick += step

    parts.append(
        f'<text x="{x0 + plot_w / 2:.1f}" y="{height - 8}" text-anchor="middle">{x_label}</text>\n'
    )
    if y_label:
        parts.append(
            f'<text x="14" y="{margin_top + plot_h / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 14 {margin_top + plot_h / 2:.1f})">{y_label}</text>\n'
        )

    for idx, (label, points) in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        dash = _DASHES[idx % len(_DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        coords = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in points)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"{dash_attr}/>\n'
        )
        # legend entry
        ly = margin_top + 6 + idx * 15
        lx = x0 + plot_w - 150
        parts.append(
            f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{color}" '
            f'stroke-width="1.5"{dash_attr}/>\n'
            f'<text x="{lx + 27}" y="{ly + 3.5}">{label}</text>\n'
        )

    parts.append("</svg>\n")
    return "".join(parts)
