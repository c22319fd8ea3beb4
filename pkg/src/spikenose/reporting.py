"""Deterministic output writers: atomic files, CSV, SVG bar charts, markdown.

SVGs are hand-generated and carry no timestamps or environment metadata so
identical runs produce byte-identical artifacts.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Optional, Sequence


def write_atomic(path: str | Path, content: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(content)
    os.replace(tmp, path)


def grouped_bar_svg(
    labels: Sequence[str],
    series: dict[str, Sequence[float]],
    title: str,
    y_label: str = "accuracy (%)",
    y_max: float = 100.0,
) -> str:
    """Minimal grouped bar chart; series maps legend name -> values."""
    colors = ("#4878cf", "#e08040", "#6aa84f", "#a64d79")
    width, height = 760, 420
    margin_l, margin_r, margin_t, margin_b = 60, 20, 50, 60
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b
    n_groups = len(labels)
    n_series = len(series)
    group_w = plot_w / max(n_groups, 1)
    bar_w = group_w * 0.8 / max(n_series, 1)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
    ]
    # y axis with gridlines every 20 units
    n_ticks = 5
    for i in range(n_ticks + 1):
        y_val = y_max * i / n_ticks
        y = margin_t + plot_h * (1 - i / n_ticks)
        parts.append(
            f'<line x1="{margin_l}" y1="{y:.1f}" x2="{width - margin_r}" y2="{y:.1f}" '
            f'stroke="#dddddd"/>'
        )
        parts.append(
            f'<text x="{margin_l - 8}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{y_val:.0f}</text>'
        )
    parts.append(
        f'<text x="16" y="{margin_t + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {margin_t + plot_h / 2:.1f})">{y_label}</text>'
    )
    for g, label in enumerate(labels):
        x0 = margin_l + g * group_w + group_w * 0.1
        for s, (name, values) in enumerate(series.items()):
            v = max(0.0, min(float(values[g]), y_max))
            bar_h = plot_h * v / y_max
            x = x0 + s * bar_w
            y = margin_t + plot_h - bar_h
            parts.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w:.1f}" height="{bar_h:.1f}" '
                f'fill="{colors[s % len(colors)]}"/>'
            )
        parts.append(
            f'<text x="{margin_l + (g + 0.5) * group_w:.1f}" y="{height - margin_b + 18}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="11">{label}</text>'
        )
    for s, name in enumerate(series):
        lx = margin_l + 10 + s * 160
        ly = height - 18
        parts.append(
            f'<rect x="{lx}" y="{ly - 10}" width="12" height="12" '
            f'fill="{colors[s % len(colors)]}"/>'
        )
        parts.append(
            f'<text x="{lx + 18}" y="{ly}" font-family="sans-serif" font-size="12">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def markdown_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def combined_report(out_dir: str | Path) -> str:
    """Markdown summary of every CSV present in a run directory."""
    out_dir = Path(out_dir)
    sections = [f"# Run report: {out_dir.name}", ""]
    csvs = sorted(out_dir.glob("*.csv"))
    if not csvs:
        sections.append("No CSV artifacts found.")
    for path in csvs:
        rows = [line.split(",") for line in path.read_text().strip().splitlines()]
        sections.append(f"## {path.name}")
        sections.append("")
        sections.append(markdown_table(rows[0], rows[1:]))
    return "\n".join(sections) + "\n"
