"""Self-contained SVG line charts of sweep summaries (no plotting library)."""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path
from xml.sax.saxutils import escape

PANELS = ("T_J", "wall_time_s", "delta", "mean_productive_objective")
STYLES = {"alg4": "2,4", "baseline": "8,4"}
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

WIDTH, HEIGHT = 480, 320
LEFT, RIGHT, TOP, BOTTOM = 70, 130, 20, 50


def _float(v):
    if v is None or v == "":
        return None
    x = float(v)
    return x if math.isfinite(x) else None


def series(rows, column) -> dict:
    """``{algorithm: [(T, mean over seeds), ...]}`` sorted by T; blanks skipped."""
    acc = defaultdict(lambda: defaultdict(list))
    for r in rows:
        if r.get("error"):
            continue
        y = _float(r.get(column))
        if y is not None:
            acc[r["algorithm"]][int(r["T"])].append(y)
    return {alg: [(T, sum(v) / len(v)) for T, v in sorted(pts.items())] for alg, pts in sorted(acc.items())}


def _ticks(lo, hi, count=5):
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def svg_chart(data: dict, x_label: str, y_label: str) -> str:
    xs = [x for pts in data.values() for x, _ in pts] or [0.0, 1.0]
    ys = [y for pts in data.values() for _, y in pts] or [0.0, 1.0]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5 * (abs(y_lo) or 1), y_hi + 0.5 * (abs(y_hi) or 1)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + pw * (x - x_lo) / (x_hi - x_lo)

    def py(y):
        return TOP + ph * (1 - (y - y_lo) / (y_hi - y_lo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line class="axis" x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line class="axis" x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    for x in sorted(set(xs)):
        out.append(f'<text x="{px(x):.2f}" y="{TOP + ph + 15}" text-anchor="middle">{x:g}</text>')
    for y in _ticks(y_lo, y_hi):
        out.append(f'<text x="{LEFT - 5}" y="{py(y) + 4:.2f}" text-anchor="end">{y:.3g}</text>')
    out.append(f'<text class="xlabel" x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 10}" '
               f'text-anchor="middle">{escape(x_label)}</text>')
    out.append(f'<text class="ylabel" x="14" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {TOP + ph / 2:.1f})">{escape(y_label)}</text>')
    for k, (alg, pts) in enumerate(data.items()):
        color = COLORS[k % len(COLORS)]
        dash = STYLES.get(alg, "none")
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(f'<polyline data-series="{escape(alg)}" points="{coords}" fill="none" '
                   f'stroke="{color}" stroke-width="2" stroke-dasharray="{dash}"/>')
        ly = TOP + 14 + 16 * k
        lx = LEFT + pw + 12
        out.append(f'<g class="legend"><line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2" stroke-dasharray="{dash}"/>'
                   f'<text x="{lx + 30}" y="{ly + 4}">{escape(alg)}</text></g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_summary(rows, out_dir) -> list:
    """Write one chart per panel column into ``out_dir``; returns the paths."""
    if not rows:
        raise ValueError("summary is empty")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for column in PANELS:
        path = out / f"{column}_vs_T.svg"
        path.write_text(svg_chart(series(rows, column), "T", column))
        paths.append(path)
    return paths
