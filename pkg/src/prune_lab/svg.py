"""Static SVG line charts, no plotting dependency.

Used for schedule curves (sparsity vs progress) and per-run metric traces.
"""

from __future__ import annotations

from pathlib import Path

from .harness import RunResult, run_id_for
from .schedule import ScheduleSpec, trace

WIDTH = 860
HEIGHT = 520
MARGIN_LEFT = 70
MARGIN_RIGHT = 190
MARGIN_TOP = 50
MARGIN_BOTTOM = 60

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
          "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


class SvgError(ValueError):
    pass


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _line_chart(
    series: list[tuple[str, list[float], list[float], dict]],
    title: str,
    x_label: str,
    y_label: str,
) -> str:
    """Build one SVG document from (label, xs, ys, style) series."""
    if not series:
        raise SvgError("nothing to plot")
    all_x = [x for _, xs, _, _ in series for x in xs]
    all_y = [y for _, _, ys, _ in series for y in ys]
    x_min, x_max = min(all_x), max(all_x)
    y_min, y_max = min(all_y), max(all_y)
    # keep the span positive even at extreme magnitudes (1.0 can underflow)
    if x_max - x_min <= 0:
        x_max = x_min + max(1.0, abs(x_min) * 1e-6)
    if y_max - y_min <= 0:
        y_max = y_min + max(1.0, abs(y_min) * 1e-6)
    pad = 0.05 * (y_max - y_min)
    y_min -= pad
    y_max += pad

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(x: float) -> float:
        return MARGIN_LEFT + plot_w * (x - x_min) / (x_max - x_min)

    def sy(y: float) -> float:
        return MARGIN_TOP + plot_h * (1.0 - (y - y_min) / (y_max - y_min))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="28" text-anchor="middle" font-size="17" '
        f'font-family="sans-serif">{_escape(title)}</text>',
    ]

    # axes with 5 ticks per side
    axis = f'stroke="#333" stroke-width="1"'
    parts.append(f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP + plot_h}" '
                 f'x2="{MARGIN_LEFT + plot_w}" y2="{MARGIN_TOP + plot_h}" {axis}/>')
    parts.append(f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" '
                 f'x2="{MARGIN_LEFT}" y2="{MARGIN_TOP + plot_h}" {axis}/>')
    for i in range(6):
        fx = x_min + i * (x_max - x_min) / 5
        fy = y_min + i * (y_max - y_min) / 5
        px, py = sx(fx), sy(fy)
        parts.append(f'<line x1="{px:.1f}" y1="{MARGIN_TOP + plot_h}" x2="{px:.1f}" '
                     f'y2="{MARGIN_TOP + plot_h + 5}" {axis}/>')
        parts.append(f'<text x="{px:.1f}" y="{MARGIN_TOP + plot_h + 20}" '
                     f'text-anchor="middle" font-size="11" font-family="sans-serif">'
                     f'{fx:.3g}</text>')
        parts.append(f'<line x1="{MARGIN_LEFT - 5}" y1="{py:.1f}" x2="{MARGIN_LEFT}" '
                     f'y2="{py:.1f}" {axis}/>')
        parts.append(f'<text x="{MARGIN_LEFT - 9}" y="{py + 4:.1f}" text-anchor="end" '
                     f'font-size="11" font-family="sans-serif">{fy:.3g}</text>')
    parts.append(f'<text x="{MARGIN_LEFT + plot_w / 2}" y="{HEIGHT - 14}" '
                 f'text-anchor="middle" font-size="13" font-family="sans-serif">'
                 f'{_escape(x_label)}</text>')
    parts.append(f'<text x="20" y="{MARGIN_TOP + plot_h / 2}" text-anchor="middle" '
                 f'font-size="13" font-family="sans-serif" '
                 f'transform="rotate(-90 20 {MARGIN_TOP + plot_h / 2})">'
                 f'{_escape(y_label)}</text>')

    for i, (label, xs, ys, style) in enumerate(series):
        color = style.get("color", COLORS[i % len(COLORS)])
        width = style.get("width", 1.8)
        dash = ' stroke-dasharray="6 4"' if style.get("dashed") else ""
        points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline fill="none" stroke="{color}" '
                     f'stroke-width="{width}"{dash} points="{points}"/>')
        ly = MARGIN_TOP + 16 + 18 * i
        lx = MARGIN_LEFT + plot_w + 14
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="{width}"{dash}/>')
        parts.append(f'<text x="{lx + 28}" y="{ly}" font-size="12" '
                     f'font-family="sans-serif">{_escape(label)}</text>')

    parts.append("</svg>")
    return "\n".join(parts)


def render_schedule_svg(
    specs: list[ScheduleSpec], resolution: int, out_path: str | Path
) -> None:
    """Plot each spec's sparsity trace over t in [0,1]; one polyline per spec
    with exactly `resolution` vertices."""
    if not specs:
        raise SvgError("need at least one schedule spec")
    series = []
    for spec in specs:
        tr = trace(spec, resolution)
        xs = [t for t, _ in tr.samples]
        ys = [s for _, s in tr.samples]
        label = spec.kind.value
        if len({s.kind for s in specs}) == 1 and len(specs) > 1:
            label = f"{label} a={spec.alpha:g} b={spec.beta:g}"
        series.append((label, xs, ys, {}))
    svg = _line_chart(series, "Target sparsity vs training progress",
                      "training progress", "target sparsity")
    Path(out_path).write_text(svg)


def render_run_svg(
    results: list[RunResult], metric: str, out_path: str | Path
) -> None:
    """Per-epoch curves of accuracy, sparsity (target vs actual) or lr."""
    if not results or any(not r.records for r in results):
        raise SvgError("need at least one run result with records")
    if metric not in ("accuracy", "sparsity", "lr"):
        raise SvgError(f"unknown metric {metric!r}")

    series: list[tuple[str, list[float], list[float], dict]] = []
    epochs_of = lambda r: [float(rec.epoch) for rec in r.records]
    if metric == "sparsity":
        for r in results:
            series.append((f"{run_id_for(r)} target", epochs_of(r),
                           [rec.target_sparsity for rec in r.records], {"dashed": True}))
            series.append((f"{run_id_for(r)} actual", epochs_of(r),
                           [rec.actual_sparsity for rec in r.records], {}))
        y_label = "sparsity"
    elif metric == "lr":
        for r in results:
            series.append((run_id_for(r), epochs_of(r),
                           [rec.lr for rec in r.records], {}))
        y_label = "learning rate"
    else:
        curves = [[rec.eval_accuracy for rec in r.records] for r in results]
        for r, ys in zip(results, curves):
            series.append((run_id_for(r), epochs_of(r), ys, {"width": 1.0}))
        if len(results) > 1 and len({len(c) for c in curves}) == 1:
            mean = [sum(vals) / len(vals) for vals in zip(*curves)]
            series.append(("mean", epochs_of(results[0]), mean,
                           {"color": "#000000", "width": 2.6}))
        y_label = "eval accuracy"

    svg = _line_chart(series, f"{metric} per epoch", "epoch", y_label)
    Path(out_path).write_text(svg)
