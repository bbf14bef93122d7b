"""Self-contained SVG line charts written next to the CSVs of a run."""

from __future__ import annotations

import math
from html import escape
from pathlib import Path

from gyrolim.cli.tables import CSVFormatError, column, read_csv

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 80, 150, 40, 60
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _num(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float, log: bool) -> str:
    return f"{10 ** v:.3g}" if log else f"{v:.3g}"


def line_chart(title: str, xlabel: str, ylabel: str, series: dict, logx: bool = False, logy: bool = False) -> str:
    """SVG text for one chart; ``series`` maps a label to (xs, ys). Non-finite or unloggable points are dropped."""
    clean = {}
    for name, (xs, ys) in series.items():
        pts = []
        for x, y in zip(xs, ys):
            if not (isinstance(x, float) and isinstance(y, float) and math.isfinite(x) and math.isfinite(y)):
                continue
            if (logx and x <= 0) or (logy and y <= 0):
                continue
            pts.append((math.log10(x) if logx else x, math.log10(y) if logy else y))
        clean[name] = pts
    allp = [p for pts in clean.values() for p in pts]
    if allp:
        x0, x1 = min(p[0] for p in allp), max(p[0] for p in allp)
        y0, y1 = min(p[1] for p in allp), max(p[1] for p in allp)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        pad = abs(y0) * 0.05 or 0.5
        y0, y1 = y0 - pad, y1 + pad
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return TOP + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for k in range(5):
        fx = x0 + (x1 - x0) * k / 4
        fy = y0 + (y1 - y0) * k / 4
        out.append(f'<line x1="{_num(sx(fx))}" y1="{TOP + ph}" x2="{_num(sx(fx))}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_num(sx(fx))}" y="{TOP + ph + 18}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{_tick_label(fx, logx)}</text>')
        out.append(f'<line x1="{LEFT - 5}" y1="{_num(sy(fy))}" x2="{LEFT}" y2="{_num(sy(fy))}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_num(sy(fy) + 4)}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{_tick_label(fy, logy)}</text>')
    xl = xlabel + (" (log)" if logx else "")
    yl = ylabel + (" (log)" if logy else "")
    out.append(f'<text x="{LEFT + pw / 2:.0f}" y="{HEIGHT - 15}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="13">{escape(xl)}</text>')
    out.append(f'<text x="18" y="{TOP + ph / 2:.0f}" text-anchor="middle" font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 18 {TOP + ph / 2:.0f})">{escape(yl)}</text>')
    for i, (name, pts) in enumerate(clean.items()):
        color = COLORS[i % len(COLORS)]
        coords = " ".join(f"{_num(sx(x))},{_num(sy(y))}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        for x, y in pts:
            out.append(f'<circle cx="{_num(sx(x))}" cy="{_num(sy(y))}" r="2.5" fill="{color}"/>')
        ly = TOP + 14 + 18 * i
        out.append(f'<line x1="{WIDTH - RIGHT + 12}" y1="{ly}" x2="{WIDTH - RIGHT + 32}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{WIDTH - RIGHT + 38}" y="{ly + 4}" font-family="sans-serif" font-size="12">'
                   f'{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def _all_positive(values) -> bool:
    vals = [v for v in values if isinstance(v, float) and math.isfinite(v)]
    return bool(vals) and all(v > 0 for v in vals)


def plot_energy_csv(path) -> Path:
    path = Path(path)
    header, rows = read_csv(path, required=["t", "E", "E1", "E2"])
    t = column(header, rows, "t")
    series = {name: (t, column(header, rows, name)) for name in ("E", "E1", "E2")}
    return _write(path.with_suffix(".svg"), line_chart(f"modulated energy ({path.parent.name})", "t", "energy", series))


def plot_sweep_csv(path) -> list[Path]:
    path = Path(path)
    header, rows = read_csv(path, required=["N", "eps", "hbar", "E_t0", "E_tfinal"])
    ef = column(header, rows, "E_tfinal")
    logy = _all_positive(ef)
    invN = [1.0 / v for v in column(header, rows, "N")]
    eps = column(header, rows, "eps")
    return [
        _write(path.parent / "sweep_E_vs_invN.svg",
               line_chart("E(T) against 1/N", "1/N", "E(T)", {"E(T)": (invN, ef)}, logx=True, logy=logy)),
        _write(path.parent / "sweep_E_vs_eps.svg",
               line_chart("E(T) against eps", "eps", "E(T)", {"E(T)": (eps, ef)}, logx=True, logy=logy)),
    ]


def plot_quantize_csv(path) -> Path:
    path = Path(path)
    header, rows = read_csv(path, required=["eps", "hbar", "kinetic", "confinement", "I", "J"])
    eps = column(header, rows, "eps")
    series = {
        "kinetic": (eps, column(header, rows, "kinetic")),
        "confinement": (eps, column(header, rows, "confinement")),
        "|I|": (eps, [abs(v) for v in column(header, rows, "I")]),
        "|J|": (eps, [abs(v) for v in column(header, rows, "J")]),
    }
    return _write(path.parent / "quantize_terms.svg",
                  line_chart("initial energy terms", "eps", "value", series, logx=True, logy=True))


def emit_plots(run_dir) -> list[Path]:
    """Chart every known CSV under ``run_dir``; raises CSVFormatError naming a malformed file."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise FileNotFoundError(f"run directory not found: {run_dir}")
    out = []
    for p in sorted(run_dir.rglob("energy.csv")):
        out.append(plot_energy_csv(p))
    for p in sorted(run_dir.rglob("sweep.csv")):
        out.extend(plot_sweep_csv(p))
    for p in sorted(run_dir.rglob("quantize.csv")):
        out.append(plot_quantize_csv(p))
    if not out and not any(run_dir.rglob("*.csv")):
        raise CSVFormatError(f"{run_dir}: no CSV files to plot")
    return out


__all__ = ["CSVFormatError", "emit_plots", "line_chart", "plot_energy_csv", "plot_quantize_csv", "plot_sweep_csv"]
