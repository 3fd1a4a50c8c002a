"""Minimal static SVG plots of exported CSV datasets (no plotting dependency)."""

from __future__ import annotations

import csv
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import ConfigurationError

W, H, PAD = 480, 360, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _scale(lo: float, hi: float, a: float, b: float):
    span = hi - lo if hi > lo else 1.0
    return lambda v: a + (np.asarray(v, float) - lo) / span * (b - a)


def _frame(title: str, xlabel: str, ylabel: str, xr, yr) -> list[str]:
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
           f'<rect x="{PAD}" y="{PAD}" width="{W - 2 * PAD}" height="{H - 2 * PAD}" fill="none" stroke="black"/>',
           f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="14" y="{H / 2}" text-anchor="middle" transform="rotate(-90 14 {H / 2})">{escape(ylabel)}</text>',
           f'<text x="{PAD}" y="{H - PAD + 14}" text-anchor="middle">{xr[0]:.3g}</text>',
           f'<text x="{W - PAD}" y="{H - PAD + 14}" text-anchor="middle">{xr[1]:.3g}</text>',
           f'<text x="{PAD - 4}" y="{H - PAD}" text-anchor="end">{yr[0]:.3g}</text>',
           f'<text x="{PAD - 4}" y="{PAD + 4}" text-anchor="end">{yr[1]:.3g}</text>']
    return out


def lines_svg(series: dict[str, tuple], title: str = "", xlabel: str = "", ylabel: str = "",
              markers: bool = False) -> str:
    """Polyline (or scatter) plot; ``series`` maps a label to (x, y) arrays."""
    xs = np.concatenate([np.asarray(x, float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, float) for _, y in series.values()])
    xr, yr = (xs.min(), xs.max()), (ys.min(), ys.max())
    sx, sy = _scale(*xr, PAD, W - PAD), _scale(*yr, H - PAD, PAD)
    out = _frame(title, xlabel, ylabel, xr, yr)
    for i, (label, (x, y)) in enumerate(series.items()):
        c = COLORS[i % len(COLORS)]
        px, py = sx(x), sy(y)
        if markers:
            out += [f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2" fill="{c}"/>' for a, b in zip(px, py)]
        else:
            pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="1.5"/>')
        out.append(f'<text x="{W - PAD - 4}" y="{PAD + 14 + 13 * i}" text-anchor="end" fill="{c}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def heatmap_svg(mat: np.ndarray, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """Grey-scale image of a non-negative matrix, row 0 at the top."""
    mat = np.asarray(mat, float)
    rows, cols = mat.shape
    top = mat.max() if mat.max() > 0 else 1.0
    cw, ch = (W - 2 * PAD) / cols, (H - 2 * PAD) / rows
    out = _frame(title, xlabel, ylabel, (1, cols), (rows, 1))
    for i in range(rows):
        for j in range(cols):
            level = int(round(255 * (1 - mat[i, j] / top)))
            out.append(f'<rect x="{PAD + j * cw:.2f}" y="{PAD + i * ch:.2f}" width="{cw:.2f}" '
                       f'height="{ch:.2f}" fill="rgb({level},{level},{level})"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _read(path: Path) -> tuple[list[str], list[list[str]]]:
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def render_csv(path: str | Path) -> str:
    """Pick a plot type from the dataset's file name and header."""
    path = Path(path)
    header, rows = _read(path)
    col = {h: i for i, h in enumerate(header)}
    stem = path.stem
    if stem == "intensity":
        periods = sorted({int(r[col["period"]]) for r in rows})
        n = max(int(r[col["site"]]) for r in rows)
        mat = np.zeros((len(periods), n))
        for r in rows:
            mat[periods.index(int(r[col["period"]])), int(r[col["site"]]) - 1] = float(r[col["normalized"]])
        return heatmap_svg(mat, "normalized intensity", "site", "period")
    if stem.startswith("correlation"):
        n = max(int(r[col["site_n"]]) for r in rows)
        mat = np.zeros((n, n))
        for r in rows:
            mat[int(r[col["site_n"]]) - 1, int(r[col["site_m"]]) - 1] = float(r[col["normalized"]])
        return heatmap_svg(mat, stem.replace("_", " "), "site m", "site n")
    if stem == "lyapunov":
        x = [float(r[col["phi"]]) for r in rows]
        y = [float(r[col["per_period"]]) for r in rows]
        return lines_svg({"lambda": (x, y)}, "Lyapunov exponent", "phi (rad)", "per period", markers=True)
    if stem == "entropy":
        series = {}
        for phi in sorted({r[col["phi"]] for r in rows}, key=float):
            sel = [r for r in rows if r[col["phi"]] == phi]
            series[f"phi={float(phi):.3f}"] = ([int(r[col["k"]]) for r in sel],
                                               [float(r[col["s2"]]) for r in sel])
        return lines_svg(series, "Renyi-2 entropy", "period", "S2")
    if stem == "spectra":
        series = {}
        for kind in ("PBC", "OBC"):
            sel = [r for r in rows if r[col["kind"]] == kind]
            series[kind] = ([float(r[col["re"]]) for r in sel], [float(r[col["im"]]) for r in sel])
        return lines_svg(series, "spectra", "Re E", "Im E", markers=True)
    if stem == "gbz":
        x = [float(r[col["beta_re"]]) for r in rows]
        y = [float(r[col["beta_im"]]) for r in rows]
        return lines_svg({"beta": (x, y)}, "generalized Brillouin zone", "Re beta", "Im beta", markers=True)
    if stem == "hoppings":
        x = [int(r[col["order"]]) for r in rows]
        y = [float(r[col["im"]]) for r in rows]
        return lines_svg({"Im kappa": (x, y)}, "bulk hoppings", "order", "Im kappa (1/um)", markers=True)
    raise ConfigurationError(f"no renderer for {path.name}")


def render_directory(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    written = []
    for path in sorted(directory.glob("*.csv")):
        svg = path.with_suffix(".svg")
        svg.write_text(render_csv(path))
        written.append(svg)
    if not written:
        raise ConfigurationError(f"no CSV datasets in {directory}")
    return written
