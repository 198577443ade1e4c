"""CSV, SVG and JSON emitters for study results."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analysis import ConvergenceRecord


@dataclass
class ReportRow:
    h: float
    r: float
    error_l2: float
    error_x: float
    error_neg: float
    p: float
    q: float
    p_x: float = float("nan")
    p_neg: float = float("nan")
    q_coupled: float = float("nan")
    n_dofs: int = 0

    @classmethod
    def from_record(cls, rec: ConvergenceRecord) -> "ReportRow":
        return cls(**{f.name: getattr(rec, f.name) for f in fields(cls)})


COLUMNS = [f.name for f in fields(ReportRow)]


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def rows_to_csv(rows: Iterable[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([_fmt(getattr(row, c)) for c in COLUMNS])
    return buf.getvalue()


def csv_to_rows(text: str) -> list[ReportRow]:
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for rec in reader:
        vals = {c: (int(rec[c]) if c == "n_dofs" else float(rec[c])) for c in COLUMNS}
        out.append(ReportRow(**vals))
    return out


def write_csv(path: Path, rows: Sequence[ReportRow]) -> None:
    Path(path).write_text(rows_to_csv(rows), encoding="utf-8")


def fit_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def loglog_svg(series: dict[str, tuple[Sequence[float], Sequence[float]]], xlabel: str, title: str) -> str:
    """Self-contained SVG 1.1 log-log scatter with a fitted slope per series."""
    W, H, pad = 560, 420, 60
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    allx = np.log10(np.concatenate([np.asarray(s[0], float) for s in series.values()]))
    ally = np.log10(np.concatenate([np.asarray(s[1], float) for s in series.values()]))
    x0, x1 = allx.min(), allx.max()
    y0, y1 = ally.min(), ally.max()
    x0, x1 = (x0 - 0.05, x1 + 0.05) if x1 - x0 < 1e-12 else (x0 - 0.05 * (x1 - x0), x1 + 0.05 * (x1 - x0))
    y0, y1 = (y0 - 0.05, y1 + 0.05) if y1 - y0 < 1e-12 else (y0 - 0.05 * (y1 - y0), y1 + 0.05 * (y1 - y0))

    def px(lx):
        return pad + (lx - x0) / (x1 - x0) * (W - 2 * pad)

    def py(ly):
        return H - pad - (ly - y0) / (y1 - y0) * (H - 2 * pad)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{title}</text>',
        f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H - pad}" stroke="black"/>',
        f'<text x="{W / 2:.1f}" y="{H - 15}" text-anchor="middle" font-family="sans-serif" font-size="13">log10({xlabel})</text>',
        f'<text x="18" y="{H / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {H / 2:.1f})">log10(error)</text>',
    ]
    for tick in np.linspace(x0, x1, 5):
        parts.append(
            f'<text x="{px(tick):.1f}" y="{H - pad + 16}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="11">{tick:.2f}</text>'
        )
    for tick in np.linspace(y0, y1, 5):
        parts.append(
            f'<text x="{pad - 6}" y="{py(tick) + 4:.1f}" text-anchor="end" font-family="sans-serif" '
            f'font-size="11">{tick:.2f}</text>'
        )
    for n, (label, (xs, ys)) in enumerate(series.items()):
        c = colors[n % len(colors)]
        lx = np.log10(np.asarray(xs, float))
        ly = np.log10(np.asarray(ys, float))
        slope, icpt = np.polyfit(lx, ly, 1)
        parts.append(
            f'<line x1="{px(lx.min()):.1f}" y1="{py(slope * lx.min() + icpt):.1f}" '
            f'x2="{px(lx.max()):.1f}" y2="{py(slope * lx.max() + icpt):.1f}" stroke="{c}" stroke-dasharray="4 3"/>'
        )
        for a, b in zip(lx, ly):
            parts.append(f'<circle cx="{px(a):.1f}" cy="{py(b):.1f}" r="4" fill="{c}"/>')
        parts.append(
            f'<text x="{pad + 10}" y="{pad + 16 * (n + 1)}" font-family="sans-serif" font-size="12" '
            f'fill="{c}">{label}: slope {slope:.3f}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_json(path: Path, data: dict) -> None:
    Path(path).write_text(json.dumps(_clean(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def record_dicts(records: Sequence[ConvergenceRecord]) -> list[dict]:
    return [asdict(r) for r in records]
