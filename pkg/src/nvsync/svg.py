"""Tiny static SVG plot writer.

Only what the reproduction commands need: line and marker series on one
pair of axes, linear or log10 scales, a fixed tick policy, and fully
deterministic text output (fixed float formats, no timestamps).  Not a
plotting library; there are no styling hooks and no interactivity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

__all__ = ["Series", "render_plot", "write_plot"]

_PALETTE = ("#1f6f8b", "#c0392b", "#1e8449", "#7d6608", "#5b2c6f", "#b9770e")
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 62.0, 16.0, 34.0, 46.0


@dataclass(frozen=True)
class Series:
    """One plotted series; mode is "line" or "markers"."""

    name: str
    x: tuple[float, ...]
    y: tuple[float, ...]
    mode: str = "line"

    def __post_init__(self):
        if self.mode not in ("line", "markers"):
            raise ValueError(f"mode must be 'line' or 'markers', got {self.mode!r}")
        if len(self.x) != len(self.y):
            raise ValueError("x and y lengths differ")
        if not self.x:
            raise ValueError("empty series")


def _limits(values: list[float], log: bool) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if log:
        if lo <= 0.0:
            raise ValueError("log axis needs positive data")
        lo, hi = math.log10(lo), math.log10(hi)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


def _nice_step(span: float) -> float:
    raw = span / 4.0
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0):
        if raw <= mult * mag:
            return mult * mag
    return 10.0 * mag


def _ticks(lo: float, hi: float, log: bool) -> list[tuple[float, str]]:
    """Tick positions in axis units (log10 units on log axes) with labels."""
    if log:
        decades = range(math.ceil(lo), math.floor(hi) + 1)
        out = [(float(k), f"1e{k}") for k in decades]
        if len(out) >= 2:
            return out
    step = _nice_step(hi - lo)
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-9 * step:
        out.append((v, f"{v:g}" if not log else f"{10.0 ** v:.3g}"))
        v += step
    return out


def render_plot(
    series: list[Series],
    x_label: str,
    y_label: str,
    *,
    x_log: bool = False,
    y_log: bool = False,
    title: str = "",
    width: float = 640.0,
    height: float = 440.0,
) -> str:
    """Render the series to an SVG document string."""
    if not series:
        raise ValueError("nothing to plot")
    x_lo, x_hi = _limits([v for s in series for v in s.x], x_log)
    y_lo, y_hi = _limits([v for s in series for v in s.y], y_log)
    px_w = width - _MARGIN_L - _MARGIN_R
    px_h = height - _MARGIN_T - _MARGIN_B

    def sx(v: float) -> float:
        u = math.log10(v) if x_log else v
        return _MARGIN_L + (u - x_lo) / (x_hi - x_lo) * px_w

    def sy(v: float) -> float:
        u = math.log10(v) if y_log else v
        return _MARGIN_T + px_h - (u - y_lo) / (y_hi - y_lo) * px_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}" '
        f'viewBox="0 0 {width:g} {height:g}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width:g}" height="{height:g}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text x="{width / 2:.2f}" y="18" text-anchor="middle" '
            f'font-size="13">{title}</text>'
        )

    # axes box and ticks
    x0, y0 = _MARGIN_L, _MARGIN_T + px_h
    out.append(
        f'<rect x="{x0:.2f}" y="{_MARGIN_T:.2f}" width="{px_w:.2f}" height="{px_h:.2f}" '
        f'fill="none" stroke="#333" stroke-width="1"/>'
    )
    for pos, label in _ticks(x_lo, x_hi, x_log):
        px = _MARGIN_L + (pos - x_lo) / (x_hi - x_lo) * px_w
        out.append(f'<line x1="{px:.2f}" y1="{y0:.2f}" x2="{px:.2f}" y2="{y0 + 5:.2f}" stroke="#333"/>')
        out.append(f'<text x="{px:.2f}" y="{y0 + 18:.2f}" text-anchor="middle">{label}</text>')
    for pos, label in _ticks(y_lo, y_hi, y_log):
        py = _MARGIN_T + px_h - (pos - y_lo) / (y_hi - y_lo) * px_h
        out.append(f'<line x1="{x0 - 5:.2f}" y1="{py:.2f}" x2="{x0:.2f}" y2="{py:.2f}" stroke="#333"/>')
        out.append(f'<text x="{x0 - 8:.2f}" y="{py + 4:.2f}" text-anchor="end">{label}</text>')
    out.append(
        f'<text x="{_MARGIN_L + px_w / 2:.2f}" y="{height - 10:.2f}" '
        f'text-anchor="middle">{x_label}</text>'
    )
    out.append(
        f'<text x="14" y="{_MARGIN_T + px_h / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {_MARGIN_T + px_h / 2:.2f})">{y_label}</text>'
    )

    for idx, s in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        if s.mode == "line":
            pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(s.x, s.y))
            out.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        else:
            for a, b in zip(s.x, s.y):
                out.append(
                    f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="3" fill="{color}" '
                    f'fill-opacity="0.75"/>'
                )
        ly = _MARGIN_T + 14.0 + 14.0 * idx
        lx = _MARGIN_L + px_w - 8.0
        out.append(f'<text x="{lx:.2f}" y="{ly:.2f}" text-anchor="end" fill="{color}">{s.name}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_plot(path: str | Path, series: list[Series], x_label: str, y_label: str, **kwargs) -> Path:
    path = Path(path)
    path.write_text(render_plot(series, x_label, y_label, **kwargs))
    return path
