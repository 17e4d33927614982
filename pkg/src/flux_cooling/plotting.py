"""Minimal standalone SVG line plots with a logarithmic ordinate."""

import math
from html import escape
from pathlib import Path

WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=80, right=160, top=30, bottom=60)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks_log(lo, hi):
    return [10.0 ** k for k in range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1)]


def _ticks_lin(lo, hi, n=5):
    step = (hi - lo) / n if hi > lo else 1.0
    mag = 10 ** math.floor(math.log10(step))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= step), default=step)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * abs(hi):
        ticks.append(round(t, 12))
        t += step
    return ticks


def line_plot(series, path=None, xlabel="", ylabel="", title="", log_x=False):
    """Render ``series`` = [(label, xs, ys, dashed), ...] to an SVG string.

    Non-positive or non-finite y values are skipped (log axis).
    """
    pts = [(x, y) for _, xs, ys, _ in series for x, y in zip(xs, ys)
           if y is not None and math.isfinite(y) and y > 0 and math.isfinite(x)
           and (x > 0 or not log_x)]
    if not pts:
        raise ValueError("nothing to plot")
    xs_all = [p[0] for p in pts]
    ys_all = [p[1] for p in pts]
    x_lo, x_hi = min(xs_all), max(xs_all)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5 * abs(x_lo or 1), x_hi + 0.5 * abs(x_hi or 1)
    y_lo = 10 ** math.floor(math.log10(min(ys_all)))
    y_hi = 10 ** math.ceil(math.log10(max(ys_all)))
    if y_hi == y_lo:
        y_hi *= 10

    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
    fx = (lambda x: math.log10(x)) if log_x else (lambda x: x)

    def px(x):
        return MARGIN["left"] + pw * (fx(x) - fx(x_lo)) / (fx(x_hi) - fx(x_lo))

    def py(y):
        return MARGIN["top"] + ph * (1 - (math.log10(y) - math.log10(y_lo))
                                     / (math.log10(y_hi) - math.log10(y_lo)))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
           f'fill="none" stroke="black"/>']
    for t in _ticks_log(y_lo, y_hi):
        if y_lo <= t <= y_hi:
            y = py(t)
            out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{y:.2f}" x2="{MARGIN["left"]}" '
                       f'y2="{y:.2f}" stroke="black"/>')
            out.append(f'<text x="{MARGIN["left"] - 8}" y="{y + 4:.2f}" text-anchor="end">'
                       f'{t:g}</text>')
    xticks = _ticks_log(x_lo, x_hi) if log_x else _ticks_lin(x_lo, x_hi)
    for t in xticks:
        if x_lo <= t <= x_hi:
            x = px(t)
            y0 = MARGIN["top"] + ph
            out.append(f'<line x1="{x:.2f}" y1="{y0}" x2="{x:.2f}" y2="{y0 + 5}" stroke="black"/>')
            out.append(f'<text x="{x:.2f}" y="{y0 + 20}" text-anchor="middle">{t:g}</text>')

    for i, (label, xs, ys, dashed) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        coords = [f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys)
                  if y is not None and math.isfinite(y) and y > 0 and (x > 0 or not log_x)]
        if not coords:
            continue
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash} '
                   f'points="{" ".join(coords)}"/>')
        ly = MARGIN["top"] + 15 + 18 * i
        lx = WIDTH - MARGIN["right"] + 10
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="1.8"{dash}/>')
        out.append(f'<text x="{lx + 30}" y="{ly + 4}">{escape(label)}</text>')

    out.append(f'<text x="{MARGIN["left"] + pw / 2}" y="{HEIGHT - 15}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text transform="translate(18,{MARGIN["top"] + ph / 2}) rotate(-90)" '
               f'text-anchor="middle">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{MARGIN["left"] + pw / 2}" y="20" text-anchor="middle">'
                   f'{escape(title)}</text>')
    out.append("</svg>\n")
    svg = "\n".join(out)
    if path is not None:
        Path(path).write_text(svg)
    return svg
