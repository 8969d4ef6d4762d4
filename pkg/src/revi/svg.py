"""Minimal SVG line charts (one polyline per series, optional log-scale y)."""

import math
from xml.sax.saxutils import escape

__all__ = ["line_chart", "PALETTE"]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _fmt(v):
    return f"{v:.2f}"


def _ticks(lo, hi, count=5):
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def _label(v):
    return f"{v:.3g}"


def line_chart(series, title="", xlabel="iteration", ylabel="", log_y=True,
               width=640, height=420):
    """Render ``series`` (an ordered mapping name -> (x, y)) as an SVG string.

    With ``log_y`` points whose value is not positive cannot be drawn; they
    split the polyline into separate segments.  Non-finite values are skipped
    the same way.
    """
    left, right, top, bottom = 70, 150, 30, 45
    pw, ph = width - left - right, height - top - bottom

    def ty(v):
        return math.log10(v) if log_y else v

    def drawable(v):
        return math.isfinite(v) and (v > 0 or not log_y)

    xs, ys = [], []
    for x, y in series.values():
        for a, b in zip(x, y):
            a, b = float(a), float(b)
            if math.isfinite(a) and drawable(b):
                xs.append(a)
                ys.append(ty(b))
    if xs:
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(a):
        return left + (a - x0) / (x1 - x0) * pw

    def py(b):
        return top + ph - (ty(b) - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">'
                   f'{escape(title)}</text>')
    for a in _ticks(x0, x1):
        out.append(f'<text x="{_fmt(px(a))}" y="{top + ph + 15}" text-anchor="middle">'
                   f'{_label(a)}</text>')
    yticks = _ticks(y0, y1)
    if log_y and math.floor(y1) - math.ceil(y0) >= 1:
        lo, hi = math.ceil(y0), math.floor(y1)
        step = max(1, math.ceil((hi - lo) / 8))
        yticks = list(range(lo, hi + 1, step))
    for t in yticks:
        yy = top + ph - (t - y0) / (y1 - y0) * ph
        if not log_y:
            lab = _label(t)
        elif float(t).is_integer():
            lab = f"1e{int(t)}"
        else:
            lab = _label(10.0 ** t)
        out.append(f'<line x1="{left - 4}" y1="{_fmt(yy)}" x2="{left}" y2="{_fmt(yy)}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{left - 6}" y="{_fmt(yy + 4)}" text-anchor="end">{lab}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">'
               f'{escape(xlabel)}</text>')
    ylab = f"{ylabel} (log scale)" if log_y and ylabel else ylabel
    out.append(f'<text x="14" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + ph / 2:.1f})">{escape(ylab)}</text>')

    for i, (name, (x, y)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        segment = []
        segments = [segment]
        for a, b in zip(x, y):
            a, b = float(a), float(b)
            if math.isfinite(a) and drawable(b):
                segment.append(f"{_fmt(px(a))},{_fmt(py(b))}")
            elif segment:
                segment = []
                segments.append(segment)
        for seg in segments:
            if len(seg) == 1:
                cx, cy = seg[0].split(",")
                out.append(f'<circle cx="{cx}" cy="{cy}" r="1.5" fill="{color}"/>')
            elif seg:
                out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                           f'points="{" ".join(seg)}"/>')
        ly = top + 14 + 16 * i
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 30}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 35}" y="{ly + 4}">{escape(str(name))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
