"""Minimal deterministic SVG line charts with optional shaded error bands.

Plots are derived artifacts: they never feed back into CSV content, and the
markup is plain enough to diff.
"""

from __future__ import annotations

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _ticks(lo: float, hi: float, count: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def line_chart(series, title="", xlabel="", ylabel="", width=720, height=440) -> str:
    """Render line series to SVG markup.

    Each series is a dict with keys label, x, y and optionally band=(lo, hi)
    arrays for a shaded region around the line.
    """
    if not series:
        raise ValueError("no series to plot")
    ml, mr, mt, mb = 70, 24, 34, 48
    xs = [float(v) for s in series for v in s["x"]]
    ys = [float(v) for s in series for v in s["y"]]
    for s in series:
        if "band" in s and s["band"] is not None:
            lo, hi = s["band"]
            ys.extend(float(v) for v in lo)
            ys.extend(float(v) for v in hi)
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    y_pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def px(x):
        return ml + (float(x) - x_lo) / (x_hi - x_lo) * (width - ml - mr)

    def py(y):
        return height - mb - (float(y) - y_lo) / (y_hi - y_lo) * (height - mt - mb)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{title}</text>',
    ]
    axis = f'stroke="#333" stroke-width="1"'
    out.append(f'<line x1="{ml}" y1="{py(y_lo)}" x2="{ml}" y2="{py(y_hi)}" {axis}/>')
    out.append(
        f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" y2="{height - mb}" {axis}/>'
    )
    for tx in _ticks(x_lo, x_hi):
        out.append(
            f'<line x1="{px(tx):.2f}" y1="{height - mb}" x2="{px(tx):.2f}" '
            f'y2="{height - mb + 5}" {axis}/>'
        )
        out.append(
            f'<text x="{px(tx):.2f}" y="{height - mb + 18}" text-anchor="middle" '
            f'font-size="11" font-family="sans-serif">{tx:.4g}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        out.append(f'<line x1="{ml - 5}" y1="{py(ty):.2f}" x2="{ml}" y2="{py(ty):.2f}" {axis}/>')
        out.append(
            f'<text x="{ml - 8}" y="{py(ty) + 4:.2f}" text-anchor="end" font-size="11" '
            f'font-family="sans-serif">{ty:.4g}</text>'
        )
    out.append(
        f'<text x="{(ml + width - mr) / 2:.1f}" y="{height - 10}" text-anchor="middle" '
        f'font-size="12" font-family="sans-serif">{xlabel}</text>'
    )
    out.append(
        f'<text x="16" y="{(mt + height - mb) / 2:.1f}" text-anchor="middle" font-size="12" '
        f'font-family="sans-serif" transform="rotate(-90 16 {(mt + height - mb) / 2:.1f})">'
        f"{ylabel}</text>"
    )
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        if "band" in s and s["band"] is not None:
            lo, hi = s["band"]
            pts = [f"{px(x):.2f},{py(h):.2f}" for x, h in zip(s["x"], hi)]
            pts += [f"{px(x):.2f},{py(l):.2f}" for x, l in zip(reversed(s["x"]), reversed(lo))]
            out.append(f'<polygon points="{" ".join(pts)}" fill="{color}" fill-opacity="0.2"/>')
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(s["x"], s["y"]))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.6"/>')
        ly = mt + 16 + 16 * i
        out.append(
            f'<line x1="{width - mr - 150}" y1="{ly}" x2="{width - mr - 126}" y2="{ly}" '
            f'stroke="{color}" stroke-width="1.6"/>'
        )
        out.append(
            f'<text x="{width - mr - 120}" y="{ly + 4}" font-size="11" '
            f'font-family="sans-serif">{s["label"]}</text>'
        )
    out.append("</svg>")
    return "\n".join(out)
