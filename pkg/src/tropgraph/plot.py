"""SVG sketches of PL functions, one panel per edge.  Presentation only."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

from .functions import TropFunction

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def functions_svg(fs: Sequence[TropFunction], width: int = 480, panel_height: int = 160) -> str:
    g = fs[0].graph
    edges = g.edges
    pad = 28
    height = max(1, len(edges)) * (panel_height + pad) + pad
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">']
    for row, e in enumerate(edges):
        top = pad + row * (panel_height + pad)
        ys = [y for f in fs if (p := f.profile(e.id)) is not None for _, y in p.points()]
        if not ys:
            continue
        lo, hi = float(min(ys)), float(max(ys))
        span = hi - lo or 1.0
        L = float(e.length)

        def px(t):
            return pad + (width - 2 * pad) * float(t) / L

        def py(y):
            return top + panel_height - panel_height * (float(y) - lo) / span

        out.append(f'<text x="{pad}" y="{top - 8}">{escape(e.id)}: {escape(e.end0)} to '
                   f'{escape(e.end1)}, length {e.length}</text>')
        out.append(f'<rect x="{pad}" y="{top}" width="{width - 2 * pad}" height="{panel_height}" '
                   f'fill="none" stroke="#ccc"/>')
        for k, f in enumerate(fs):
            p = f.profile(e.id)
            if p is None:
                continue
            pts = " ".join(f"{px(t):.2f},{py(y):.2f}" for t, y in p.points())
            out.append(f'<polyline points="{pts}" fill="none" stroke="{_COLORS[k % len(_COLORS)]}" '
                       f'stroke-width="1.5"><title>{escape(f.name or f"f{k + 1}")}</title></polyline>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
