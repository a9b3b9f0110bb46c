"""Static SVG figures of a decomposition.

Elements are drawn as one ``<polygon>`` each, projected on the x-y plane.
Fill colours are a pure function of the panel id (golden-ratio hue steps),
so the same manifest always renders to the same bytes.
"""
from __future__ import annotations

import colorsys
from dataclasses import dataclass
from typing import Optional
from xml.sax.saxutils import escape

from .errors import PanelizeError
from .mesh import Mesh

BARE_FILL = "#f2f2f2"
EDGE_COLOR = "#555555"
CURVE_COLOR = "#000000"


class RenderError(PanelizeError):
    """The mesh cannot be drawn (no coordinates, nothing to draw)."""


@dataclass(frozen=True)
class RenderOptions:
    color_by: str = "panel"        # panel | chain | none
    stroke_width: float = 1.0
    size: int = 800                # canvas width and height in px
    margin: int = 20

    def __post_init__(self):
        if self.color_by not in ("panel", "chain", "none"):
            raise RenderError(f"color_by must be panel, chain or none, not {self.color_by!r}")
        if not (self.size > 2 * self.margin and self.stroke_width > 0):
            raise RenderError("canvas size and stroke width must be positive")


def panel_color(pid: int) -> str:
    """Deterministic, well-spread fill colour for a panel id."""
    hue = (pid * 0.6180339887498949) % 1.0
    r, g, b = colorsys.hls_to_rgb(hue, 0.62, 0.55)
    return "#%02x%02x%02x" % (round(r * 255), round(g * 255), round(b * 255))


def _fmt(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(mesh: Mesh, manifest=None, options: RenderOptions = RenderOptions(),
               stiffener_mesh: Optional[Mesh] = None) -> str:
    """SVG text for ``mesh`` with the panels and curves of ``manifest``.

    ``color_by="chain"`` leaves the panels neutral and strokes each stiffener
    chain along its skin nodes (needs ``stiffener_mesh``).
    """
    if not mesh.elements:
        raise RenderError("mesh has no elements to draw")
    used = sorted({n for e in mesh.elements.values() for n in e.nodes})
    missing = [n for n in used if mesh.nodes.get(n) is None]
    if missing:
        raise RenderError(f"rendering needs nodal coordinates; node {missing[0]} has none")
    xs = [mesh.nodes[n][0] for n in used]
    ys = [mesh.nodes[n][1] for n in used]
    x0, y1 = min(xs), max(ys)
    span = max(max(xs) - x0, y1 - min(ys)) or 1.0
    scale = (options.size - 2 * options.margin) / span

    def pt(n):
        x, y = mesh.nodes[n][0], mesh.nodes[n][1]
        return f"{_fmt(options.margin + (x - x0) * scale)},{_fmt(options.margin + (y1 - y) * scale)}"

    owner = {}
    if manifest is not None:
        for p in sorted(manifest.panels, key=lambda p: p.id):
            for e in p.elements:
                owner[e] = p.id
    sw = _fmt(options.stroke_width)
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{options.size}" '
           f'height="{options.size}" viewBox="0 0 {options.size} {options.size}">',
           '<g id="elements">']
    for eid in sorted(mesh.elements):
        pid = owner.get(eid)
        fill = panel_color(pid) if pid is not None and options.color_by == "panel" else BARE_FILL
        label = f' data-panel="{pid}"' if pid is not None else ""
        pts = " ".join(pt(n) for n in mesh.elements[eid].nodes)
        out.append(f'<polygon id="e{eid}"{label} points="{pts}" fill="{fill}" '
                   f'stroke="{EDGE_COLOR}" stroke-width="{sw}"/>')
    out.append("</g>")

    curves = (manifest.curves or []) if manifest is not None else []
    if curves:
        out.append('<g id="curves">')
        for i, c in enumerate(curves):
            drawable = [n for n in c if mesh.nodes.get(n) is not None]
            out.append(f'<polyline id="c{i + 1}" points="{" ".join(pt(n) for n in drawable)}" '
                       f'fill="none" stroke="{CURVE_COLOR}" stroke-width="{_fmt(3 * options.stroke_width)}"/>')
        out.append("</g>")

    if options.color_by == "chain":
        out.extend(_chain_lines(mesh, manifest, stiffener_mesh, pt, options))
    title = "panelize" if manifest is None else f"panelize: {len(manifest.panels)} panels"
    out.append(f"<title>{escape(title)}</title>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _chain_lines(mesh, manifest, stiffener_mesh, pt, options) -> list:
    chains = ((manifest.stiffeners or {}).get("chains", []) if manifest is not None else [])
    if not chains:
        return []
    if stiffener_mesh is None:
        raise RenderError("colouring by chain needs the stiffener mesh")
    out = ['<g id="chains">']
    for i, chain in enumerate(chains, start=1):
        pairs = [[n for n in stiffener_mesh.elements[q].nodes if n in mesh.nodes]
                 for q in chain["elements"]]
        path = _stitch([p for p in pairs if p])
        if len(path) < 2:
            continue
        out.append(f'<polyline id="s{i}" data-panel="{chain["panel"]}" '
                   f'points="{" ".join(pt(n) for n in path)}" fill="none" '
                   f'stroke="{panel_color(i)}" stroke-width="{_fmt(4 * options.stroke_width)}"/>')
    out.append("</g>")
    return out


def _stitch(pairs) -> list:
    """Join the skin node groups of consecutive chain quads into one path."""
    if not pairs:
        return []
    path = list(pairs[0])
    if len(pairs) > 1 and path[0] in pairs[1]:
        path.reverse()
    for group in pairs[1:]:
        for n in sorted(group, key=lambda n: n != path[-1]):
            if n not in path:
                path.append(n)
    return path
