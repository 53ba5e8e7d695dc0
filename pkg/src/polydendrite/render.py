"""SVG rendering of pieces, attractor clouds and contact points.

Coordinates are those of the normalized system (``diam P = 1``) mapped to
a square canvas with the y axis pointing up, as in the plane.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .attractor import iterate, level_graph
from .errors import PolyDendriteError
from .system import PolygonalSystem, piece_arrays, words


@dataclass
class RenderOptions:
    depth: int = 2
    cloud_depth: Optional[int] = None
    size: int = 600
    margin: float = 0.05
    labels: Optional[bool] = None
    contacts: bool = True
    overlay: Optional[PolygonalSystem] = None


def _fmt(v: float) -> str:
    s = f"{v:.4f}"
    return "0.0000" if s == "-0.0000" else s


class _Frame:
    def __init__(self, pts: np.ndarray, size: int, margin: float):
        x0, x1 = pts.real.min(), pts.real.max()
        y0, y1 = pts.imag.min(), pts.imag.max()
        span = max(x1 - x0, y1 - y0) or 1.0
        self.x0, self.y1 = x0, y1
        self.k = size * (1 - 2 * margin) / span
        self.off = size * margin
        self.size = size

    def xy(self, z: complex) -> tuple:
        return (self.off + (z.real - self.x0) * self.k,
                self.off + (self.y1 - z.imag) * self.k)

    def points(self, arr) -> str:
        return " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (self.xy(z) for z in arr))


def render(system: PolygonalSystem, options: Optional[RenderOptions] = None) -> str:
    """SVG document with base polygon, level pieces, cloud and contacts."""
    o = options or RenderOptions()
    N, scale = system.normalized()
    over = None
    if o.overlay is not None:
        over = o.overlay.scaled(scale)
    pts = [N.base.array] + ([over.base.array] if over is not None else [])
    if o.depth > 0:
        pts.append(piece_arrays(N, o.depth).ravel())
    frame = _Frame(np.concatenate(pts), o.size, o.margin)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'width="{o.size}" height="{o.size}" viewBox="0 0 {o.size} {o.size}">']
    out.append('<g id="base" fill="none" stroke="#000" stroke-width="1.5">')
    out.append(f'<polygon points="{frame.points(N.base.array)}"/>')
    out.append("</g>")
    if o.depth > 0:
        labels = o.labels if o.labels is not None else N.m ** o.depth <= 125
        arr = piece_arrays(N, o.depth)
        ws = words(N.m, o.depth)
        out.append('<g id="pieces" fill="#cde" fill-opacity="0.5" stroke="#246" stroke-width="0.5">')
        for w, row in zip(ws, arr):
            tag = ".".join(str(c) for c in w)
            out.append(f'<polygon class="piece" data-word="{tag}" points="{frame.points(row)}"/>')
        out.append("</g>")
        if labels:
            out.append('<g id="labels" font-size="9" text-anchor="middle" fill="#123">')
            for w, row in zip(ws, arr):
                x, y = frame.xy(complex(row.mean()))
                tag = "".join(str(c + 1) for c in w)
                out.append(f'<text x="{_fmt(x)}" y="{_fmt(y)}">P{tag}</text>')
            out.append("</g>")
    cd = o.cloud_depth if o.cloud_depth is not None else (min(o.depth + 1, 5) if o.depth else 0)
    if cd > 0:
        cloud = iterate(N, N.base.array, cd).points
        out.append('<g id="cloud" fill="#a00">')
        for z in cloud:
            x, y = frame.xy(complex(z))
            out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="0.8"/>')
        out.append("</g>")
    if o.contacts and o.depth > 0:
        try:
            g = level_graph(N, o.depth).contacts
        except PolyDendriteError:
            g = None
        if g is not None:
            out.append('<g id="contacts" fill="#080">')
            for z in g.points:
                x, y = frame.xy(z)
                out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="2"/>')
            out.append("</g>")
    if over is not None:
        out.append('<g id="overlay" fill="none" stroke="#d60" stroke-width="0.8" stroke-dasharray="3,2">')
        out.append(f'<polygon points="{frame.points(over.base.array)}"/>')
        if o.depth > 0:
            for row in piece_arrays(over, o.depth):
                out.append(f'<polygon class="overlay-piece" points="{frame.points(row)}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
