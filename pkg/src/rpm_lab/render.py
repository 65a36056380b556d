"""Deterministic SVG drawings of flattened triangulations."""

from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np

from .maps import next_halfedge
from .surface import EquilateralSurface
from .uniformize import ConformalLayout

FACE_STYLE = {"fill": "none", "stroke": "#222", "stroke-width": "0.6",
              "vector-effect": "non-scaling-stroke"}
INTERSTICE_STYLE = {"fill": "#9bb7d4", "fill-opacity": "0.8", "stroke": "none"}
FLOWER_STYLE = {"fill": "#e8b04a", "fill-opacity": "0.45", "stroke": "#a06d00",
                "stroke-width": "0.8", "vector-effect": "non-scaling-stroke"}


def _fmt(x: float) -> str:
    return f"{x:.6f}".rstrip("0").rstrip(".") if x else "0"


def _points(zs) -> str:
    # the plane's y axis points up, SVG's down
    return " ".join(f"{_fmt(z.real)},{_fmt(-z.imag)}" for z in zs)


def half_flower_polygon(lay: ConformalLayout, v: int) -> np.ndarray:
    """Polygon of the half-flower at ``v`` through the side midpoints around it."""
    t = lay.triangulation
    hf = EquilateralSurface(t).half_flower(v)
    mids = lay.interstices.reshape(-1)
    pts = [mids[h] for h in hf.spokes]
    if not hf.closed:
        pts.append(lay.vertices[v])
    return np.array(pts)


def render_svg(lay: ConformalLayout, half_flowers=(), size: float = 800.0,
               margin: float = 0.05, max_radius: float | None = None) -> str:
    """SVG text with faces as outlines, interstices shaded and optional half-flowers.

    ``max_radius`` restricts the drawing to faces whose center lies within
    that distance of the origin, useful for large maps.
    """
    t = lay.triangulation
    keep = np.isfinite(lay.centers)
    if max_radius is not None:
        keep &= np.abs(lay.centers) <= max_radius
    faces = np.flatnonzero(keep)
    corners = lay.corners[faces]
    finite = corners[np.isfinite(corners)]
    if len(finite) == 0:
        finite = np.array([0j])
    lo = complex(finite.real.min(), finite.imag.min())
    hi = complex(finite.real.max(), finite.imag.max())
    span = max(hi.real - lo.real, hi.imag - lo.imag, 1e-12)
    pad = margin * span
    view = (lo.real - pad, -hi.imag - pad, hi.real - lo.real + 2 * pad, hi.imag - lo.imag + 2 * pad)
    aspect = view[3] / view[2]
    svg = ET.Element("svg", {"xmlns": "http://www.w3.org/2000/svg", "version": "1.1",
                             "width": _fmt(size), "height": _fmt(size * aspect),
                             "viewBox": " ".join(_fmt(x) for x in view)})
    g_int = ET.SubElement(svg, "g", {"id": "interstices", **INTERSTICE_STYLE})
    for f in faces.tolist():
        ET.SubElement(g_int, "polygon", {"points": _points(lay.interstices[f]),
                                         "data-face": str(f)})
    if len(half_flowers):
        g_fl = ET.SubElement(svg, "g", {"id": "half-flowers", **FLOWER_STYLE})
        for v in half_flowers:
            poly = half_flower_polygon(lay, int(v))
            ET.SubElement(g_fl, "polygon", {"points": _points(poly), "data-vertex": str(int(v))})
    g_face = ET.SubElement(svg, "g", {"id": "faces", **FACE_STYLE})
    for f, tri in zip(faces.tolist(), corners):
        if np.isfinite(tri).all():
            ET.SubElement(g_face, "polygon", {"points": _points(tri), "data-face": str(f)})
    if t.n_faces:
        r = t.root
        root_edge = (lay.vertices[t.origin[r]], lay.vertices[t.origin[next_halfedge(r)]])
        if np.isfinite(root_edge).all():
            a, b = root_edge
            ET.SubElement(svg, "line", {"id": "root-edge", "x1": _fmt(a.real), "y1": _fmt(-a.imag),
                                        "x2": _fmt(b.real), "y2": _fmt(-b.imag), "stroke": "#c00",
                                        "stroke-width": "2", "vector-effect": "non-scaling-stroke"})
    ET.indent(svg)
    return ET.tostring(svg, encoding="unicode") + "\n"
