import math
import xml.etree.ElementTree as ET

import numpy as np

from rpm_lab.diagnostics import regular_ball
from rpm_lab.maps import from_faces
from rpm_lab.necklace import build_plus
from rpm_lab.render import half_flower_polygon, render_svg
from rpm_lab.uniformize import layout

NS = "{http://www.w3.org/2000/svg}"


def polygons(svg, group):
    root = ET.fromstring(svg)
    g = root.find(f"{NS}g[@id='{group}']")
    out = []
    for poly in g.findall(f"{NS}polygon"):
        pts = [complex(*map(float, p.split(","))) for p in poly.get("points").split()]
        out.append(np.array(pts))
    return out


def area(z):
    return 0.5 * abs(np.sum(z.real * np.roll(z.imag, -1) - np.roll(z.real, -1) * z.imag))


def test_single_triangle_svg():
    svg = render_svg(layout(from_faces([(0, 1, 2)])))
    faces, inter = polygons(svg, "faces"), polygons(svg, "interstices")
    assert len(faces) == 1 and len(inter) == 1
    assert math.isclose(area(inter[0]) / area(faces[0]), 0.25, rel_tol=1e-4)


def test_svg_is_deterministic_xml():
    lay = layout(build_plus("BRbRRbBBrrRBRR"))
    a = render_svg(lay, half_flowers=[0, 3])
    assert a == render_svg(lay, half_flowers=[0, 3])
    root = ET.fromstring(a)
    assert root.tag == f"{NS}svg"
    assert len(polygons(a, "faces")) == 14
    assert len(polygons(a, "half-flowers")) == 2
    assert root.find(f"{NS}line[@id='root-edge']") is not None


def test_lattice_half_flower_is_a_regular_hexagon():
    lay = layout(regular_ball(6, 2))
    poly = half_flower_polygon(lay, 0)
    assert len(poly) == 6
    r = np.abs(poly - lay.vertices[0])
    assert np.allclose(r, r[0], rtol=1e-8)


def test_radius_limits_the_drawing():
    lay = layout(regular_ball(6, 4))
    small = render_svg(lay, max_radius=1.5)
    assert 0 < len(polygons(small, "faces")) < lay.triangulation.n_faces
