import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rpm_lab.diagnostics import regular_ball
from rpm_lab.maps import from_faces
from rpm_lab.necklace import build_plus
from rpm_lab.surface import SQRT3, UNIT_CORNERS, EquilateralSurface, chart

from .strategies import words


def test_cone_angles():
    lattice = EquilateralSurface(regular_ball(6, 2))
    assert lattice.cone_angle(0) == pytest.approx(2 * math.pi)
    wheel = EquilateralSurface(regular_ball(7, 1))
    assert wheel.cone_angle(0) == pytest.approx(7 * math.pi / 3)
    pocket = EquilateralSurface(build_plus("Bb"))
    assert pocket.cone_angle(2) == pytest.approx(2 * math.pi / 3)
    with pytest.raises(ValueError):
        wheel.cone_angle(1)


def test_chart_examples():
    z = 0.3 * cmath.exp(0.4j)
    assert chart(6, abs(z), 1, cmath.phase(z)) == pytest.approx(z, abs=1e-15)
    assert chart(12, 1.0, 1, 0.0) == pytest.approx(1.0)
    assert chart(12, 0.25, 1, math.pi / 6) == pytest.approx(0.5 * cmath.exp(1j * math.pi / 12), abs=1e-15)
    assert chart(7, 0.0, 3, 2.0) == 0


def test_chart_rejects_points_outside_the_flower():
    with pytest.raises(ValueError):
        chart(7, 0.5, 1, 2.0)
    with pytest.raises(ValueError):
        chart(7, 0.99, 1, math.pi / 6)


@settings(max_examples=100)
@given(st.integers(1, 20), st.floats(0.01, 0.86), st.data())
def test_chart_agrees_across_sector_boundaries(n, rho, data):
    j = data.draw(st.integers(1, max(1, n - 1)))
    if n == 1:
        return
    ray = 2 * math.pi * j / 6
    assert abs(chart(n, rho, j, ray) - chart(n, rho, j + 1, ray)) < 1e-12


def test_interstice_of_a_unit_face():
    s = EquilateralSurface(from_faces([(0, 1, 2)]))
    i = s.interstice(0)
    assert i.side == pytest.approx(0.5)
    face_area = SQRT3 / 4
    assert i.area / face_area == pytest.approx(0.25)
    assert i.center == pytest.approx(UNIT_CORNERS.mean())


def test_interstice_lies_in_its_face():
    s = EquilateralSurface(from_faces([(0, 1, 2)]))
    a, b, c = UNIT_CORNERS

    def inside(z):
        def cross(u, v):
            return (u.conjugate() * v).imag
        return all(cross(q - p, z - p) >= -1e-15 for p, q in ((a, b), (b, c), (c, a)))

    assert all(inside(z) for z in s.interstice(0).corners)


def test_lattice_half_flower_is_a_hexagon():
    s = EquilateralSurface(regular_ball(6, 2))
    hf = s.half_flower(0)
    assert hf.closed and len(hf.spokes) == 6 and hf.area_units == 6


def test_pocket_flower():
    s = EquilateralSurface(build_plus("Bb"))
    fl = s.flower(2)
    assert fl.closed and sorted(fl.faces) == [0, 1]


@settings(max_examples=60)
@given(words(1, 120))
def test_area_partition_is_exact(word):
    s = EquilateralSurface(build_plus(word))
    t = s.triangulation
    flowers = sum(s.half_flower(v).n_corners for v in range(t.n_vertices))
    half, inter, total = s.area_partition()
    assert half == Fraction(flowers)
    assert half + inter == total == 4 * t.n_faces
    assert float(total) * SQRT3 / 16 == pytest.approx(s.total_area)


@settings(max_examples=30)
@given(words(1, 40))
def test_path_metric_bound(word):
    s = EquilateralSurface(build_plus(word))
    t = s.triangulation
    dist = t.vertex_distances(0)
    for v in range(t.n_vertices):
        bound = s.path_metric_upper_bound(0, v)
        # walking along edges is one admissible path, straight lines are shorter
        assert bound <= dist[v] + 1e-12
        assert bound >= 0.5 * dist[v] - 1e-12


def test_regular_hexagon_in_the_lattice_patch():
    t = regular_ball(6, 1)
    s = EquilateralSurface(t)
    assert s.total_area == pytest.approx(6 * SQRT3 / 4)
    assert np.all(t.degrees[1:] == 3)
