from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rpm_lab.maps import (AmbiguousGluing, DisconnectedComplex, LoopEdge, NonTriangularFace,
                          RootedTriangulation,
                          ball, boundary_distance, canonical_code, combinatorial_distance,
                          dual_graph, empty_triangulation, face_boundary_distances, from_faces,
                          relabel, rooted_isomorphic)
from rpm_lab.necklace import build_plus, build_rooted
from rpm_lab.uniformize import double_disc

from .strategies import words

TRIANGLE = [(0, 1, 2)]
TWO = [(0, 1, 2), (0, 2, 3)]
WHEEL7 = [(0, 1 + i, 1 + (i + 1) % 7) for i in range(7)]
FIG4 = "BRbRRbBBrrRBRR"


def doubled(t):
    d = double_disc(t)
    return RootedTriangulation(d.origin, d.twin, 0, d.n_vertices)


def test_single_triangle_basics():
    t = from_faces(TRIANGLE)
    assert (t.n_vertices, t.n_edges, t.n_faces, t.kind) == (3, 3, 1, "disc")
    assert t.root_triple() == (0, 1, 2)
    assert t.euler_characteristic() == 1


def test_ball_of_single_triangle():
    t = from_faces(TRIANGLE)
    b0 = ball(t, 0)
    assert b0.n_faces == 0 and list(b0.vertices) == [t.root_vertex]
    assert b0.code() != ball(from_faces(TWO), 1).code()
    assert ball(t, 1).n_faces == 1


def test_ball_one_of_figure4_is_the_fan_of_the_root_vertex():
    t = build_plus(FIG4)
    assert t.n_faces == 14
    root = t.root_vertex
    # brute-force incidence scan
    expected = {f for f in range(t.n_faces) if root in t.faces[f]}
    assert set(ball(t, 1).faces.tolist()) == expected


@settings(max_examples=60, deadline=None)
@given(words(1, 40), st.integers(0, 4))
def test_balls_are_nested_and_grow_from_the_previous_layer(word, r):
    t = build_plus(word)
    inner = ball(t, r)
    outer = ball(t, r + 1)
    assert set(inner.faces.tolist()) <= set(outer.faces.tolist())
    touched = set(inner.vertices.tolist())
    for f in outer.faces:
        assert touched & set(t.faces[f].tolist())


def test_rooted_isomorphic_examples():
    t = build_plus("BRbR")
    assert rooted_isomorphic(t, t)
    assert not rooted_isomorphic(from_faces(TRIANGLE), from_faces(TWO))
    assert not rooted_isomorphic(build_plus("Bb"), build_plus("BB"))


@settings(max_examples=40, deadline=None)
@given(words(1, 30), st.integers(0, 2 ** 31))
def test_isomorphism_ignores_labels(word, seed):
    t = build_plus(word)
    assert rooted_isomorphic(t, relabel(t, seed))


def test_isomorphism_respects_the_root():
    t = build_plus("BRbR")
    for k in (2, 3, 4):
        other = build_rooted("BRbR", k)
        assert rooted_isomorphic(other, t) == (canonical_code(other) == canonical_code(t))
    assert not rooted_isomorphic(build_rooted("BRbR", 3), t)


def test_combinatorial_distance_examples():
    t = build_plus("BRbR")
    assert combinatorial_distance(t, t) == 0
    assert combinatorial_distance(from_faces(TRIANGLE), from_faces(TWO)) == 1


def brute_distance(t1, t2, rmax=50):
    for r in range(rmax):
        if ball(t1, r).code() != ball(t2, r).code():
            return Fraction(1, r) if r else None
    return Fraction(0)


def test_combinatorial_distance_against_ball_scan():
    t1, t2 = build_plus("BBBB"), build_plus("BBBr")
    d = combinatorial_distance(t1, t2)
    assert d == brute_distance(t1, t2)
    # both words give a fan of four triangles around vertex 1
    assert d == 0 and rooted_isomorphic(t1, t2)
    t3 = build_plus("BBbr")
    assert combinatorial_distance(t1, t3) == brute_distance(t1, t3) > 0


@settings(max_examples=40, deadline=None)
@given(words(1, 12), words(1, 12))
def test_combinatorial_distance_is_symmetric(x, y):
    t1, t2 = build_plus(x), build_plus(y)
    d = combinatorial_distance(t1, t2)
    assert d == combinatorial_distance(t2, t1)
    assert (d == 0) == rooted_isomorphic(t1, t2)


def test_boundary_distance_examples():
    t = from_faces(TRIANGLE)
    assert all(boundary_distance(t, v) == 0 for v in range(3))
    w = from_faces(WHEEL7)
    assert boundary_distance(w, 0) == 1
    f4 = build_plus(FIG4)
    g = nx.Graph()
    g.add_edges_from(zip(f4.origin.tolist(), f4.dest.tolist()))
    bd = set(f4.boundary_vertices.tolist())
    lengths = nx.single_source_shortest_path_length(g, 0)
    assert boundary_distance(f4, 0) == min(lengths[v] for v in bd)


def test_boundary_distance_absent_on_a_sphere():
    s = doubled(from_faces(WHEEL7))
    assert s.kind == "sphere"
    assert boundary_distance(s, 0) is None
    assert face_boundary_distances(s) is None


def test_dual_graph_examples():
    g = dual_graph(from_faces(TRIANGLE))
    assert g.number_of_nodes() == 1 and g.number_of_edges() == 0
    g = dual_graph(from_faces(TWO))
    assert g.number_of_edges() == 1


def test_sphere_with_five_vertices_has_cubic_dual():
    # the double of a triangle glued to two more faces: two apices over a triangle
    faces = [(0, 1, 3), (1, 2, 3), (2, 0, 3), (1, 0, 4), (2, 1, 4), (0, 2, 4)]
    t = from_faces(faces)
    assert t.kind == "sphere" and t.n_faces == 2 * 5 - 4 and t.n_edges == 3 * 5 - 6
    g = dual_graph(t)
    assert g.number_of_nodes() == 6
    assert all(d == 3 for _, d in g.degree())


@settings(max_examples=40, deadline=None)
@given(words(1, 60))
def test_euler_characteristic_of_discs_and_their_doubles(word):
    t = build_plus(word)
    assert t.euler_characteristic() == 1
    s = doubled(t)
    assert s.kind == "sphere"
    assert s.euler_characteristic() == 2
    assert s.n_faces == 2 * s.n_vertices - 4
    assert s.n_edges == 3 * s.n_vertices - 6


@settings(max_examples=40, deadline=None)
@given(words(1, 60))
def test_dual_degrees(word):
    t = build_plus(word)
    g = dual_graph(t)
    interior = np.all(t.twin.reshape(-1, 3) >= 0, axis=1)
    for f, d in g.degree():
        assert d <= 3
        if interior[f]:
            assert d == 3


def test_from_faces_errors():
    with pytest.raises(LoopEdge):
        from_faces([(0, 0, 1)])
    with pytest.raises(NonTriangularFace):
        from_faces([(0, 1, 2, 3)])
    with pytest.raises(DisconnectedComplex):
        from_faces([(0, 1, 2), (3, 4, 5)])
    with pytest.raises(AmbiguousGluing):
        # two faces on each side of a doubled edge
        from_faces([(0, 1, 2), (1, 0, 3), (0, 1, 4), (1, 0, 5)])


def test_empty_map():
    t = empty_triangulation(1)
    assert t.is_empty and t.kind == "disc"
    assert ball(t, 3).n_faces == 0
