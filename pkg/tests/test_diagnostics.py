import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from rpm_lab.diagnostics import (CenterEmbedding, EmbeddingError, center_embedding,
                                 dual_distances, effective_resistance, embedding_distance,
                                 isolation_radii, min_remaining, min_remaining_grid,
                                 normalize_centers, one_ended_check, regular_ball,
                                 regular_layer_counts, resistance_curve,
                                 series_parallel_resistance, support_counts, supported_curve,
                                 supported_fraction, supported_mask)
from rpm_lab.maps import ball, combinatorial_distance, from_faces
from rpm_lab.necklace import build_plus, build_rooted
from rpm_lab.uniformize import layout

from .strategies import words

SQRT3 = math.sqrt(3)


def strip(n):
    """``2n`` triangles in a row; the dual graph is a path."""
    faces = []
    for i in range(n):
        a, b, a1, b1 = 2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3
        faces += [(b, b1, a), (a, b1, a1)]
    return faces


def embed(t):
    return center_embedding(t, layout(t))


# -- center embeddings ---------------------------------------------------------------

def test_two_face_embedding():
    t = from_faces([(0, 1, 2), (0, 2, 3)])
    e = embed(t)
    e.check()
    assert e.g[e.root] == 0 and abs(e.g[1 - e.root]) == pytest.approx(1.0, abs=1e-12)


def test_lattice_centers():
    t = regular_ball(6, 3)
    e = embed(t)
    e.check()
    d = np.sort(np.abs(np.delete(e.g, e.root)))
    # three edge neighbours at distance 1, then the next shell at sqrt(3)
    assert np.allclose(d[:3], 1.0, atol=1e-10)
    assert d[3] == pytest.approx(SQRT3, abs=1e-10)


@settings(max_examples=30)
@given(st.floats(-3, 3), st.complex_numbers(max_magnitude=50))
def test_center_normalization_is_similarity_invariant(log_a, b):
    t = build_plus("BRbRRbBBrrRBRR")
    lay = layout(t)
    g = normalize_centers(lay.centers, t.root_face)
    moved = normalize_centers(math.exp(log_a) * lay.centers + b, t.root_face)
    assert np.abs(moved - g).max() < 1e-10


def test_duplicate_centers_are_rejected():
    t = from_faces([(0, 1, 2), (0, 2, 3)])
    lay = layout(t)
    bad = replace(lay, centers=np.zeros(2, complex))
    with pytest.raises(EmbeddingError):
        center_embedding(t, bad)


def test_check_detects_bad_normalization():
    t = from_faces([(0, 1, 2), (0, 2, 3)])
    with pytest.raises(EmbeddingError):
        CenterEmbedding(t, np.array([0, 2 + 0j])).check()


# -- embedding distance ---------------------------------------------------------------

def test_embedding_distance_to_itself():
    e = embed(build_plus("BRbRRbBBrrRBRR"))
    assert embedding_distance(e, e) == 0


def test_embedding_distance_with_unit_combinatorial_distance():
    e1 = embed(from_faces([(0, 1, 2)]))
    e2 = embed(from_faces([(0, 1, 2), (0, 2, 3)]))
    assert combinatorial_distance(e1.triangulation, e2.triangulation) == 1
    assert embedding_distance(e1, e2) == 1


@settings(max_examples=20)
@given(st.floats(1e-6, 1e-2), st.integers(0, 1000))
def test_embedding_distance_under_perturbation(eps, seed):
    e = embed(build_plus("BRbRRbBBrrRBRR"))
    rng = np.random.default_rng(seed)
    noise = eps * np.exp(2j * np.pi * rng.random(len(e.g)))
    other = CenterEmbedding(e.triangulation, e.g + noise)
    assert embedding_distance(e, other) < eps


def _family():
    ws = ["BRbRRbBBrrRBRR", "BRbRRbBBrrRBRb", "BRbRRbBBrr", "RRBBbbRBRrB", "BBRRBRBRrbbB"]
    return [embed(build_plus(w)) for w in ws]


def test_embedding_distance_is_a_metric_on_samples():
    es = _family()
    for a in es:
        for b in es:
            dab = embedding_distance(a, b)
            assert dab == pytest.approx(embedding_distance(b, a), abs=1e-12)
            for c in es:
                assert dab <= embedding_distance(a, c) + embedding_distance(c, b) + 1e-12


# -- supported points -----------------------------------------------------------------

def test_two_points_are_never_supported():
    assert supported_fraction(np.array([0, 1 + 0j]), 0.5, 2) == 0


def test_isolation_radii():
    pts = np.array([0, 1, 3 + 0j])
    assert isolation_radii(pts).tolist() == [1, 1, 2]


def test_support_arguments_are_validated():
    pts = np.array([0, 1, 2 + 0j])
    for delta, s in ((0, 2), (1, 2), (0.5, 1)):
        with pytest.raises(ValueError):
            supported_fraction(pts, delta, s)
    with pytest.raises(ValueError):
        supported_fraction(np.array([0, 0, 1 + 0j]), 0.5, 2)


def test_geometric_line_has_few_supported_points():
    pts = np.array([2.0 ** -k for k in range(60)], complex)
    assert supported_fraction(pts, 0.5, 16) == 0


def test_uniform_disc_decay():
    rng = np.random.default_rng(0)
    r = np.sqrt(rng.random(400))
    pts = r * np.exp(2j * np.pi * rng.random(400))
    vals = [supported_fraction(pts, 0.5, s) * s for s in (2, 4, 8, 16, 32)]
    assert max(vals) < 4


def _clear_of_ties(pts, v, delta, margin=0.05):
    """No pair of points is nearly at the covering diameter and none sits near the outer circle."""
    rho = isolation_radii(pts)[v]
    R, r = rho / delta, rho * delta
    d = np.abs(pts[:, None] - pts[None, :])
    dv = np.abs(pts - pts[v])
    return (not np.any(np.abs(d / (2 * r) - 1) < margin)
            and not np.any(np.abs(dv / R - 1) < margin))


@settings(max_examples=60)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=3, max_size=14),
       st.sampled_from([0.1, 0.25, 0.5]))
def test_exact_inner_infimum_matches_grid_oracle(xy, delta):
    pts = np.array([complex(x, y) for x, y in xy])
    assume(isolation_radii(pts).min() > 1e-3)
    for v in range(len(pts)):
        exact = min_remaining(pts, v, delta)
        grid = min_remaining_grid(pts, v, delta)
        # the grid samples centers, so it can only miss the optimum
        assert exact <= grid
        if _clear_of_ties(pts, v, delta):
            assert exact == grid


def test_grid_oracle_on_a_thin_lens():
    pts = np.array([0, 3.25j, 0.625])
    assert min_remaining(pts, 1, 0.1) == 1
    assert min_remaining_grid(pts, 1, 0.1) == 1


@settings(max_examples=30)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=3, max_size=20),
       st.sampled_from([0.1, 0.25, 0.5]), st.integers(2, 8))
def test_supported_mask_agrees_with_exact_count(xy, delta, s):
    pts = np.array([complex(x, y) for x, y in xy])
    assume(isolation_radii(pts).min() > 1e-3)
    mask = supported_mask(pts, delta, s)
    assert mask.tolist() == [min_remaining(pts, v, delta) >= s for v in range(len(pts))]


@settings(max_examples=30)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=3, max_size=20),
       st.sampled_from([0.1, 0.25, 0.5]))
def test_support_counts_agree_with_the_mask(xy, delta):
    pts = np.array([complex(x, y) for x, y in xy])
    assume(isolation_radii(pts).min() > 1e-3)
    counts = support_counts(pts, delta)
    assert counts.tolist() == [min_remaining(pts, v, delta) for v in range(len(pts))]
    grid = [2, 3, 5, 8]
    curve = supported_curve(pts, delta, grid)
    assert curve.tolist() == [supported_fraction(pts, delta, s) for s in grid]


# -- resistance ----------------------------------------------------------------------

def test_path_of_three_dual_nodes():
    t = from_faces(strip(2)[:3])
    assert dual_distances(t).tolist() == [0, 1, 2]
    assert effective_resistance(t, 2) == pytest.approx(2.0)


def test_shorted_three_cycle():
    # three faces around one interior vertex: the dual is a 3-cycle
    t = from_faces([(0, 1, 2), (0, 2, 3), (0, 3, 1)])
    got = effective_resistance(t, 1)
    oracle = series_parallel_resistance([("s", "K"), ("s", "K"), ("K", "K")], "s", "K")
    assert got == pytest.approx(oracle) == pytest.approx(0.5)


def test_series_parallel_oracle_on_a_ladder():
    # Wheatstone-free ladder: series-parallel reducible
    edges = [(0, 1), (1, 2), (0, 3), (3, 2), (1, 3)]
    with pytest.raises(ValueError):
        series_parallel_resistance(edges, 0, 2)
    assert series_parallel_resistance([(0, 1), (1, 2), (0, 2)], 0, 2) == pytest.approx(2 / 3)


def test_resistance_on_a_strip_against_oracle():
    t = from_faces(strip(10), root_face=0)
    for r, x in resistance_curve(t, 8):
        assert x == pytest.approx(r)


def test_empty_sink_is_an_error():
    t = from_faces([(0, 1, 2)])
    with pytest.raises(ValueError):
        effective_resistance(t, 1)


@settings(max_examples=30)
@given(words(5, 300), st.data())
def test_resistance_is_non_decreasing(word, data):
    k = data.draw(st.integers(1, len(word)))
    curve = resistance_curve(build_rooted(word, k), 12)
    xs = [x for _, x in curve]
    assert all(b >= a - 1e-12 for a, b in zip(xs, xs[1:]))


# -- one-endedness and regular balls ------------------------------------------------

def test_lattice_patch_is_one_ended():
    t = regular_ball(6, 5)
    for r in (1, 2, 3):
        assert one_ended_check(t, r)


def test_two_ends_joined_by_a_strip():
    faces = strip(20)
    t = from_faces(faces, root_face=20, first_vertex=faces[20][0])
    assert not one_ended_check(t, 1)


def test_one_ended_on_necklace_samples():
    # a ball that reaches the boundary cuts it; only balls clear of it are asserted
    clear = 0
    for seed in range(8):
        rng = np.random.default_rng(seed)
        word = "".join(rng.choice(list("BbRr"), 2000))
        t = build_rooted(word, int(rng.integers(1, 2001)))
        dist = t.vertex_boundary_distances()
        for r in range(1, 6):
            if (dist[ball(t, r).vertices] > 0).all():
                clear += 1
                assert one_ended_check(t, r)
    assert clear > 0


def test_regular_ball_examples():
    assert regular_ball(6, 1).n_faces == 6
    assert regular_ball(7, 1).n_faces == 7
    assert regular_ball(6, 0).is_empty


@pytest.mark.parametrize("d", [6, 7, 8])
def test_regular_ball_layers(d):
    counts = [regular_ball(d, k).n_faces for k in range(1, 6)]
    assert counts == regular_layer_counts(d, 5)
    t = regular_ball(d, 4)
    interior = np.setdiff1d(np.arange(t.n_vertices), t.boundary_vertices)
    assert np.all(t.degrees[interior] == d)


def test_seven_regular_growth_is_exponential():
    counts = regular_layer_counts(7, 8)
    layers = np.diff([0] + counts)
    ratios = layers[2:] / layers[1:-1]
    assert np.all(ratios > 2)
    assert abs(ratios[-1] - ratios[-2]) < 0.01


@pytest.mark.parametrize("delta, expected", [(0.5, 12), (0.25, 54), (0.1, 360)])
def test_lattice_support_counts_match_a_direct_count(delta, expected):
    # interior lattice points see every lattice point closer than 1/delta; a disc of
    # radius delta < 1/2 removes one of them
    pts = np.array([a + b * np.exp(1j * np.pi / 3) for a in range(-25, 26) for b in range(-25, 26)])
    direct = sum(0 < abs(p) < (1 / delta) * (1 - 1e-9) for p in pts)
    assert direct == expected
    inner = pts[np.abs(pts) < 12]
    counts = support_counts(inner, delta)
    assert counts[int(np.argmin(np.abs(inner)))] == expected
