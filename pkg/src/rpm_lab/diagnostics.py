"""Center embeddings and the statistics computed on them.

Everything here works on finite data: a normalized point set per rooted map,
the supported-point count on arbitrary planar point sets, and dual-graph
resistance as a stand-in for recurrence.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order, connected_components
from scipy.sparse.linalg import spsolve
from scipy.spatial import cKDTree

from .maps import (RootedTriangulation, ball, combinatorial_distance, discovery_order,
                   empty_triangulation, from_faces)
from .uniformize import ConformalLayout


class EmbeddingError(ValueError):
    pass


# -- center embeddings --------------------------------------------------------------

@dataclass(frozen=True)
class CenterEmbedding:
    triangulation: RootedTriangulation
    g: np.ndarray        # complex point per face

    @property
    def root(self) -> int:
        return self.triangulation.root_face

    def check(self, tol: float = 1e-10) -> None:
        g = self.g
        if abs(g[self.root]) > tol:
            raise EmbeddingError("root center is not at the origin")
        if len(g) > 1:
            others = np.delete(np.abs(g), self.root)
            if abs(others.min() - 1) > tol:
                raise EmbeddingError("closest non-root center is not at distance 1")
        if len(np.unique(np.round(g, 12))) < len(g):
            raise EmbeddingError("two faces share a center")


def normalize_centers(points: np.ndarray, root: int) -> np.ndarray:
    """Translate the root point to 0 and scale the nearest other point to modulus 1."""
    z = np.asarray(points, complex) - points[root]
    if len(z) == 1:
        return z
    d = np.abs(z)
    d[root] = np.inf
    m = d.min()
    if not m > 0:
        raise EmbeddingError("duplicate centers: the root center is repeated")
    return z / m


def center_embedding(t: RootedTriangulation, layout: ConformalLayout) -> CenterEmbedding:
    c = np.asarray(layout.centers, complex)
    if len(c) != t.n_faces:
        raise EmbeddingError("layout does not match the triangulation")
    if len(c) > 1:
        xy = np.column_stack([c.real, c.imag])
        gap = cKDTree(xy).query(xy, k=2)[0][:, 1].min()
        if gap <= 1e-12 * max(1.0, float(np.abs(c).max())):
            raise EmbeddingError("duplicate centers: the embedding is not injective")
    return CenterEmbedding(t, normalize_centers(c, t.root_face))


def embedding_distance(e1: CenterEmbedding, e2: CenterEmbedding) -> float:
    """``d_c`` plus the weighted center discrepancy over the balls the two maps share.

    ``B_0`` is represented by the root face alone.  The sum runs over the radii
    at which the balls are equivalent, so the faces are matched through the
    breadth-first order of their common encoding.
    """
    t1, t2 = e1.triangulation, e2.triangulation
    d = combinatorial_distance(t1, t2)
    if d == 1:
        top = 0
    elif d > 0:
        top = int(1 / d) - 1
    else:
        top = None
    total = float(d)
    n = 0
    prev = -1
    while top is None or n <= top:
        if n == 0:
            f1 = np.array([t1.root_face])
            f2 = np.array([t2.root_face])
        else:
            f1 = discovery_order(t1, ball(t1, n).faces)
            f2 = discovery_order(t2, ball(t2, n).faces)
        if len(f1) != len(f2):
            raise AssertionError("equivalent balls of different sizes")
        diff = np.abs(e1.g[f1] - e2.g[f2])
        total += float(np.sum(diff / (1 + diff))) / (2 ** (n + 1) * len(f1))
        if top is None:
            if len(f1) == prev and n > 0:
                # the balls are exhausted; the remaining terms repeat this one
                total += float(np.sum(diff / (1 + diff))) / len(f1) / 2 ** (n + 1)
                break
            prev = len(f1)
        n += 1
    return total


# -- supported points -----------------------------------------------------------------

def isolation_radii(points: np.ndarray) -> np.ndarray:
    """Distance from each point to the nearest other point of the set."""
    xy = np.column_stack([np.real(points), np.imag(points)])
    d, _ = cKDTree(xy).query(xy, k=2)
    return d[:, 1]


def _max_cover(pts: np.ndarray, r: float) -> int:
    """Largest number of points in one open disc of radius ``r``.

    A finite set fits in an open disc of radius ``r`` iff it fits in a closed
    one of radius ``r (1 - 1e-9)``.  An optimal closed disc can be moved until
    its boundary passes through two of the points or it is centered at one.
    """
    n = len(pts)
    if n == 0:
        return 0
    rr = r * (1 - 1e-9)
    tol = rr * (1 + 1e-12)
    dist = np.abs(pts[:, None] - pts[None, :])
    best = int((dist <= tol).sum(axis=1).max())
    i, j = np.nonzero(np.triu(dist <= 2 * rr, 1))
    if len(i) == 0:
        return best
    mid = 0.5 * (pts[i] + pts[j])
    half = 0.5 * dist[i, j]
    h = np.sqrt(np.maximum(rr * rr - half * half, 0.0))
    normal = 1j * (pts[j] - pts[i]) / dist[i, j]
    for centers in (mid + h * normal, mid - h * normal):
        inside = np.abs(pts[None, :] - centers[:, None]) <= tol
        best = max(best, int(inside.sum(axis=1).max()))
    return best


def _outer(points: np.ndarray, v: int, radius: float) -> np.ndarray:
    d = np.abs(points - points[v])
    return points[d < radius * (1 - 1e-9)]


def validate_support_args(delta: float, s: float) -> None:
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if s < 2:
        raise ValueError("s must be at least 2")


def supported_mask(points, delta: float, s: float) -> np.ndarray:
    """Per point: whether every disc of radius ``delta * rho_v`` leaves ``s`` points of ``D(v, rho_v / delta)``."""
    validate_support_args(delta, s)
    z = np.asarray(points, complex)
    if len(z) < 2:
        raise ValueError("need at least two points")
    rho = isolation_radii(z)
    if not np.all(rho > 0):
        raise ValueError("point set has repeated points")
    xy = np.column_stack([z.real, z.imag])
    tree = cKDTree(xy)
    out = np.zeros(len(z), bool)
    for v in range(len(z)):
        R, r = rho[v] / delta, rho[v] * delta
        near = z[tree.query_ball_point(xy[v], R)]
        near = near[np.abs(near - z[v]) < R * (1 - 1e-9)]
        n = len(near)
        if n < s:
            continue
        # disc-at-a-point covers bound the best cover from below, doubled discs from above
        local = cKDTree(np.column_stack([near.real, near.imag]))
        nxy = np.column_stack([near.real, near.imag])
        lo = max(int((np.abs(near - x) < r * (1 - 1e-9)).sum()) for x in near)
        if n - lo < s:
            continue
        hi = max(len(x) for x in local.query_ball_point(nxy, 2 * r))
        if n - hi >= s:
            out[v] = True
            continue
        out[v] = n - _max_cover(near, r) >= s
    return out


def supported_fraction(points, delta: float, s: float) -> float:
    return float(supported_mask(points, delta, s).mean())


def support_counts(points, delta: float) -> np.ndarray:
    """Per point, ``inf_p |V ∩ D(v, rho_v / delta) \\ D(p, delta rho_v)|``.

    A point is ``(delta, s)``-supported exactly when its count is at least ``s``.
    """
    validate_support_args(delta, 2)
    z = np.asarray(points, complex)
    if len(z) < 2:
        raise ValueError("need at least two points")
    rho = isolation_radii(z)
    if not np.all(rho > 0):
        raise ValueError("point set has repeated points")
    xy = np.column_stack([z.real, z.imag])
    tree = cKDTree(xy)
    out = np.zeros(len(z), np.int64)
    for v in range(len(z)):
        R, r = rho[v] / delta, rho[v] * delta
        near = z[tree.query_ball_point(xy[v], R)]
        near = near[np.abs(near - z[v]) < R * (1 - 1e-9)]
        nxy = np.column_stack([near.real, near.imag])
        lo = max(int((np.abs(near - x) < r * (1 - 1e-9)).sum()) for x in near)
        hi = max(len(x) for x in cKDTree(nxy).query_ball_point(nxy, 2 * r))
        out[v] = len(near) - (lo if lo == hi else _max_cover(near, r))
    return out


def supported_curve(points, delta: float, s_grid) -> np.ndarray:
    """``supported_fraction`` at every ``s`` of the grid from one pass over the points."""
    for s in s_grid:
        validate_support_args(delta, s)
    counts = support_counts(points, delta)
    return np.array([float(np.mean(counts >= s)) for s in s_grid])


def min_remaining_grid(points, v: int, delta: float, n: int = 25, min_step: float = 1e-12,
                       max_seeds: int = 200) -> int:
    """Brute-force ``inf_p |V ∩ D(v, R) \\ D(p, r)|`` over grids of disc centers.

    A disc that covers some point ``q`` has its center within ``r`` of ``q``,
    so each point gets a square grid of spacing ``r / n`` over ``D(q, r)``.
    The best centers are re-gridded four times finer until the spacing drops
    below ``min_step * r``; among equal counts, centers whose nearest uncovered
    point is closest to the rim go first, which steers the search into thin
    feasible regions.
    """
    z = np.asarray(points, complex)
    rho = isolation_radii(z)[v]
    R, r = rho / delta, rho * delta
    near = z[np.abs(z - z[v]) < R * (1 - 1e-9)]
    if len(near) == 0:
        return 0

    rr = r * (1 - 1e-9)

    def score(centers):
        d = np.abs(near[None, :] - centers[:, None])
        covered = d < rr
        gap = np.where(covered, np.inf, d - rr).min(axis=1)
        return len(near) - covered.sum(axis=1), gap

    u = np.linspace(-r, r, 2 * n + 1)
    offsets = (u[:, None] + 1j * u[None, :]).ravel()
    offsets = offsets[np.abs(offsets) < r]
    centers = (near[:, None] + offsets[None, :]).ravel()
    rem, gap = score(centers)
    best = int(rem.min())
    step = u[1] - u[0]
    w = np.linspace(-1, 1, 9)
    while step > min_step * r:
        order = np.lexsort((gap, rem))
        seeds = centers[order[:max_seeds]]
        centers = (seeds[:, None, None] + step * (w[None, :, None] + 1j * w[None, None, :])).ravel()
        rem, gap = score(centers)
        best = min(best, int(rem.min()))
        step /= 4
    return best


def min_remaining(points, v: int, delta: float) -> int:
    """Exact ``inf_p |V ∩ D(v, R) \\ D(p, r)|`` by the candidate-center count."""
    z = np.asarray(points, complex)
    rho = isolation_radii(z)[v]
    near = _outer(z, v, rho / delta)
    return len(near) - _max_cover(near, rho * delta)


# -- dual-graph resistance -------------------------------------------------------------

def _dual_matrix(t: RootedTriangulation) -> sp.csr_matrix:
    h = np.flatnonzero(t.twin >= 0)
    a, b = h // 3, t.twin[h] // 3
    return sp.csr_matrix((np.ones(len(h)), (a, b)), shape=(t.n_faces, t.n_faces))


def dual_distances(t: RootedTriangulation, source: int | None = None) -> np.ndarray:
    if source is None:
        source = t.root_face
    adj = _dual_matrix(t)
    order, pred = breadth_first_order(adj, source, directed=False)
    dist = np.full(t.n_faces, -1, np.int64)
    dist[source] = 0
    for f in order[1:]:
        dist[f] = dist[pred[f]] + 1
    return dist


def effective_resistance(t: RootedTriangulation, r: int, source: int | None = None,
                         dist: np.ndarray | None = None) -> float:
    """Resistance from ``source`` to the shorted set of faces at dual distance ``r``.

    Every dual edge has unit conductance, parallel edges included.  Faces
    farther than ``r`` only hang off the shorted sink, so they are dropped.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    if source is None:
        source = t.root_face
    if dist is None:
        dist = dual_distances(t, source)
    sink = dist == r
    if not sink.any():
        raise ValueError(f"no face at dual distance {r}")
    keep = (dist >= 0) & (dist < r)
    idx = np.full(t.n_faces, -1, np.int64)
    idx[keep] = np.arange(keep.sum())
    ground = int(keep.sum())
    idx[sink] = ground
    h = np.flatnonzero(t.twin >= 0)
    a, b = idx[h // 3], idx[t.twin[h] // 3]
    ok = (a >= 0) & (b >= 0) & (a != b)
    a, b = a[ok], b[ok]
    n = ground + 1
    # each undirected edge appears once per direction
    w = sp.csr_matrix((np.full(len(a), 1.0), (a, b)), shape=(n, n))
    lap = sp.diags(np.asarray(w.sum(axis=1)).ravel()) - w
    lap = lap.tocsr()[:ground, :ground]
    rhs = np.zeros(ground)
    rhs[idx[source]] = 1.0
    x = spsolve(lap.tocsc(), rhs) if ground > 1 else rhs / lap.toarray()[0, 0]
    return float(np.atleast_1d(x)[idx[source]])


def resistance_curve(t: RootedTriangulation, rmax: int, source: int | None = None) -> list[tuple[int, float]]:
    dist = dual_distances(t, source)
    out = []
    for r in range(1, rmax + 1):
        if not (dist == r).any():
            break
        out.append((r, effective_resistance(t, r, source, dist)))
    return out


def series_parallel_resistance(edges: list[tuple[object, object]], a, b) -> float:
    """Resistance of a unit-resistor network between ``a`` and ``b`` by series-parallel reduction.

    Raises ``ValueError`` when the network does not reduce.
    """
    es: Counter = Counter()
    for u, v in edges:
        if u != v:
            es[frozenset((u, v))] += 1
    R = {e: Fraction(1, c) for e, c in es.items()}
    while True:
        if set(R) == {frozenset((a, b))}:
            return float(R[frozenset((a, b))])
        nbrs: dict = {}
        for e in R:
            for x in e:
                nbrs.setdefault(x, []).append(e)
        for x, inc in nbrs.items():
            if x in (a, b):
                continue
            if len(inc) == 1:
                del R[inc[0]]
                break
            if len(inc) == 2:
                e1, e2 = inc
                (y,) = e1 - {x}
                (z,) = e2 - {x}
                total = R.pop(e1) + R.pop(e2)
                if y == z:
                    break
                e = frozenset((y, z))
                R[e] = 1 / (1 / R[e] + 1 / total) if e in R else total
                break
        else:
            raise ValueError("network is not series-parallel reducible")


# -- one-endedness proxy ---------------------------------------------------------------

def one_ended_check(t: RootedTriangulation, r: int) -> bool:
    """Whether the faces outside ``B_r`` form exactly one piece reaching the boundary."""
    inside = np.zeros(t.n_faces, bool)
    inside[ball(t, r).faces] = True
    if inside.all():
        raise ValueError(f"ball of radius {r} is the whole map")
    out = np.flatnonzero(~inside)
    idx = np.full(t.n_faces, -1, np.int64)
    idx[out] = np.arange(len(out))
    h = np.flatnonzero(t.twin >= 0)
    a, b = idx[h // 3], idx[t.twin[h] // 3]
    ok = (a >= 0) & (b >= 0)
    adj = sp.csr_matrix((np.ones(ok.sum()), (a[ok], b[ok])), shape=(len(out), len(out)))
    _, labels = connected_components(adj, directed=False)
    bv = t.boundary_vertices
    if len(bv) == 0:
        return len(np.unique(labels)) == 1
    on_bd = np.zeros(t.n_vertices, bool)
    on_bd[bv] = True
    touching = on_bd[t.faces[out]].any(axis=1)
    return len(np.unique(labels[touching])) == 1


# -- regular balls ---------------------------------------------------------------------

def regular_ball(d: int, k: int) -> RootedTriangulation:
    """Radius-``k`` ball of the ``d``-regular triangulation, rooted at the center vertex.

    Each layer completes the flower of every current boundary vertex to ``d``
    faces; in a ``d``-regular triangulation with ``d >= 6`` those flowers meet
    only along the new boundary.
    """
    if d < 6:
        raise ValueError("degree must be at least 6")
    if k < 0:
        raise ValueError("radius must be nonnegative")
    if k == 0:
        return empty_triangulation(1)
    faces = [(0, 1 + i, 1 + (i + 1) % d) for i in range(d)]
    nv = d + 1
    for _ in range(k - 1):
        count = Counter(v for f in faces for v in f)
        directed = {(f[i], f[(i + 1) % 3]) for f in faces for i in range(3)}
        nxt = {u: v for u, v in directed if (v, u) not in directed}
        start = min(nxt)
        cycle = [start]
        while nxt[cycle[-1]] != start:
            cycle.append(nxt[cycle[-1]])
        m = len(cycle)
        extra = [d - count[v] for v in cycle]
        if min(extra) < 3:
            raise AssertionError("a boundary vertex already has more than d - 3 faces")
        # apex[i] sits on the outer side of edge cycle[i] -> cycle[i+1]
        apex = list(range(nv, nv + m))
        nv += m
        new = [(cycle[(i + 1) % m], v, apex[i]) for i, v in enumerate(cycle)]
        for i, v in enumerate(cycle):
            fan = [apex[i]] + list(range(nv, nv + extra[i] - 3)) + [apex[i - 1]]
            nv += extra[i] - 3
            new += [(x, v, y) for x, y in zip(fan[:-1], fan[1:])]
        faces += new
    return from_faces(faces, root_face=0, first_vertex=0)


def regular_layer_counts(d: int, k: int) -> list[int]:
    """Face counts of the balls ``B_1..B_k`` from the boundary-type recurrence.

    A boundary vertex with two faces spawns ``d - 5`` such vertices and one
    with three faces ``d - 6``; every old boundary vertex yields one new
    three-face vertex between its two outer triangles.
    """
    counts = [d]
    two, three = d, 0
    for _ in range(k - 1):
        counts.append(counts[-1] + two * (d - 3) + three * (d - 4))
        two, three = two * (d - 5) + three * (d - 6), two + three
    return counts[:k]
