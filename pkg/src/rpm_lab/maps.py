"""Rooted planar triangulations stored as half-edge combinatorial maps.

Face ``f`` owns the half-edges ``3f, 3f+1, 3f+2`` in counterclockwise order, so
``next`` is implicit.  ``origin[h]`` is the tail vertex of ``h`` and ``twin[h]``
the opposite half-edge, or ``-1`` when ``h`` lies on the boundary.  The root is
a single half-edge: its face is the root face, its origin the root vertex and
the half-edge itself the root edge.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra


class TriangulationError(ValueError):
    """Base class for structurally invalid triangulations."""


class MalformedHeader(TriangulationError):
    pass


class NonTriangularFace(TriangulationError):
    pass


class LoopEdge(TriangulationError):
    pass


class DisconnectedComplex(TriangulationError):
    pass


class AmbiguousGluing(TriangulationError):
    """Raised when a face list alone cannot decide how multi-edges are glued."""


def next_halfedge(h):
    return h - h % 3 + (h + 1) % 3


def prev_halfedge(h):
    return h - h % 3 + (h + 2) % 3


@dataclass(frozen=True, eq=False)
class RootedTriangulation:
    origin: np.ndarray
    twin: np.ndarray
    root: int
    n_vertices: int

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=np.int64)
        twin = np.asarray(self.twin, dtype=np.int64)
        origin.setflags(write=False)
        twin.setflags(write=False)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "twin", twin)

    # -- basic counts -------------------------------------------------------
    @property
    def n_halfedges(self) -> int:
        return len(self.origin)

    @property
    def n_faces(self) -> int:
        return len(self.origin) // 3

    @cached_property
    def n_edges(self) -> int:
        return int(np.count_nonzero(self.twin < 0) + np.count_nonzero(self.twin >= 0) // 2)

    @property
    def is_empty(self) -> bool:
        return self.n_faces == 0

    @property
    def kind(self) -> str:
        return "disc" if self.is_empty or np.any(self.twin < 0) else "sphere"

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    # -- root -------------------------------------------------------------
    @property
    def root_face(self) -> int:
        return self.root // 3

    @property
    def root_vertex(self) -> int:
        return int(self.origin[self.root])

    def root_triple(self) -> tuple[int, int, int]:
        """The oriented root face ``(x, y, z)`` with ``x`` the root vertex."""
        h = self.root
        return (int(self.origin[h]), int(self.origin[next_halfedge(h)]),
                int(self.origin[prev_halfedge(h)]))

    def with_root(self, h: int) -> "RootedTriangulation":
        if not 0 <= h < self.n_halfedges:
            raise IndexError(f"half-edge {h} out of range")
        return RootedTriangulation(self.origin, self.twin, int(h), self.n_vertices)

    def with_root_face(self, f: int, first_vertex: int | None = None) -> "RootedTriangulation":
        if not 0 <= f < self.n_faces:
            raise IndexError(f"face {f} out of range")
        if first_vertex is None:
            return self.with_root(3 * f)
        for h in range(3 * f, 3 * f + 3):
            if self.origin[h] == first_vertex:
                return self.with_root(h)
        raise ValueError(f"vertex {first_vertex} is not on face {f}")

    # -- derived arrays ---------------------------------------------------
    @cached_property
    def dest(self) -> np.ndarray:
        h = np.arange(self.n_halfedges)
        return self.origin[h - h % 3 + (h + 1) % 3]

    @property
    def faces(self) -> np.ndarray:
        """``(F, 3)`` vertex triples in counterclockwise order."""
        return self.origin.reshape(-1, 3)

    @cached_property
    def boundary_halfedges(self) -> np.ndarray:
        return np.flatnonzero(self.twin < 0)

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        b = self.boundary_halfedges
        return np.unique(np.concatenate([self.origin[b], self.dest[b]]))

    @cached_property
    def degrees(self) -> np.ndarray:
        """Number of edges at each vertex (multi-edges counted separately)."""
        deg = np.bincount(self.origin, minlength=self.n_vertices)
        b = self.boundary_halfedges
        return deg + np.bincount(self.dest[b], minlength=self.n_vertices)

    @cached_property
    def _vertex_face_index(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.argsort(self.origin, kind="stable")
        counts = np.bincount(self.origin, minlength=self.n_vertices)
        indptr = np.concatenate([[0], np.cumsum(counts)])
        return indptr, order // 3

    def faces_at(self, v: int) -> np.ndarray:
        indptr, faces = self._vertex_face_index
        return faces[indptr[v]:indptr[v + 1]]

    def faces_at_any(self, vs: np.ndarray) -> np.ndarray:
        """Sorted faces incident to at least one vertex of ``vs``."""
        indptr, faces = self._vertex_face_index
        vs = np.asarray(vs, np.int64)
        if len(vs) == 0:
            return np.zeros(0, np.int64)
        starts, stops = indptr[vs], indptr[vs + 1]
        lens = stops - starts
        idx = np.repeat(starts - np.concatenate([[0], np.cumsum(lens)[:-1]]), lens) + np.arange(lens.sum())
        return np.unique(faces[idx])

    @property
    def vertex_faces(self) -> list[np.ndarray]:
        indptr, faces = self._vertex_face_index
        return [faces[indptr[v]:indptr[v + 1]] for v in range(self.n_vertices)]

    @cached_property
    def _adjacency(self) -> csr_matrix:
        n = self.n_vertices
        data = np.ones(self.n_halfedges, dtype=np.int8)
        a = csr_matrix((data, (self.origin, self.dest)), shape=(n, n))
        return ((a + a.T) > 0).astype(np.int8)

    def is_interior_vertex(self, v: int) -> bool:
        return v not in set(self.boundary_vertices.tolist())

    def is_connected(self) -> bool:
        if self.is_empty:
            return True
        h = np.flatnonzero(self.twin >= 0)
        n = self.n_faces
        a = csr_matrix((np.ones(len(h)), (h // 3, self.twin[h] // 3)), shape=(n, n))
        return connected_components(a, directed=False)[0] == 1

    def vertex_boundary_distances(self) -> np.ndarray | None:
        """Graph distance of every vertex to the boundary, or ``None`` for a sphere."""
        bnd = self.boundary_vertices
        if len(bnd) == 0:
            return None
        dist = dijkstra(self._adjacency, directed=False, indices=bnd,
                        unweighted=True, min_only=True)
        return dist

    def vertex_distances(self, source: int) -> np.ndarray:
        return dijkstra(self._adjacency, directed=False, indices=source, unweighted=True)

    def check(self) -> None:
        """Raise :class:`TriangulationError` when a structural invariant fails."""
        n = self.n_halfedges
        if n % 3:
            raise NonTriangularFace("half-edge count is not a multiple of 3")
        if n == 0:
            return
        if np.any(self.origin == self.dest):
            raise LoopEdge("loop edge present")
        t = self.twin
        inner = np.flatnonzero(t >= 0)
        if np.any(t[t[inner]] != inner):
            raise TriangulationError("twin is not an involution")
        if np.any(self.origin[inner] != self.dest[t[inner]]):
            raise TriangulationError("twin endpoints do not match")
        if not self.is_connected():
            raise DisconnectedComplex("faces do not form a connected complex")
        if not 0 <= self.root < n:
            raise TriangulationError("root half-edge out of range")

    def __repr__(self) -> str:
        return (f"RootedTriangulation(V={self.n_vertices}, F={self.n_faces}, "
                f"kind={self.kind}, root={self.root_triple() if not self.is_empty else None})")


def empty_triangulation(n_vertices: int = 0) -> RootedTriangulation:
    return RootedTriangulation(np.zeros(0, np.int64), np.zeros(0, np.int64), -1, n_vertices)


def from_faces(faces, root_face: int = 0, first_vertex: int | None = None,
               edge_ids=None) -> RootedTriangulation:
    """Build a map from counterclockwise vertex triples.

    Half-edges ``u -> v`` and ``v -> u`` are glued when the pairing is unique.
    For maps with multi-edges pass ``edge_ids`` (one label per side, side ``i``
    running from vertex ``i`` to vertex ``i+1``); sides sharing a label are glued.
    Vertex labels are compacted to ``0..V-1`` in order of first appearance.
    """
    faces = [tuple(int(v) for v in f) for f in faces]
    for f in faces:
        if len(f) != 3:
            raise NonTriangularFace(f"face {f} does not have three vertices")
    labels: dict[int, int] = {}
    origin = []
    for f in faces:
        if len(set(f)) < 3:
            raise LoopEdge(f"face {f} repeats a vertex")
        for v in f:
            origin.append(labels.setdefault(v, len(labels)))
    n = len(origin)
    twin = [-1] * n
    if edge_ids is not None:
        owners: dict[int, list[int]] = {}
        for fi, ids in enumerate(edge_ids):
            if len(ids) != 3:
                raise NonTriangularFace(f"face {fi} needs three edge labels")
            for i, e in enumerate(ids):
                owners.setdefault(int(e), []).append(3 * fi + i)
        for e, hs in owners.items():
            if len(hs) > 2:
                raise TriangulationError(f"edge {e} is used by more than two sides")
            if len(hs) == 2:
                a, b = hs
                if origin[a] != origin[next_halfedge(b)] or origin[b] != origin[next_halfedge(a)]:
                    raise TriangulationError(f"edge {e} glues sides with mismatched endpoints")
                twin[a], twin[b] = b, a
    else:
        by_pair: dict[tuple[int, int], list[int]] = {}
        for h in range(n):
            by_pair.setdefault((origin[h], origin[next_halfedge(h)]), []).append(h)
        for (u, v), hs in by_pair.items():
            if u > v and (v, u) in by_pair:
                continue
            back = by_pair.get((v, u), [])
            if len(hs) > 1 or len(back) > 1:
                raise AmbiguousGluing(f"edge {{{u},{v}}} has several copies; edge labels required")
            if back:
                twin[hs[0]], twin[back[0]] = back[0], hs[0]
    if faces and not 0 <= root_face < len(faces):
        raise TriangulationError(f"root face {root_face} out of range")
    t = RootedTriangulation(np.array(origin, np.int64), np.array(twin, np.int64),
                            3 * root_face if faces else -1, len(labels))
    if faces and first_vertex is not None:
        if first_vertex not in labels:
            raise TriangulationError(f"root vertex {first_vertex} unknown")
        t = t.with_root_face(root_face, labels[first_vertex])
    t.check()
    return t


# -- balls -------------------------------------------------------------------

@dataclass(frozen=True)
class CombinatorialBall:
    radius: int
    parent: RootedTriangulation
    faces: np.ndarray      # sorted parent face ids
    vertices: np.ndarray   # sorted parent vertex ids

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def code(self) -> tuple:
        return canonical_code(self.parent, self.faces)

    def triangulation(self) -> RootedTriangulation:
        """The ball as a stand-alone rooted map; vertex ``i`` is ``self.vertices[i]``."""
        if self.n_faces == 0:
            return empty_triangulation(len(self.vertices))
        p = self.parent
        hs = (3 * self.faces[:, None] + np.arange(3)).ravel()
        new_index = np.full(p.n_halfedges, -1, np.int64)
        new_index[hs] = np.arange(len(hs))
        tw = p.twin[hs]
        twin = np.where(tw >= 0, new_index[np.maximum(tw, 0)], -1)
        origin = np.searchsorted(self.vertices, p.origin[hs])
        return RootedTriangulation(origin, twin, int(new_index[p.root]), len(self.vertices))


def ball(t: RootedTriangulation, r: int) -> CombinatorialBall:
    """``B_0`` is the root vertex; ``B_{r+1}`` adds every face touching a vertex of ``B_r``."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if t.is_empty:
        return CombinatorialBall(r, t, np.zeros(0, np.int64), np.zeros(0, np.int64))
    verts = np.array([t.root_vertex])
    faces = np.zeros(0, np.int64)
    for _ in range(r):
        faces = t.faces_at_any(verts)
        new_verts = np.unique(t.faces[faces])
        if len(new_verts) == len(verts):
            break
        verts = new_verts
    return CombinatorialBall(r, t, faces, verts)


def canonical_code(t: RootedTriangulation, faces=None) -> tuple:
    return _encode(t, faces)[0]


def discovery_order(t: RootedTriangulation, faces=None) -> np.ndarray:
    """Faces in the order :func:`canonical_code` numbers them.

    Two maps with equal codes are matched face by face through this order.
    """
    return np.array(_encode(t, faces)[1], np.int64)


def _encode(t: RootedTriangulation, faces=None) -> tuple[tuple, list[int]]:
    """Root-based breadth-first encoding of the submap spanned by ``faces``.

    Faces are numbered in discovery order starting from the root face, each
    read from the half-edge through which it was entered.  Per half-edge the
    code stores (twin face number, twin slot) or ``-1`` and the vertex number
    in first-seen order.  Two rooted maps get equal codes iff an orientation
    and root preserving isomorphism exists between them.
    """
    if t.is_empty:
        return (), []
    if faces is None:
        allowed = None
    else:
        allowed = np.zeros(t.n_faces, bool)
        allowed[np.asarray(faces, np.int64)] = True
        if not allowed[t.root_face]:
            return (), []
    origin, twin = t.origin, t.twin
    entry = {t.root // 3: t.root}
    number = {t.root // 3: 0}
    vlabel: dict[int, int] = {}
    code = []
    queue = deque([t.root // 3])
    while queue:
        f = queue.popleft()
        h = entry[f]
        for _ in range(3):
            code.append(vlabel.setdefault(int(origin[h]), len(vlabel)))
            g = int(twin[h])
            if g >= 0 and (allowed is None or allowed[g // 3]):
                gf = g // 3
                if gf not in entry:
                    entry[gf] = g
                    number[gf] = len(number)
                    queue.append(gf)
                code.append(number[gf])
                code.append((g - entry[gf]) % 3)
            else:
                code.append(-1)
                code.append(-1)
            h = next_halfedge(h)
    return tuple(code), list(number)


def rooted_isomorphic(t1: RootedTriangulation, t2: RootedTriangulation) -> bool:
    if t1.n_faces != t2.n_faces or t1.n_vertices != t2.n_vertices:
        return False
    return canonical_code(t1) == canonical_code(t2)


def combinatorial_distance(t1: RootedTriangulation, t2: RootedTriangulation) -> Fraction:
    """``1/(k+1)`` for the largest ``k`` with equivalent balls; 0 if all radii agree."""
    if t1.is_empty or t2.is_empty:
        return Fraction(0) if t1.is_empty and t2.is_empty else Fraction(1)
    prev = (-1, -1)
    r = 1
    while True:
        b1, b2 = ball(t1, r), ball(t2, r)
        if b1.n_faces != b2.n_faces or b1.code() != b2.code():
            return Fraction(1, r)
        if (b1.n_faces, b2.n_faces) == prev:
            return Fraction(0)
        prev = (b1.n_faces, b2.n_faces)
        r += 1


def boundary_distance(t: RootedTriangulation, v: int) -> int | None:
    dist = t.vertex_boundary_distances()
    if dist is None:
        return None
    d = dist[v]
    return int(d) if np.isfinite(d) else None


def face_boundary_distances(t: RootedTriangulation) -> np.ndarray | None:
    """Per face, the least boundary distance of its three vertices."""
    dist = t.vertex_boundary_distances()
    if dist is None:
        return None
    return dist[t.faces].min(axis=1)


def dual_graph(t: RootedTriangulation) -> nx.MultiGraph:
    """Faces as nodes, one edge per interior edge of ``t`` (so degree <= 3)."""
    g = nx.MultiGraph()
    g.add_nodes_from(range(t.n_faces))
    h = np.flatnonzero(t.twin > np.arange(t.n_halfedges))
    g.add_edges_from(zip((h // 3).tolist(), (t.twin[h] // 3).tolist()))
    return g


def relabel(t: RootedTriangulation, seed: int) -> RootedTriangulation:
    """Same rooted map with faces, slots and vertices permuted at random."""
    rng = np.random.default_rng(seed)
    F = t.n_faces
    fperm = rng.permutation(F)          # old face -> new face
    rot = rng.integers(0, 3, F)         # rotate face slots
    vperm = rng.permutation(t.n_vertices)
    old = np.arange(t.n_halfedges)
    new = 3 * fperm[old // 3] + (old % 3 + rot[old // 3]) % 3
    origin = np.empty_like(t.origin)
    twin = np.empty_like(t.twin)
    origin[new] = vperm[t.origin]
    twin[new] = np.where(t.twin >= 0, new[np.maximum(t.twin, 0)], -1)
    return RootedTriangulation(origin, twin, int(new[t.root]), t.n_vertices)
