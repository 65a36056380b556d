"""Discrete conformal flattening of the equilateral surface of a disc triangulation.

Each vertex carries a log scale factor ``u``.  Boundary factors are pinned to
zero and the interior factors minimize a convex energy whose gradient at an
interior vertex is ``2 pi - (angle sum)`` and whose Hessian is the cotangent
Laplacian.  Edge lengths live on an intrinsic triangulation that is kept
Delaunay by Ptolemy flips, so the metric stays realizable no matter how
strongly curved the input is.  Points of the original faces are carried
through the flips in projective coordinates that do not depend on the scale
factors, and the flat metric is finally developed into the plane.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve
from scipy.special import bernoulli, factorial

from .maps import RootedTriangulation, ball, face_boundary_distances

TWO_PI = 2 * math.pi


class FlatteningError(RuntimeError):
    pass


class LayoutError(RuntimeError):
    pass


# -- Lobachevsky function ----------------------------------------------------

_K = np.arange(1, 31)
_CLAUSEN_COEF = np.abs(bernoulli(60)[2 * _K]) / (2 * _K * factorial(2 * _K + 1))


def _clausen2(theta: np.ndarray) -> np.ndarray:
    """Clausen function Cl_2 on ``[0, 2 pi]``."""
    theta = np.asarray(theta, float)
    flip = theta > math.pi
    t = np.where(flip, TWO_PI - theta, theta)
    safe = np.where(t > 0, t, 1.0)
    out = np.where(t > 0, t - t * np.log(safe), 0.0)
    power = t ** 3
    t2 = t * t
    for c in _CLAUSEN_COEF:
        out = out + c * power
        power = power * t2
    return np.where(flip, -out, out)


def lobachevsky(x: np.ndarray) -> np.ndarray:
    """Milnor's Lobachevsky function for angles in ``[0, pi]``."""
    return 0.5 * _clausen2(2 * np.asarray(x, float))


# -- triangle geometry ----------------------------------------------------------

def corner_angles(l: np.ndarray) -> np.ndarray:
    """Corner angle at ``origin[h]`` for every half-edge, from half-edge lengths.

    ``l`` is in face-slot order; the corner at slot ``s`` faces slot ``s+1``.
    Degenerate or violated triangles get angles 0 and pi.
    """
    l = np.asarray(l, float).reshape(-1, 3)
    opp = np.roll(l, -1, axis=1)
    a2 = np.roll(l, 1, axis=1)
    s = 0.5 * (opp + l + a2)
    num = np.clip((s - l) * (s - a2), 0.0, None)
    den = np.clip(s * (s - opp), 0.0, None)
    return (2 * np.arctan2(np.sqrt(num), np.sqrt(den))).ravel()


def _opposite(h: np.ndarray) -> np.ndarray:
    """Half-edge whose origin is the corner opposite ``h``."""
    return h - h % 3 + (h + 2) % 3


def _next(h: int) -> int:
    return h - h % 3 + (h + 1) % 3


# -- intrinsic triangulation -----------------------------------------------------------

@dataclass
class IntrinsicTriangulation:
    """A Delta-complex triangulation with a log length per half-edge.

    Faces keep their ids through flips; a flip rewrites the two faces it touches.
    """
    origin: list[int]
    twin: list[int]
    loglen: list[float]
    n_vertices: int

    @classmethod
    def from_triangulation(cls, t: RootedTriangulation, side: float = 1.0) -> "IntrinsicTriangulation":
        return cls(t.origin.tolist(), t.twin.tolist(), [math.log(side)] * t.n_halfedges,
                   t.n_vertices)

    def copy(self) -> "IntrinsicTriangulation":
        return IntrinsicTriangulation(self.origin.copy(), self.twin.copy(), self.loglen.copy(),
                                      self.n_vertices)

    @property
    def n_faces(self) -> int:
        return len(self.origin) // 3

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        origin = np.array(self.origin, np.int64)
        h = np.arange(len(origin))
        dest = origin[h - h % 3 + (h + 1) % 3]
        return origin, dest, np.array(self.loglen)

    def lengths(self) -> np.ndarray:
        return np.exp(np.array(self.loglen))

    def rescale(self, du: np.ndarray) -> None:
        origin, dest, loglen = self.arrays()
        self.loglen = (loglen + 0.5 * (du[origin] + du[dest])).tolist()

    def cross_ratio(self, h: int) -> float:
        """``log(l_ik l_jl / (l_il l_jk))`` for the quadrilateral around the edge of ``h``."""
        g = self.twin[h]
        L = self.loglen
        return L[_next(_next(h))] + L[_next(_next(g))] - L[_next(g)] - L[_next(h)]

    def delaunay_defect(self, h: int) -> float:
        """Negative iff the edge of ``h`` violates the Delaunay condition."""
        g = self.twin[h]
        L = self.loglen
        a1 = _next(h)
        b1 = _next(g)
        e = L[h]

        def term(x, y):
            return math.exp(x - y) + math.exp(y - x) - math.exp(2 * e - x - y)

        return term(L[a1], L[_next(a1)]) + term(L[b1], L[_next(b1)])

    def flip(self, h: int) -> tuple[int, int]:
        """Flip the edge of ``h``; returns the two rewritten faces.

        With ``h: i -> j`` in face ``A = (i, j, k)`` and its twin in
        ``B = (j, i, l)``, afterwards ``A = (l, k, i)`` and ``B = (k, l, j)``.
        The new edge gets its length from Ptolemy's relation.
        """
        g = self.twin[h]
        A, B = h // 3, g // 3
        if A == B:
            raise ValueError("cannot flip an edge with the same face on both sides")
        o, tw, L = self.origin, self.twin, self.loglen
        a1 = _next(h)
        a2 = _next(a1)
        b1 = _next(g)
        b2 = _next(b1)
        k, l = o[a2], o[b2]
        new_len = float(np.logaddexp(L[a2] + L[b2], L[b1] + L[a1]) - L[h])
        outer = {a1: 3 * B + 2, a2: 3 * A + 1, b1: 3 * A + 2, b2: 3 * B + 1}
        data = {old: (o[old], tw[old], L[old]) for old in outer}
        for old, new in outer.items():
            org, t, ln = data[old]
            t = outer.get(t, t)
            o[new], L[new] = org, ln
            tw[new] = t
            if t >= 0:
                tw[t] = new
        o[3 * A], o[3 * B] = l, k
        tw[3 * A], tw[3 * B] = 3 * B, 3 * A
        L[3 * A] = L[3 * B] = new_len
        return A, B

    def make_delaunay(self, record: list[int] | None = None, tol: float = 1e-12) -> int:
        n = len(self.origin)
        stack = [h for h in range(n) if self.twin[h] > h]
        limit = 50 * n + 1000
        flips = 0
        while stack:
            h = stack.pop()
            g = self.twin[h]
            if g < 0 or g // 3 == h // 3:
                continue
            if self.delaunay_defect(h) < -tol:
                A, B = self.flip(h)
                if record is not None:
                    record.append(h)
                flips += 1
                if flips > limit:
                    raise FlatteningError("Delaunay flipping did not terminate")
                stack.extend((3 * A + 1, 3 * A + 2, 3 * B + 1, 3 * B + 2))
        return flips


# -- points carried through flips --------------------------------------------------------

def _cayley(z: complex) -> complex:
    return (z - 1j) / (z + 1j)


def klein_quad(x: float) -> tuple[complex, complex, complex, complex]:
    """Ideal quadrilateral ``i, j, k, l`` on the unit circle with log cross ratio ``x``."""
    r = math.exp(0.5 * x)
    # upper half plane i = inf, j = 0, k = 1/r, l = -r
    return 1 + 0j, -1 + 0j, _cayley(1 / r), _cayley(-r)


def _bary(p: complex, a: complex, b: complex, c: complex) -> np.ndarray:
    def cross(u, v):
        return (u.conjugate() * v).imag
    area = cross(b - a, c - a)
    return np.array([cross(b - p, c - p), cross(c - p, a - p), cross(a - p, b - p)]) / area


def _side_squares(tri) -> np.ndarray:
    a, b, c = tri
    return np.array([abs(b - c) ** 2, abs(c - a) ** 2, abs(a - b) ** 2])


def to_invariant(bary: np.ndarray, tri) -> np.ndarray:
    w = np.clip(bary, 0.0, None) / _side_squares(tri)
    return w / w.sum()


def from_invariant(inv: np.ndarray, tri) -> complex:
    w = inv * _side_squares(tri)
    w = w / w.sum()
    return complex(w[0] * tri[0] + w[1] * tri[1] + w[2] * tri[2])


@dataclass
class TrackedPoints:
    """Points held per face by coordinates that scale factors leave unchanged.

    In a face with sides ``(a, b, c)`` opposite its slots, Euclidean
    barycentric coordinates ``w`` correspond to ``w_s / (opposite side)^2``
    up to normalization.  Reading a triangle in its circumscribed disc as a
    Klein model, these are the coordinates of the underlying hyperbolic point.
    """
    face: np.ndarray     # (P,)
    coord: np.ndarray    # (P, 3) by face slot, summing to 1

    def _transfer(self, tri: IntrinsicTriangulation, h: int, members: dict[int, list[int]]) -> None:
        g = tri.twin[h]
        A, B = h // 3, g // 3
        p, q = h % 3, g % 3
        moving = members.pop(A, []) + members.pop(B, [])
        Pi, Pj, Pk, Pl = klein_quad(tri.cross_ratio(h))
        old_A, old_B = (Pi, Pj, Pk), (Pj, Pi, Pl)
        new_A, new_B = (Pl, Pk, Pi), (Pk, Pl, Pj)
        tri.flip(h)
        for pt in moving:
            if self.face[pt] == A:
                z = from_invariant(np.roll(self.coord[pt], -p), old_A)
            else:
                z = from_invariant(np.roll(self.coord[pt], -q), old_B)
            side = ((Pl - Pk).conjugate() * (z - Pk)).imag
            face, corners = (A, new_A) if side <= 0 else (B, new_B)
            self.face[pt] = face
            self.coord[pt] = to_invariant(_bary(z, *corners), corners)
            members.setdefault(face, []).append(pt)

    def replay(self, tri: IntrinsicTriangulation, flips) -> None:
        """Apply the flip sequence to ``tri`` in place, carrying the points along."""
        members: dict[int, list[int]] = {}
        for pt, f in enumerate(self.face.tolist()):
            members.setdefault(f, []).append(pt)
        for h in flips:
            self._transfer(tri, h, members)

    def positions(self, tri: IntrinsicTriangulation, pos: np.ndarray) -> np.ndarray:
        """Planar positions given per-slot corner positions ``pos`` of the developed faces."""
        l = tri.lengths().reshape(-1, 3)
        w = self.coord * np.roll(l, -1, axis=1)[self.face] ** 2
        w /= w.sum(axis=1, keepdims=True)
        return (w * pos[self.face]).sum(axis=1)


# -- energy, gradient, Hessian ---------------------------------------------------

def angle_sums(tri: IntrinsicTriangulation) -> np.ndarray:
    origin, _, loglen = tri.arrays()
    ang = corner_angles(np.exp(loglen))
    return np.bincount(origin, weights=ang, minlength=tri.n_vertices)


def energy(tri: IntrinsicTriangulation, u: np.ndarray, free: np.ndarray) -> float:
    """Flattening energy; its gradient in ``u`` at a free vertex is ``2 pi - angle sum``."""
    _, _, loglen = tri.arrays()
    lam = 2 * loglen
    ang = corner_angles(np.exp(loglen))
    h = np.arange(len(lam))
    per_face = (np.dot(ang[_opposite(h)], lam) + 2 * lobachevsky(ang).sum()
                - 0.5 * math.pi * lam.sum())
    return float(per_face + TWO_PI * u[free].sum())


def gradient(tri: IntrinsicTriangulation, free: np.ndarray) -> np.ndarray:
    g = TWO_PI - angle_sums(tri)
    g[~free] = 0.0
    return g


def cotan_laplacian(tri: IntrinsicTriangulation) -> sp.csr_matrix:
    i, j, loglen = tri.arrays()
    ang = corner_angles(np.exp(loglen))
    h = np.arange(len(i))
    w = 0.5 / np.tan(ang[_opposite(h)])
    n = tri.n_vertices
    rows = np.concatenate([i, j, i, j])
    cols = np.concatenate([i, j, j, i])
    vals = np.concatenate([w, w, -w, -w])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def triangle_inequality_holds(l: np.ndarray, rel: float = 1e-12) -> bool:
    l = np.asarray(l).reshape(-1, 3)
    s = l.sum(axis=1, keepdims=True)
    return bool(np.all(s - 2 * l > rel * s))


# -- doubling ------------------------------------------------------------------

@dataclass(frozen=True)
class DoubledDisc:
    """The disc glued to its mirror image along the boundary: a triangulated sphere.

    Faces ``0..F-1`` are the original ones; face ``F+f`` is the mirror of ``f``
    with slot ``s`` mirroring slot ``2-s``.  Boundary vertices are shared,
    interior vertex ``v`` gets the copy ``vertex_mirror[v]``.
    """
    origin: np.ndarray
    twin: np.ndarray
    vertex_mirror: np.ndarray
    n_vertices: int
    n_half_faces: int

    @property
    def interior(self) -> np.ndarray:
        """Original interior vertices."""
        v = np.arange(len(self.vertex_mirror))
        return v[self.vertex_mirror != v]

    def side(self, v: np.ndarray) -> np.ndarray:
        """+1 for original interior vertices, -1 for mirror copies, 0 on the boundary."""
        n = len(self.vertex_mirror)
        v = np.asarray(v)
        out = np.where(v >= n, -1, 1)
        fixed = np.zeros(n + 1, bool)
        fixed[:n] = self.vertex_mirror == np.arange(n)
        return np.where((v < n) & fixed[np.minimum(v, n)], 0, out)


def double_disc(t: RootedTriangulation) -> DoubledDisc:
    n, H = t.n_vertices, t.n_halfedges
    mirror = np.arange(n)
    inner = np.flatnonzero(interior_mask(t))
    mirror[inner] = n + np.arange(len(inner))
    sigma = np.concatenate([mirror, inner])  # involution on the doubled vertex set
    h = np.arange(H)
    new = H + h - h % 3 + (2 - h % 3)
    nxt = h - h % 3 + (h + 1) % 3
    origin = np.empty(2 * H, np.int64)
    origin[:H] = t.origin
    origin[new] = mirror[t.origin[nxt]]
    twin = np.empty(2 * H, np.int64)
    twin[:H] = t.twin
    inside = t.twin >= 0
    twin[new[inside]] = new[t.twin[inside]]
    twin[h[~inside]] = new[~inside]
    twin[new[~inside]] = h[~inside]
    return DoubledDisc(origin, twin, sigma[:n], n + len(inner), t.n_faces)


# -- solver ------------------------------------------------------------------------

@dataclass(frozen=True)
class ConformalFactors:
    triangulation: RootedTriangulation
    u: np.ndarray                                       # per vertex
    doubled: DoubledDisc = field(repr=False)
    metric: IntrinsicTriangulation = field(repr=False)  # final Delaunay triangulation of the double
    flips: tuple[int, ...] = field(repr=False)          # flip sequence on the double
    residual: float = 0.0                               # max |angle sum - 2 pi|, interior
    iterations: int = 0
    energies: tuple[float, ...] = field(default=(), repr=False)

    @property
    def n_flips(self) -> int:
        return len(self.flips)

    def angle_sums(self) -> np.ndarray:
        """Angle sums at the original vertices; boundary entries are doubled interior angles."""
        return angle_sums(self.metric)[:self.triangulation.n_vertices]

    def angle_residuals(self) -> np.ndarray:
        free = interior_mask(self.triangulation)
        return np.abs(self.angle_sums() - TWO_PI)[free]


def interior_mask(t: RootedTriangulation) -> np.ndarray:
    mask = np.ones(t.n_vertices, bool)
    mask[t.boundary_vertices] = False
    return mask


def flatten(t: RootedTriangulation, tol: float = 1e-11, max_iter: int = 200,
            damping: float = 0.5) -> ConformalFactors:
    """Flatten the interior cone points of the equilateral surface of ``t``.

    The solve runs on the doubled disc with mirror-symmetric scale factors,
    so boundary edges can be flipped like any other edge.
    """
    if t.kind != "disc":
        raise FlatteningError("flattening needs a disc triangulation with boundary")
    if len(t.boundary_vertices) < 3 and interior_mask(t).any():
        # Gauss-Bonnet: two straight sides cannot bound a flat disc
        raise FlatteningError("a disc bounded by two edges has no flat metric with straight sides")
    d = double_disc(t)
    inner = d.interior
    nd = d.n_vertices
    free = np.zeros(nd, bool)
    free[inner] = True
    free[d.vertex_mirror[inner]] = True
    # u on the double is P @ x with x indexed by the original interior vertices
    k = len(inner)
    P = sp.csr_matrix((np.ones(2 * k), (np.concatenate([inner, d.vertex_mirror[inner]]),
                                        np.tile(np.arange(k), 2))), shape=(nd, k))
    tri = IntrinsicTriangulation(d.origin.tolist(), d.twin.tolist(), [0.0] * len(d.origin), nd)
    u = np.zeros(nd)
    e = energy(tri, u, free)
    energies = [e]
    flips: list[int] = []
    if k == 0:
        return ConformalFactors(t, u[:t.n_vertices], d, tri, (), 0.0, 0, tuple(energies))
    g = P.T @ gradient(tri, free)
    res = float(np.abs(g).max()) / 2
    it = 0
    while res >= tol:
        if it >= max_iter:
            raise FlatteningError(f"no convergence after {it} iterations, residual {res:.3e}")
        it += 1
        H = (P.T @ cotan_laplacian(tri) @ P).tocsc()
        dx = -spsolve(H, g)
        du = P @ dx
        slope = float(np.dot(g, dx))
        step = 1.0
        while True:
            trial = tri.copy()
            trial.rescale(step * du)
            rec: list[int] = []
            trial.make_delaunay(rec)
            if triangle_inequality_holds(trial.lengths()):
                u_new = u + step * du
                e_new = energy(trial, u_new, free)
                g_new = P.T @ gradient(trial, free)
                res_new = float(np.abs(g_new).max()) / 2
                noise = 1e-12 * max(1.0, abs(e))
                if e_new <= e + 1e-4 * step * slope or (e_new <= e + noise and res_new < res):
                    break
            step *= damping
            if step < 1e-12:
                raise FlatteningError(f"line search stalled at residual {res:.3e}")
        tri, u, e, g, res = trial, u_new, e_new, g_new, res_new
        flips.extend(rec)
        energies.append(e_new)
    return ConformalFactors(t, u[:t.n_vertices], d, tri, tuple(flips), res, it, tuple(energies))


# -- development and layout -----------------------------------------------------------

@dataclass(frozen=True)
class ConformalLayout:
    triangulation: RootedTriangulation
    vertices: np.ndarray      # (V,) complex
    corners: np.ndarray       # (F, 3) complex, corner images per face
    interstices: np.ndarray   # (F, 3) complex, side midpoint images, slot s on side s
    centers: np.ndarray       # (F,) complex
    a: float = 1.0
    b: complex = 0j
    residual: float = 0.0
    defect: float = 0.0
    attaining_face: int = -1
    norm2_holds: bool | None = None

    def transformed(self, a: float, b: complex) -> "ConformalLayout":
        """Apply ``z -> a z + b``; the recorded normalization constants are composed."""
        return replace(self, vertices=a * self.vertices + b, corners=a * self.corners + b,
                       interstices=a * self.interstices + b, centers=a * self.centers + b,
                       a=a * self.a, b=a * self.b + b)


def _apex(p: complex, q: complex, lpq: float, lqz: float, lzp: float) -> complex:
    x = (lpq * lpq + lzp * lzp - lqz * lqz) / (2 * lpq)
    y = math.sqrt(max(lzp * lzp - x * x, 0.0))
    e = (q - p) / abs(q - p)
    return p + complex(x, y) * e


def develop_faces(tri: IntrinsicTriangulation, faces: np.ndarray,
                  crossable: np.ndarray) -> tuple[np.ndarray, float]:
    """Lay out ``faces`` breadth-first across half-edges marked ``crossable``.

    Returns per-slot positions (NaN outside ``faces``) and the largest
    mismatch between the two placements of a crossable edge.
    """
    F = tri.n_faces
    l = tri.lengths()
    twin = tri.twin
    wanted = np.zeros(F, bool)
    wanted[faces] = True
    pos = np.full((F, 3), np.nan, complex)
    placed = np.zeros(F, bool)
    for start in faces:
        if placed[start]:
            continue
        if placed.any():
            raise LayoutError("faces to develop are not connected")
        s0 = 3 * start
        pos[start] = (0j, complex(l[s0]), _apex(0j, complex(l[s0]), l[s0], l[s0 + 1], l[s0 + 2]))
        placed[start] = True
        queue = deque([start])
        while queue:
            f = queue.popleft()
            for s in range(3):
                h = 3 * f + s
                g = twin[h]
                if g < 0 or not crossable[h]:
                    continue
                nf, ns = divmod(g, 3)
                if placed[nf] or not wanted[nf]:
                    continue
                p, q = pos[f, (s + 1) % 3], pos[f, s]
                pos[nf, ns] = p
                pos[nf, (ns + 1) % 3] = q
                pos[nf, (ns + 2) % 3] = _apex(p, q, l[g], l[3 * nf + (ns + 1) % 3],
                                              l[3 * nf + (ns + 2) % 3])
                placed[nf] = True
                queue.append(nf)
    tw = np.array(twin)
    h = np.flatnonzero(crossable & (tw >= 0))
    h = h[wanted[h // 3] & wanted[tw[h] // 3]]
    g = tw[h]
    defect = float(max(
        np.abs(pos[h // 3, h % 3] - pos[g // 3, (g + 1) % 3]).max(initial=0),
        np.abs(pos[h // 3, (h + 1) % 3] - pos[g // 3, g % 3]).max(initial=0)))
    return pos, defect


def original_half(t: RootedTriangulation, factors: ConformalFactors,
                  line_tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Locate the original half inside the flattened double.

    Returns ``(side, on_line, crossable)``: per face +1 (original side), -1
    (mirror side) or 0 (cut by the mirror line); per half-edge whether its
    edge lies on the mirror line; and the half-edges across which the original
    half may be developed.

    No face of a Delaunay triangulation of the symmetric metric has an edge
    crossing the mirror line unless that edge joins an original interior
    vertex to a mirror copy, so faces are sorted by their vertices.  Faces
    with only boundary vertices take the side of a neighbor across an edge off
    the mirror line.  The mirror line is made of the straight boundary edges,
    which are the length-1 edges between consecutive boundary vertices.
    """
    tri = factors.metric
    d = factors.doubled
    origin = np.array(tri.origin)
    H = len(origin)
    F = H // 3
    hs = np.arange(H)
    twin = np.array(tri.twin)
    dest = origin[hs - hs % 3 + (hs + 1) % 3]
    vside = d.side(np.arange(d.n_vertices))
    pairs = {(int(a), int(b)) for a, b in zip(t.origin[t.boundary_halfedges],
                                             t.dest[t.boundary_halfedges])}
    pairs |= {(b, a) for a, b in pairs}
    loglen = np.array(tri.loglen)
    on_line = np.array([(int(a), int(b)) in pairs for a, b in zip(origin, dest)], bool)
    on_line &= np.abs(loglen) < line_tol
    vs = vside[origin].reshape(F, 3)
    has_o = (vs > 0).any(axis=1)
    has_m = (vs < 0).any(axis=1)
    side = np.where(has_o & ~has_m, 1, np.where(has_m & ~has_o, -1, 0))
    bd_only = ~has_o & ~has_m
    if not factors.flips:
        # unflipped double: originals first, mirrors after
        side = np.where(np.arange(F) < d.n_half_faces, 1, -1)
        bd_only[:] = False
    assigned = ~bd_only
    stack = list(np.flatnonzero(assigned & (side != 0)))
    while stack:
        f = stack.pop()
        for h in range(3 * f, 3 * f + 3):
            g = twin[h] // 3
            if not on_line[h] and bd_only[g] and not assigned[g]:
                side[g] = side[f]
                assigned[g] = True
                stack.append(g)
    if not assigned.all():
        raise LayoutError("could not place every face of the double on a side")
    keep = side >= 0
    both_mirror = (vside[origin] <= 0) & (vside[dest] <= 0) & ((vside[origin] < 0) | (vside[dest] < 0))
    crossable = keep[hs // 3] & keep[twin // 3] & ~on_line & ~both_mirror
    return side, on_line, crossable


def _move_off_mirror_side(tri: IntrinsicTriangulation, points: TrackedPoints,
                          side: np.ndarray, on_line: np.ndarray, tol: float = 1e-7) -> None:
    """Hand points lying on the mirror line over to the face on the original side."""
    l = tri.lengths().reshape(-1, 3)
    opp = np.roll(l, -1, axis=1) ** 2
    for pt in np.flatnonzero(side[points.face] < 0):
        f = int(points.face[pt])
        w = points.coord[pt] * opp[f]
        w = w / w.sum()
        s = int(np.argmin(w))
        h = 3 * f + (s + 1) % 3
        if w[s] > tol or not on_line[h]:
            raise LayoutError("a point of the original half landed on the mirror side")
        g = tri.twin[h]
        gf, gs = divmod(g, 3)
        e = np.zeros(3)
        # h runs from slot s+1 to slot s+2 of f; g runs the other way
        e[gs] = w[(s + 2) % 3]
        e[(gs + 1) % 3] = w[(s + 1) % 3]
        x = e / opp[gf]
        points.face[pt] = gf
        points.coord[pt] = x / x.sum()


def develop(t: RootedTriangulation, factors: ConformalFactors,
            max_defect: float = 1e-8) -> ConformalLayout:
    """Unnormalized layout: root vertex at 0, root edge midpoint on the positive real axis."""
    F = t.n_faces
    d = factors.doubled
    # tracked points: face centroids, then side midpoints by half-edge
    h = np.arange(t.n_halfedges)
    face = np.concatenate([np.arange(F), h // 3])
    coord = np.zeros((F + t.n_halfedges, 3))
    coord[:F] = 1.0 / 3
    coord[F + h, h % 3] = 0.5
    coord[F + h, (h + 1) % 3] = 0.5
    points = TrackedPoints(face, coord)
    replayed = IntrinsicTriangulation(d.origin.tolist(), d.twin.tolist(), [0.0] * len(d.origin),
                                      d.n_vertices)
    points.replay(replayed, factors.flips)
    metric = factors.metric
    if replayed.origin != metric.origin or replayed.twin != metric.twin:
        raise LayoutError("flip replay did not reproduce the solved triangulation")

    side, on_line, crossable = original_half(t, factors)
    _move_off_mirror_side(metric, points, side, on_line)
    faces = np.flatnonzero(side >= 0)
    pos, defect = develop_faces(metric, faces, crossable)
    scale = max(1.0, float(np.nanmax(np.abs(pos))))
    if defect > max_defect * scale:
        raise LayoutError(f"development mismatch {defect:.3e} across an edge")
    z = points.positions(metric, pos)
    vertices = np.full(t.n_vertices, np.nan, complex)
    morigin = np.array(metric.origin).reshape(-1, 3)[faces]
    mine = morigin < t.n_vertices
    vertices[morigin[mine]] = pos[faces][mine]
    mids = z[F:].reshape(F, 3)

    rv = vertices[t.root_vertex]
    direction = mids[t.root_face, t.root % 3] - rv
    rot = abs(direction) / direction

    def pose(w):
        return rot * (w - rv)

    return ConformalLayout(t, pose(vertices), pose(vertices[t.faces]), pose(mids), pose(z[:F]),
                           residual=factors.residual, defect=defect)


def point_triangle_distance(z: complex, tri: np.ndarray) -> np.ndarray:
    """Distance from ``z`` to each closed triangle in the ``(F, 3)`` array ``tri``."""
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]

    def cross(u, v):
        return (u.conjugate() * v).imag

    orient = np.sign(cross(b - a, c - a))
    inside = ((orient * cross(b - a, z - a) >= 0) & (orient * cross(c - b, z - b) >= 0)
              & (orient * cross(a - c, z - c) >= 0))

    def seg(p, q):
        d = q - p
        tt = np.clip(((z - p) * d.conjugate()).real / np.maximum(np.abs(d) ** 2, 1e-300), 0, 1)
        return np.abs(z - (p + tt * d))

    dist = np.minimum(np.minimum(seg(a, b), seg(b, c)), seg(c, a))
    return np.where(inside, 0.0, dist)


def normalize(lay: ConformalLayout) -> ConformalLayout:
    """Rescale so the root center sits at 0 and the nearest other interstice at distance 1."""
    t = lay.triangulation
    o = t.root_face
    shifted = lay.transformed(1.0, -lay.centers[o])
    if t.n_faces == 1:
        a = 1.0 / float(np.abs(shifted.interstices[0]).min())
        return replace(shifted.transformed(a, 0j), attaining_face=-1, norm2_holds=None)
    dist = point_triangle_distance(0j, shifted.interstices)
    dist[o] = np.inf
    # an overlapping sheet of a self-overlapping development may cover c_o
    dist[dist == 0] = np.inf
    m = float(dist.min())
    if not (m > 0 and np.isfinite(m)):
        raise LayoutError("degenerate layout: no interstice at positive distance from the root center")
    out = shifted.transformed(1.0 / m, 0j)
    f_star = int(np.argmin(dist))
    norm2 = None
    fd = face_boundary_distances(t)
    if fd is not None and fd[o] >= 2:
        norm2 = bool(np.isin(f_star, ball(t, 2).faces))
    return replace(out, attaining_face=f_star, norm2_holds=norm2)


def layout(t: RootedTriangulation, factors: ConformalFactors | None = None) -> ConformalLayout:
    if factors is None:
        factors = flatten(t)
    return normalize(develop(t, factors))


# -- bounded geometry measurements ----------------------------------------------

@dataclass(frozen=True)
class GeometryStats:
    faces: np.ndarray            # faces at boundary distance >= 2
    radius_ratio: np.ndarray     # outradius / inradius of each interstice about its center
    center_ratio: np.ndarray     # |c_f - c_f'| / diam I_f over neighbors f'

    @property
    def max_radius_ratio(self) -> float:
        return float(self.radius_ratio.max(initial=np.nan))

    @property
    def max_center_ratio(self) -> float:
        return float(self.center_ratio.max(initial=np.nan))

    @property
    def min_center_ratio(self) -> float:
        return float(self.center_ratio.min(initial=np.nan))

    def summary(self) -> dict:
        def q(x):
            return np.quantile(x, [0.0, 0.5, 0.9, 0.99, 1.0]).tolist() if len(x) else []
        return {"faces": int(len(self.faces)), "radius_ratio": q(self.radius_ratio),
                "center_ratio": q(self.center_ratio)}


def geometry_ratios(lay: ConformalLayout, min_boundary_distance: int = 2) -> GeometryStats:
    t = lay.triangulation
    fd = face_boundary_distances(t)
    faces = np.arange(t.n_faces) if fd is None else np.flatnonzero(fd >= min_boundary_distance)
    tri = lay.interstices[faces]
    c = lay.centers[faces]
    out_r = np.abs(tri - c[:, None]).max(axis=1)
    a, b = tri, np.roll(tri, -1, axis=1)
    d = b - a
    in_r = (np.abs(((c[:, None] - a) * d.conjugate()).imag) / np.abs(d)).min(axis=1)
    diam = np.abs(d).max(axis=1)
    ratios = []
    for k, f in enumerate(faces):
        for s in range(3):
            g = t.twin[3 * f + s]
            if g >= 0:
                ratios.append(abs(lay.centers[g // 3] - c[k]) / diam[k])
    return GeometryStats(faces, out_r / in_r, np.array(ratios))


def interstice_overlap(lay: ConformalLayout) -> float:
    """Total pairwise overlap area of interstice images divided by their total area."""
    from shapely import STRtree
    from shapely.geometry import Polygon

    polys = [Polygon([(z.real, z.imag) for z in tri]) for tri in lay.interstices]
    tree = STRtree(polys)
    total = sum(p.area for p in polys)
    overlap = 0.0
    for i, j in zip(*tree.query(polys, predicate="intersects")):
        if i < j:
            overlap += polys[i].intersection(polys[j]).area
    return overlap / total if total > 0 else 0.0
