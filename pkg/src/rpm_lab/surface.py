"""Intrinsic geometry of the surface glued from unit equilateral triangles.

Nothing here embeds the surface in the plane.  Every face is read in its own
isometric coordinates, with corners ``0, 1, e^{i pi/3}`` for its three
half-edge origins in counterclockwise order.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .maps import RootedTriangulation, next_halfedge, prev_halfedge

SQRT3 = math.sqrt(3.0)
UNIT_CORNERS = np.array([0.0, 1.0, complex(0.5, SQRT3 / 2)])
# area of an equilateral triangle of side 1/2
SMALL_AREA = SQRT3 / 16


@dataclass(frozen=True)
class Interstice:
    face: int
    corners: np.ndarray   # midpoints of the face sides, local coordinates
    center: complex

    @property
    def side(self) -> float:
        return float(abs(self.corners[1] - self.corners[0]))

    @property
    def area(self) -> float:
        a, b, c = self.corners
        return 0.5 * abs(((b - a).conjugate() * (c - a)).imag)


@dataclass(frozen=True)
class Flower:
    vertex: int
    faces: tuple[int, ...]       # counterclockwise around the vertex
    closed: bool                 # False for boundary vertices


@dataclass(frozen=True)
class HalfFlower:
    vertex: int
    spokes: tuple[int, ...]      # outgoing half-edges whose midpoints bound the polygon
    n_corners: int               # small triangles of side 1/2 it is made of
    closed: bool

    @property
    def area_units(self) -> Fraction:
        """Area in units of ``sqrt(3)/16``."""
        return Fraction(self.n_corners)


def rotate_ccw(t: RootedTriangulation, h: int) -> int:
    """Next outgoing half-edge counterclockwise around ``origin[h]``, or -1 at the boundary."""
    p = t.twin[prev_halfedge(h)]
    return int(p)


def rotate_cw(t: RootedTriangulation, h: int) -> int:
    g = t.twin[h]
    return -1 if g < 0 else int(next_halfedge(g))


class EquilateralSurface:
    def __init__(self, triangulation: RootedTriangulation):
        self.triangulation = triangulation

    @cached_property
    def _interior(self) -> np.ndarray:
        t = self.triangulation
        mask = np.ones(t.n_vertices, bool)
        mask[t.boundary_vertices] = False
        return mask

    def is_interior(self, v: int) -> bool:
        return bool(self._interior[v])

    def cone_angle(self, v: int) -> float:
        if not self.is_interior(v):
            raise ValueError(f"vertex {v} lies on the boundary")
        return self.triangulation.degrees[v] * math.pi / 3

    @property
    def total_area(self) -> float:
        return self.triangulation.n_faces * SQRT3 / 4

    def interstice(self, f: int) -> Interstice:
        if not 0 <= f < self.triangulation.n_faces:
            raise IndexError(f"face {f} out of range")
        c = UNIT_CORNERS
        mids = 0.5 * (c + np.roll(c, -1))
        return Interstice(f, mids, complex(c.mean()))

    def _fan(self, v: int) -> tuple[list[int], bool]:
        """Outgoing half-edges at ``v`` in counterclockwise order."""
        t = self.triangulation
        faces = t.faces_at(v)
        if len(faces) == 0:
            return [], False
        start = next(h for h in range(3 * faces[0], 3 * faces[0] + 3) if t.origin[h] == v)
        h = start
        while True:
            g = rotate_cw(t, h)
            if g < 0:
                first, closed = h, False
                break
            if g == start:
                first, closed = start, True
                break
            h = g
        fan, h = [first], rotate_ccw(t, first)
        while h >= 0 and h != first:
            fan.append(h)
            h = rotate_ccw(t, h)
        return fan, closed

    def flower(self, v: int) -> Flower:
        fan, closed = self._fan(v)
        return Flower(v, tuple(h // 3 for h in fan), closed)

    def half_flower(self, v: int) -> HalfFlower:
        fan, closed = self._fan(v)
        spokes = list(fan)
        if not closed and fan:
            # the last face contributes its second spoke, the incoming boundary edge
            spokes.append(prev_halfedge(fan[-1]))
        return HalfFlower(v, tuple(spokes), len(fan), closed)

    def area_partition(self) -> tuple[Fraction, Fraction, Fraction]:
        """Half-flower area, interstice area and total area, in units of ``sqrt(3)/16``."""
        t = self.triangulation
        corners = Fraction(t.n_halfedges)
        inter = Fraction(t.n_faces)
        return corners, inter, Fraction(4 * t.n_faces)

    def path_metric_upper_bound(self, u: int, w: int) -> float:
        """Upper bound on the intrinsic distance: shortest path in the midpoint subdivision."""
        t = self.triangulation
        # nodes: vertices, then one midpoint per edge
        edge_of = np.full(t.n_halfedges, -1, np.int64)
        n_edges = 0
        for h in range(t.n_halfedges):
            if edge_of[h] < 0:
                edge_of[h] = n_edges
                if t.twin[h] >= 0:
                    edge_of[t.twin[h]] = n_edges
                n_edges += 1
        nv = t.n_vertices
        adj: list[list[int]] = [[] for _ in range(nv + n_edges)]
        for h in range(t.n_halfedges):
            m = nv + int(edge_of[h])
            for a in (int(t.origin[h]), int(t.origin[next_halfedge(h)])):
                adj[a].append(m)
                adj[m].append(a)
            m2 = nv + int(edge_of[next_halfedge(h)])
            adj[m].append(m2)
            adj[m2].append(m)
        dist = {u: 0.0}
        heap = [(0.0, u)]
        while heap:
            d, x = heapq.heappop(heap)
            if x == w:
                return d
            if d > dist.get(x, math.inf):
                continue
            for y in adj[x]:
                nd = d + 0.5
                if nd < dist.get(y, math.inf):
                    dist[y] = nd
                    heapq.heappush(heap, (nd, y))
        return math.inf


def chart(n: int, rho: float, sector: int, t: float, tol: float = 1e-12) -> complex:
    """Coordinate of a point of the flower of a degree-``n`` vertex.

    The point sits in triangle ``sector`` (1-based), laid out as the unit
    sextant with vertices ``0, e^{2 pi i (j-1)/6}, e^{2 pi i j/6}``, at polar
    position ``rho e^{it}``.  The chart value is ``rho^(6/n) e^(6it/n)``.
    """
    if n < 1:
        raise ValueError("degree must be positive")
    if not 1 <= sector <= n:
        raise ValueError(f"sector {sector} outside 1..{n}")
    if rho == 0:
        return 0j
    lo, hi = 2 * math.pi * (sector - 1) / 6, 2 * math.pi * sector / 6
    if not lo - tol <= t <= hi + tol:
        raise ValueError(f"angle {t} outside sector {sector}")
    mid = (lo + hi) / 2
    if rho < 0 or rho * math.cos(t - mid) > SQRT3 / 2 + tol:
        raise ValueError("point lies outside the flower")
    return rho ** (6 / n) * complex(math.cos(6 * t / n), math.sin(6 * t / n))
