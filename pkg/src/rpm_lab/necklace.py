"""Word-driven necklace growth in the upper half plane.

The frontier of the growing disc is kept as two stacks.  The blue stack holds
the frontier vertices left of the active edge (integers at the bottom, newer
vertices on top), the red stack those to its right.  Each stack entry stores
the frontier half-edge joining it to the entry below, or ``-1`` when that edge
is a not-yet-materialized piece of the real line.

Every face is stored starting with the half-edge it was glued along, i.e.
``b_j -> r_j``; that half-edge is the root edge when the face is the root.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace

import numpy as np

from .maps import RootedTriangulation

LETTERS = "BbRr"
PRIME = {"B": "b", "b": "B", "R": "r", "r": "R"}
INCREMENT = {"B": (1, 0), "b": (-1, 0), "R": (0, 1), "r": (0, -1)}


def check_word(word: str) -> str:
    bad = set(word) - set(LETTERS)
    if bad:
        raise ValueError(f"word contains letters outside B,b,R,r: {sorted(bad)}")
    return word


@dataclass
class NecklaceState:
    origin: list[int] = field(default_factory=list)
    twin: list[int] = field(default_factory=list)
    blue: list[tuple[int, int]] = field(default_factory=lambda: [(0, -1)])
    red: list[tuple[int, int]] = field(default_factory=lambda: [(1, -1)])
    active: int = -1
    realline: dict[int, int] = field(default_factory=dict)  # m -> half-edge on [m, m+1]
    integer_of: dict[int, int] = field(default_factory=lambda: {0: 0, 1: 1})
    n_vertices: int = 2
    lowest: int = 0
    highest: int = 1

    @property
    def j(self) -> int:
        return len(self.origin) // 3

    @property
    def b(self) -> int:
        return self.blue[-1][0]

    @property
    def r(self) -> int:
        return self.red[-1][0]

    def _new_vertex(self, integer: int | None = None) -> int:
        v = self.n_vertices
        self.n_vertices += 1
        if integer is not None:
            self.integer_of[v] = integer
        return v

    def grow(self, x: str) -> "NecklaceState":
        """Apply one letter in place."""
        b, r = self.b, self.r
        h = len(self.origin)
        twin = self.twin
        twin.extend((-1, -1, -1))
        if self.active >= 0:
            twin[h], twin[self.active] = self.active, h
        else:
            self.realline[0] = h
        if x == "B":
            c = self._new_vertex()
            self.blue.append((c, h + 2))
            self.active = h + 1
        elif x == "R":
            c = self._new_vertex()
            self.red.append((c, h + 1))
            self.active = h + 2
        elif x == "b":
            _, e = self.blue.pop()
            if e < 0:
                self.lowest -= 1
                c = self._new_vertex(self.lowest)
                self.blue.append((c, -1))
                self.realline[self.lowest] = h + 2
            else:
                c = self.blue[-1][0]
                twin[h + 2], twin[e] = e, h + 2
            self.active = h + 1
        elif x == "r":
            _, e = self.red.pop()
            if e < 0:
                self.realline[self.highest] = h + 1
                self.highest += 1
                c = self._new_vertex(self.highest)
                self.red.append((c, -1))
            else:
                c = self.red[-1][0]
                twin[h + 1], twin[e] = e, h + 1
            self.active = h + 2
        else:
            raise ValueError(f"unknown letter {x!r}")
        self.origin.extend((b, r, c))
        return self

    def boundary_chain(self) -> list[int]:
        """Boundary vertices of ``D_j`` in counterclockwise order, from the lowest integer."""
        if self.j == 0:
            return []
        by_int = {m: v for v, m in self.integer_of.items()}
        chain = [by_int[m] for m in range(self.lowest, self.highest + 1)]
        chain += [v for v, _ in self.red if v not in self.integer_of]
        chain += [v for v, _ in reversed(self.blue) if v not in self.integer_of]
        return chain

    def triangulation(self, root_face: int = 0) -> RootedTriangulation:
        """The disc ``D_j`` rooted at ``root_face`` (0-based creation index)."""
        if self.j == 0:
            return RootedTriangulation(np.zeros(0, np.int64), np.zeros(0, np.int64), -1, 0)
        if not 0 <= root_face < self.j:
            raise IndexError(f"root face {root_face} out of range for {self.j} faces")
        return RootedTriangulation(np.array(self.origin), np.array(self.twin),
                                   3 * root_face, self.n_vertices)


def prefix(state: NecklaceState, j: int) -> NecklaceState:
    """The disc ``D_j`` of an already grown state, for glueing only.

    Gluings are made when a face is added, so truncating the face arrays and
    dropping links to later faces recovers ``D_j``.  The frontier stacks are
    not rebuilt and the face arrays of the result are numpy arrays.
    """
    if not 0 <= j <= state.j:
        raise IndexError(f"prefix length {j} outside 0..{state.j}")
    h = 3 * j
    origin = np.asarray(state.origin)[:h]
    twin = np.asarray(state.twin)[:h]
    twin = np.where(twin < h, twin, -1)
    nv = max(int(origin.max()) + 1 if h else 2, 2)
    out = NecklaceState(origin=origin, twin=twin, blue=[], red=[])
    out.realline = {m: e for m, e in state.realline.items() if e < h}
    out.integer_of = {v: m for v, m in state.integer_of.items() if v < nv}
    out.n_vertices = nv
    return out


def frozen(state: NecklaceState) -> NecklaceState:
    """Copy of ``state`` with array face data, cheap to cut with :func:`prefix` many times."""
    return replace(state, origin=np.array(state.origin, np.int64),
                               twin=np.array(state.twin, np.int64))


def step(state: NecklaceState, x: str) -> NecklaceState:
    """Functional form of :meth:`NecklaceState.grow`; ``state`` is left untouched."""
    return copy.deepcopy(state).grow(x)


def grow(word: str) -> NecklaceState:
    state = NecklaceState()
    for x in check_word(word):
        state.grow(x)
    return state


def face_arrays(word: str) -> tuple[np.ndarray, np.ndarray, int]:
    """``origin``, ``twin`` and vertex count of ``T_+(word)``.

    Same rules as :meth:`NecklaceState.grow` with the bookkeeping the glueing
    needs left out; about three times faster on long words.
    """
    check_word(word)
    n = len(word)
    origin = [0] * (3 * n)
    twin = [-1] * (3 * n)
    blue_v, blue_e = [0], [-1]
    red_v, red_e = [1], [-1]
    active, nv = -1, 2
    for j, x in enumerate(word):
        h = 3 * j
        b, r = blue_v[-1], red_v[-1]
        if active >= 0:
            twin[h] = active
            twin[active] = h
        if x == "B":
            c = nv
            nv += 1
            blue_v.append(c)
            blue_e.append(h + 2)
            active = h + 1
        elif x == "R":
            c = nv
            nv += 1
            red_v.append(c)
            red_e.append(h + 1)
            active = h + 2
        elif x == "b":
            blue_v.pop()
            e = blue_e.pop()
            if e < 0:
                c = nv
                nv += 1
                blue_v.append(c)
                blue_e.append(-1)
            else:
                c = blue_v[-1]
                twin[h + 2] = e
                twin[e] = h + 2
            active = h + 1
        else:
            red_v.pop()
            e = red_e.pop()
            if e < 0:
                c = nv
                nv += 1
                red_v.append(c)
                red_e.append(-1)
            else:
                c = red_v[-1]
                twin[h + 1] = e
                twin[e] = h + 1
            active = h + 2
        origin[h] = b
        origin[h + 1] = r
        origin[h + 2] = c
    return np.array(origin, np.int64), np.array(twin, np.int64), nv


def build_plus(word: str) -> RootedTriangulation:
    return build_rooted(word, 1) if word else grow(word).triangulation(0)


def build_rooted(word: str, k: int) -> RootedTriangulation:
    """``T(X, k)``: the map of ``word`` rooted at the face created by letter ``k`` (1-based)."""
    if not 1 <= k <= len(word):
        raise IndexError(f"root index {k} outside 1..{len(word)}")
    origin, twin, nv = face_arrays(word)
    return RootedTriangulation(origin, twin, 3 * (k - 1), nv)


def _mirror(origin: np.ndarray, twin: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reverse orientation; returns new origin, new twin and the old->new half-edge map."""
    h = np.arange(len(origin))
    new = h - h % 3 + (2 - h % 3)
    nxt = h - h % 3 + (h + 1) % 3
    new_origin = np.empty_like(origin)
    new_origin[new] = origin[nxt]
    new_twin = np.empty_like(twin)
    new_twin[new] = np.where(twin >= 0, new[np.maximum(twin, 0)], -1)
    return new_origin, new_twin, new


def build_minus(word: str) -> RootedTriangulation:
    """``T_-``: the same growth reflected into the lower half plane."""
    s = grow(word)
    if s.j == 0:
        return s.triangulation()
    origin, twin, _ = _mirror(np.array(s.origin), np.array(s.twin))
    return RootedTriangulation(origin, twin, 0, s.n_vertices)


def glued_map(x: str, y: str) -> RootedTriangulation:
    """``T_+(X) ∪ T_-(Y)`` glued along the real line, rooted at the root of ``T_+(X)``."""
    if not x:
        raise ValueError("the upper word must be nonempty to carry the root")
    return glue_states(grow(x), grow(y))


def glue_states(up: NecklaceState, down: NecklaceState) -> RootedTriangulation:
    if up.j == 0:
        raise ValueError("the upper word must be nonempty to carry the root")
    origin = np.asarray(up.origin, np.int64)
    twin = np.array(up.twin, np.int64)
    nv = up.n_vertices
    if down.j:
        vertex_of_int = {m: v for v, m in up.integer_of.items()}
        d_origin, d_twin, new = _mirror(np.asarray(down.origin, np.int64),
                                        np.asarray(down.twin, np.int64))
        relabel = np.empty(down.n_vertices, np.int64)
        fresh = np.ones(down.n_vertices, bool)
        for v, m in down.integer_of.items():
            w = vertex_of_int.get(m)
            if w is not None:
                relabel[v] = w
                fresh[v] = False
        relabel[fresh] = nv + np.arange(fresh.sum())
        nv += int(fresh.sum())
        offset = len(origin)
        origin = np.concatenate([origin, relabel[d_origin]])
        twin = np.concatenate([twin, np.where(d_twin >= 0, d_twin + offset, -1)])
        for m, h_down in down.realline.items():
            h_up = up.realline.get(m)
            if h_up is not None:
                g = int(new[h_down]) + offset
                twin[h_up], twin[g] = g, h_up
    return RootedTriangulation(origin, twin, 0, nv)


def glue_word(x: str, y: str) -> str:
    """``Z = y_m' ... y_1' x_1 ... x_n``."""
    return "".join(PRIME[c] for c in reversed(check_word(y))) + check_word(x)


# -- lattice walk --------------------------------------------------------------

@dataclass(frozen=True)
class WalkTrace:
    points: np.ndarray  # (n+1, 2) integer positions S_0..S_n

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def endpoint(self) -> tuple[int, int]:
        return int(self.points[-1, 0]), int(self.points[-1, 1])

    def __len__(self) -> int:
        return len(self.points) - 1


_INC = np.zeros((128, 2), np.int64)
for _c, _v in INCREMENT.items():
    _INC[ord(_c)] = _v


def walk(word: str) -> WalkTrace:
    codes = np.frombuffer(check_word(word).encode(), dtype=np.uint8)
    pts = np.zeros((len(word) + 1, 2), np.int64)
    np.cumsum(_INC[codes], axis=0, out=pts[1:])
    return WalkTrace(pts)


def degree_of_origin_from_walk(word: str) -> int:
    """Degree of vertex 0 in ``T_+(word)`` read off the horizontal walk.

    Vertex 0 gets the initial real-line edge ``[0, 1]`` with the first face,
    then one edge for every step that starts or ends at 0 while the walk has not
    gone negative, and finally the edge ``[-1, 0]`` when the walk first steps
    from 0 to -1; after that it is sealed off from the frontier.
    """
    if not word:
        return 0
    xs = walk(word).x
    deg = 1
    for prev, cur in zip(xs[:-1].tolist(), xs[1:].tolist()):
        if prev == 0 or cur == 0:
            deg += 1
        if cur < 0:
            break
    return deg


def origin_visits(word: str) -> int:
    """``|{0 <= j <= n : X_j = 0, X_i >= 0 for i < j}|``."""
    xs = walk(word).x
    alive = np.minimum.accumulate(xs) >= 0
    return int(np.count_nonzero((xs == 0) & alive))


def origin_on_outer_boundary(word: str) -> bool:
    xs = walk(word).x
    return bool(np.all(xs[1:] >= 0))


def walk_minima(word: str) -> tuple[int, int]:
    """Number of negative integers reached on the blue and on the red side."""
    pts = walk(word).points
    return int(-pts[:, 0].min()), int(-pts[:, 1].min())


def boundary_size_bound(word: str) -> int:
    """``a + b + |X_n + a| + |Y_n + b|``; the integers 0 and 1 are not counted."""
    a, b = walk_minima(word)
    xn, yn = walk(word).endpoint
    return a + b + abs(xn + a) + abs(yn + b)


def boundary_size(t: RootedTriangulation) -> int:
    return len(t.boundary_vertices)
