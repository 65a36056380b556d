"""Plain-text formats for triangulations, layouts and point sets.

Triangulation::

    tri <nvertices> <nfaces> disc|sphere
    f <v1> <v2> <v3> [<e1> <e2> <e3>]
    root <faceindex> <first-vertex>

Edge labels follow a face only when the map has parallel edges; side ``i`` of a
face runs from its vertex ``i`` to vertex ``i+1``.  A layout file is a
triangulation block followed by the layout block; floats are written with
``repr`` so a round trip is exact.
"""

from __future__ import annotations

import csv
import io
from dataclasses import fields

import numpy as np

from .maps import (DisconnectedComplex, MalformedHeader, NonTriangularFace, RootedTriangulation,
                   TriangulationError, empty_triangulation, from_faces)
from .uniformize import ConformalLayout

__all__ = ["emit", "parse", "emit_layout", "parse_layout", "emit_points", "parse_points",
           "write_curve", "read_curve", "CURVE_COLUMNS"]

CURVE_COLUMNS = ("delta", "s", "fraction", "n", "seed")


def _lines(text: str):
    for k, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield k, line.split()


def _first_appearance(t: RootedTriangulation) -> np.ndarray:
    label = np.full(t.n_vertices, -1, np.int64)
    nxt = 0
    for v in t.origin.tolist():
        if label[v] < 0:
            label[v] = nxt
            nxt += 1
    return label


def _edge_labels(t: RootedTriangulation) -> np.ndarray | None:
    """Edge id per half-edge, or None when vertex pairs already decide the glueing."""
    h = np.arange(t.n_halfedges)
    u, v = t.origin, t.dest
    pairs = np.stack([np.minimum(u, v), np.maximum(u, v)], axis=1)
    edge = np.where(t.twin >= 0, np.minimum(h, t.twin), h)
    uniq_edges = np.unique(edge)
    if len(np.unique(pairs[uniq_edges], axis=0)) == len(uniq_edges):
        return None
    return np.searchsorted(uniq_edges, edge)


def emit(t: RootedTriangulation) -> str:
    """Text form of ``t``; vertices are renumbered in order of first appearance."""
    if t.is_empty:
        return f"tri {t.n_vertices} 0 disc\n"
    label = _first_appearance(t)
    faces = label[t.origin].reshape(-1, 3)
    edges = _edge_labels(t)
    out = [f"tri {t.n_vertices} {t.n_faces} {t.kind}"]
    for f, (a, b, c) in enumerate(faces.tolist()):
        line = f"f {a} {b} {c}"
        if edges is not None:
            e = edges[3 * f: 3 * f + 3]
            line += f" {e[0]} {e[1]} {e[2]}"
        out.append(line)
    out.append(f"root {t.root_face} {label[t.root_vertex]}")
    return "\n".join(out) + "\n"


def _parse_tri(rows: list[tuple[int, list[str]]]) -> tuple[RootedTriangulation, int]:
    """Parse a triangulation block at the start of ``rows``; return it and the rows consumed."""
    if not rows or rows[0][1][0] != "tri":
        raise MalformedHeader("expected header 'tri <nvertices> <nfaces> disc|sphere'")
    k, head = rows[0]
    if len(head) != 4 or head[3] not in ("disc", "sphere"):
        raise MalformedHeader(f"line {k}: malformed header {' '.join(head)!r}")
    try:
        nv, nf = int(head[1]), int(head[2])
    except ValueError as exc:
        raise MalformedHeader(f"line {k}: counts must be integers") from exc
    if nv < 0 or nf < 0:
        raise MalformedHeader(f"line {k}: negative count")
    faces, labels = [], []
    i = 1
    while i < len(rows) and rows[i][1][0] == "f":
        k, tok = rows[i]
        if len(tok) not in (4, 7):
            raise NonTriangularFace(f"line {k}: a face needs three vertices")
        try:
            nums = [int(x) for x in tok[1:]]
        except ValueError as exc:
            raise NonTriangularFace(f"line {k}: non-integer vertex") from exc
        faces.append(nums[:3])
        labels.append(nums[3:] or None)
        i += 1
    if len(faces) != nf:
        raise MalformedHeader(f"header announces {nf} faces, found {len(faces)}")
    if nf == 0:
        if i < len(rows) and rows[i][1][0] == "root":
            i += 1
        if head[3] != "disc":
            raise MalformedHeader("an empty triangulation is a disc")
        return empty_triangulation(nv), i
    if i >= len(rows) or rows[i][1][0] != "root" or len(rows[i][1]) != 3:
        raise MalformedHeader("missing line 'root <faceindex> <first-vertex>'")
    try:
        rf, rv = int(rows[i][1][1]), int(rows[i][1][2])
    except ValueError as exc:
        raise MalformedHeader("root line needs integers") from exc
    if any(lab is None for lab in labels) and any(lab is not None for lab in labels):
        raise MalformedHeader("edge labels must be given on every face or on none")
    edge_ids = labels if labels[0] is not None else None
    for f in faces:
        if any(v < 0 or v >= nv for v in f):
            raise MalformedHeader(f"vertex of face {f} outside 0..{nv - 1}")
    t = from_faces(faces, root_face=rf, first_vertex=rv, edge_ids=edge_ids)
    if t.n_vertices != nv:
        raise DisconnectedComplex(f"header announces {nv} vertices, faces use {t.n_vertices}")
    if t.kind != head[3]:
        raise MalformedHeader(f"header says {head[3]} but the faces form a {t.kind}")
    return t, i + 1


def parse(text: str) -> RootedTriangulation:
    rows = list(_lines(text))
    t, used = _parse_tri(rows)
    if used != len(rows):
        raise MalformedHeader(f"line {rows[used][0]}: unexpected record {rows[used][1][0]!r}")
    return t


# -- layouts --------------------------------------------------------------------

def _c(z: complex) -> str:
    return f"{float(z.real)!r} {float(z.imag)!r}"


def emit_layout(lay: ConformalLayout) -> str:
    """Triangulation block, then the normalization header and coordinates.

    Vertex and face ids refer to the triangulation block as written.
    """
    t = lay.triangulation
    label = _first_appearance(t)
    out = [emit(t).rstrip("\n"), f"layout {t.n_vertices} {t.n_faces}",
           f"a {float(lay.a)!r}", f"b {_c(complex(lay.b))}",
           f"residual {float(lay.residual)!r}", f"defect {float(lay.defect)!r}",
           f"attaining {int(lay.attaining_face)}",
           f"norm2 {'-' if lay.norm2_holds is None else int(lay.norm2_holds)}"]
    order = np.argsort(label)
    for v in order.tolist():
        out.append(f"v {label[v]} {_c(lay.vertices[v])}")
    for f in range(t.n_faces):
        out.append(f"c {f} {_c(lay.centers[f])}")
    for f in range(t.n_faces):
        out.append(f"i {f} " + " ".join(_c(z) for z in lay.interstices[f]))
    return "\n".join(out) + "\n"


def _complex(tok: list[str]) -> complex:
    return complex(float(tok[0]), float(tok[1]))


def parse_layout(text: str) -> ConformalLayout:
    rows = list(_lines(text))
    t, used = _parse_tri(rows)
    rows = rows[used:]
    if not rows or rows[0][1][0] != "layout":
        raise MalformedHeader("expected 'layout <nvertices> <nfaces>' after the triangulation")
    V, F = t.n_vertices, t.n_faces
    vertices = np.full(V, np.nan, complex)
    centers = np.full(F, np.nan, complex)
    mids = np.full((F, 3), np.nan, complex)
    head: dict = {}
    try:
        for k, tok in rows[1:]:
            key = tok[0]
            if key == "v":
                vertices[int(tok[1])] = _complex(tok[2:4])
            elif key == "c":
                centers[int(tok[1])] = _complex(tok[2:4])
            elif key == "i":
                mids[int(tok[1])] = [_complex(tok[2 + 2 * s: 4 + 2 * s]) for s in range(3)]
            elif key == "a" or key in ("residual", "defect"):
                head[key] = float(tok[1])
            elif key == "b":
                head[key] = _complex(tok[1:3])
            elif key == "attaining":
                head["attaining_face"] = int(tok[1])
            elif key == "norm2":
                head["norm2_holds"] = None if tok[1] == "-" else bool(int(tok[1]))
            else:
                raise MalformedHeader(f"line {k}: unknown record {key!r}")
    except (IndexError, ValueError) as exc:
        raise MalformedHeader(f"bad layout record: {exc}") from exc
    if np.isnan(centers).any():
        raise MalformedHeader("layout lacks a center for some face")
    known = {f.name for f in fields(ConformalLayout)}
    return ConformalLayout(t, vertices, vertices[t.faces] if F else np.zeros((0, 3), complex),
                           mids, centers, **{k: v for k, v in head.items() if k in known})


# -- point sets and curves ----------------------------------------------------------

def emit_points(points) -> str:
    pts = np.asarray(points, complex)
    return "".join(f"p {_c(z)}\n" for z in pts)


def parse_points(text: str) -> np.ndarray:
    out = []
    for k, tok in _lines(text):
        if tok[0] != "p" or len(tok) != 3:
            raise ValueError(f"line {k}: expected 'p <x> <y>'")
        out.append(_complex(tok[1:]))
    return np.array(out, complex)


def write_curve(rows, columns=CURVE_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({c: row[c] for c in columns})
    return buf.getvalue()


def read_curve(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


_ = TriangulationError  # re-exported error base for callers of parse
