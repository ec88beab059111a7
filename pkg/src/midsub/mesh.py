"""Half-edge polygon meshes and OBJ input/output.

A :class:`QuadMesh` stores vertex positions and counter-clockwise face loops.
The half-edge connectivity is derived on first use and cached; meshes are
treated as immutable once built.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import InvalidParameter, NonManifoldError

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QuadMesh:
    """Polygon mesh with counter-clockwise faces.

    Parameters
    ----------
    positions : ndarray, shape (n, d)
        Vertex positions, ``d`` is 2 for analysis meshes and 3 for geometry.
    faces : tuple of tuple of int
        Vertex loops, one per face.
    """

    positions: np.ndarray
    faces: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2:
            raise InvalidParameter("positions must be an (n, d) array")
        if not np.all(np.isfinite(pos)):
            raise InvalidParameter("positions must be finite")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "faces", tuple(tuple(int(v) for v in f) for f in self.faces))
        for f in self.faces:
            if len(f) < 3:
                raise NonManifoldError("dangling edge", [tuple(f)])
        # touch the half-edge structure so broken input fails early
        self._he

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def with_positions(self, positions) -> QuadMesh:
        new = QuadMesh.__new__(QuadMesh)
        object.__setattr__(new, "positions", np.asarray(positions, dtype=float))
        object.__setattr__(new, "faces", self.faces)
        new.__dict__["_he"] = self._he
        return new

    # -- half-edge structure -------------------------------------------------

    @cached_property
    def _he(self) -> _HalfEdges:
        return _HalfEdges.build(self.n_vertices, self.faces)

    @property
    def origin(self) -> np.ndarray:
        return self._he.origin

    @property
    def next(self) -> np.ndarray:
        return self._he.next

    @property
    def prev(self) -> np.ndarray:
        return self._he.prev

    @property
    def twin(self) -> np.ndarray:
        return self._he.twin

    @property
    def he_face(self) -> np.ndarray:
        return self._he.face

    def dest(self, h: int) -> int:
        return int(self._he.origin[self._he.next[h]])

    def face_halfedges(self, f: int) -> range:
        start = self._he.face_start[f]
        return range(start, start + len(self.faces[f]))

    def ccw(self, h: int) -> int:
        """Next outgoing half-edge counter-clockwise around ``origin[h]``, or -1."""
        t = self._he.twin[self._he.prev[h]]
        return int(t)

    def cw(self, h: int) -> int:
        t = self._he.twin[h]
        return -1 if t < 0 else int(self._he.next[t])

    def outgoing(self, v: int) -> list[int]:
        """Outgoing half-edges of ``v`` in counter-clockwise order.

        For boundary vertices the list starts at the most clockwise edge.
        """
        return self._he.fans[v]

    def is_interior_vertex(self, v: int) -> bool:
        return bool(self._he.interior[v])

    @property
    def interior_mask(self) -> np.ndarray:
        return self._he.interior

    def vertex_faces(self, v: int) -> list[int]:
        return [int(self._he.face[h]) for h in self.outgoing(v)]

    def neighbors(self, v: int) -> list[int]:
        fan = self.outgoing(v)
        out = [self.dest(h) for h in fan]
        if fan and not self._he.interior[v]:
            # the last boundary edge arrives at v and is not an outgoing half-edge
            out.append(int(self._he.origin[self._he.prev[fan[-1]]]))
        return out

    def vertex_valence(self, v: int) -> int:
        return len(self.neighbors(v))

    def face_valence(self, f: int) -> int:
        return len(self.faces[f])

    def is_interior_face(self, f: int) -> bool:
        return all(self._he.twin[h] >= 0 for h in self.face_halfedges(f))

    def boundary_edges(self) -> list[tuple[int, int]]:
        he = self._he
        idx = np.nonzero(he.twin < 0)[0]
        return [(int(he.origin[h]), int(he.origin[he.next[h]])) for h in idx]

    def extraordinary_vertices(self) -> list[int]:
        return [v for v in range(self.n_vertices)
                if self._he.interior[v] and len(self.outgoing(v)) != 4]

    def extraordinary_faces(self) -> list[int]:
        return [f for f in range(self.n_faces)
                if len(self.faces[f]) != 4 and self.is_interior_face(f)]

    @property
    def kind(self) -> str:
        """``primal``, ``dual``, ``regular`` or ``mixed``.

        Primal meshes have no extraordinary interior face, dual meshes no
        extraordinary interior vertex.
        """
        ev = bool(self.extraordinary_vertices())
        ef = bool(self.extraordinary_faces())
        if ev and ef:
            return "mixed"
        if ev:
            return "primal"
        if ef:
            return "dual"
        return "regular"

    def used_vertices(self) -> np.ndarray:
        used = np.zeros(self.n_vertices, dtype=bool)
        for f in self.faces:
            used[list(f)] = True
        return used


@dataclass
class _HalfEdges:
    origin: np.ndarray
    face: np.ndarray
    next: np.ndarray
    prev: np.ndarray
    twin: np.ndarray
    face_start: np.ndarray
    fans: list
    interior: np.ndarray

    @classmethod
    def build(cls, n: int, faces) -> _HalfEdges:
        sizes = np.fromiter((len(f) for f in faces), dtype=np.int64, count=len(faces))
        nh = int(sizes.sum())
        face_start = np.zeros(len(faces), dtype=np.int64)
        if len(faces):
            face_start[1:] = np.cumsum(sizes)[:-1]
        origin = np.fromiter((v for f in faces for v in f), dtype=np.int64, count=nh)
        if nh and (origin.min() < 0 or origin.max() >= n):
            raise InvalidParameter("face references a missing vertex")
        face = np.repeat(np.arange(len(faces), dtype=np.int64), sizes)
        local = np.arange(nh, dtype=np.int64) - face_start[face]
        nxt = face_start[face] + (local + 1) % sizes[face]
        prv = face_start[face] + (local - 1) % sizes[face]
        dest = origin[nxt]
        if np.any(dest == origin):
            raise NonManifoldError("degenerate edge", [])

        key = origin * n + dest
        order = np.argsort(key, kind="stable")
        sk = key[order]
        dup = np.nonzero(sk[1:] == sk[:-1])[0]
        if len(dup):
            bad = sorted({(int(origin[order[i]]), int(dest[order[i]])) for i in dup})
            raise NonManifoldError("edge shared by more than two faces or inconsistently oriented", bad)
        tkey = dest * n + origin
        pos = np.searchsorted(sk, tkey)
        pos = np.minimum(pos, nh - 1) if nh else pos
        twin = np.full(nh, -1, dtype=np.int64)
        if nh:
            hit = sk[pos] == tkey
            twin[hit] = order[pos[hit]]

        # outgoing fans, counter-clockwise
        first = [[] for _ in range(n)]
        for h in range(nh):
            first[origin[h]].append(h)
        fans = []
        interior = np.zeros(n, dtype=bool)
        bad_vertices = []
        for v in range(n):
            hs = first[v]
            if not hs:
                fans.append([])
                continue
            start = hs[0]
            # walk clockwise to the boundary, if any
            h = start
            closed = False
            for _ in range(len(hs) + 1):
                t = twin[h]
                if t < 0:
                    break
                h = int(nxt[t])
                if h == start:
                    closed = True
                    break
            fan = [h]
            for _ in range(len(hs)):
                t = twin[prv[fan[-1]]]
                if t < 0 or t == fan[0]:
                    break
                fan.append(int(t))
            if len(fan) != len(hs):
                bad_vertices.append(v)
            interior[v] = closed
            fans.append(fan)
        if bad_vertices:
            raise NonManifoldError("non-manifold vertex", [(v,) for v in bad_vertices])
        return cls(origin, face, nxt, prv, twin, face_start, fans, interior)


# -- face rings ---------------------------------------------------------------

def face_rings(mesh: QuadMesh, seed, count: int | None = None) -> list[set[int]]:
    """Concentric vertex rings around ``seed``.

    Ring ``k`` holds the vertices sharing a face with rings ``0..k-1`` that
    are not already in them; ring 0 is ``seed``. Stops when no vertex is
    added or after ``count`` rings.
    """
    vf = _vertex_faces(mesh)
    rings = [set(int(v) for v in seed)]
    seen = set(rings[0])
    while count is None or len(rings) <= count:
        new = set()
        for v in rings[-1]:
            for f in vf[v]:
                for w in mesh.faces[f]:
                    if w not in seen:
                        new.add(w)
        if not new:
            break
        seen |= new
        rings.append(new)
    return rings


def _vertex_faces(mesh: QuadMesh) -> list[list[int]]:
    cache = mesh.__dict__.get("_vf")
    if cache is None:
        cache = [[] for _ in range(mesh.n_vertices)]
        for fi, f in enumerate(mesh.faces):
            for v in f:
                cache[v].append(fi)
        mesh.__dict__["_vf"] = cache
    return cache


def vertex_faces_table(mesh: QuadMesh) -> list[list[int]]:
    return _vertex_faces(mesh)


# -- OBJ ----------------------------------------------------------------------

def read_obj(path) -> QuadMesh:
    """Read ``v`` and ``f`` records from an ASCII OBJ file.

    Texture and normal indices in face records are dropped. Other record
    types are skipped with a warning.
    """
    verts = []
    faces = []
    skipped = set()
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *rest = line.split()
        if tag == "v":
            if len(rest) < 2:
                raise InvalidParameter(f"line {lineno}: vertex needs at least 2 coordinates")
            verts.append([float(x) for x in rest[:3]])
        elif tag == "f":
            idx = []
            for tok in rest:
                i = int(tok.split("/")[0])
                idx.append(i - 1 if i > 0 else len(verts) + i)
            faces.append(tuple(idx))
        elif tag == "l":
            raise NonManifoldError("dangling edge", [tuple(int(t) - 1 for t in rest)])
        else:
            skipped.add(tag)
    for tag in sorted(skipped):
        log.warning("ignoring unsupported OBJ record %r", tag)
    dims = {len(v) for v in verts}
    width = max(dims) if dims else 3
    pos = np.array([v + [0.0] * (width - len(v)) for v in verts], dtype=float).reshape(-1, width)
    return QuadMesh(pos, tuple(faces))


def write_obj(mesh: QuadMesh, path) -> None:
    """Write ``mesh`` as OBJ; 2D positions are embedded at ``z = 0``."""
    pos = mesh.positions
    if pos.shape[1] == 2:
        pos = np.column_stack([pos, np.zeros(len(pos))])
    lines = [f"v {x:.9g} {y:.9g} {z:.9g}" for x, y, z in pos]
    lines += ["f " + " ".join(str(v + 1) for v in f) for f in mesh.faces]
    Path(path).write_text("\n".join(lines) + "\n")


def cube() -> QuadMesh:
    pos = np.array([[x, y, z] for z in (0, 1) for y in (0, 1) for x in (0, 1)], dtype=float)
    faces = [(0, 2, 3, 1), (4, 5, 7, 6), (0, 1, 5, 4), (2, 6, 7, 3), (0, 4, 6, 2), (1, 3, 7, 5)]
    return QuadMesh(pos, tuple(faces))


def square_grid(nx: int, ny: int | None = None, dim: int = 2) -> QuadMesh:
    """Regular ``nx`` by ``ny`` quad grid with integer vertex coordinates."""
    ny = nx if ny is None else ny
    pos = np.array([[i, j] for j in range(ny + 1) for i in range(nx + 1)], dtype=float)
    if dim == 3:
        pos = np.column_stack([pos, np.zeros(len(pos))])
    row = nx + 1
    faces = [(j * row + i, j * row + i + 1, (j + 1) * row + i + 1, (j + 1) * row + i)
             for j in range(ny) for i in range(nx)]
    return QuadMesh(pos, tuple(faces))


def diameter(positions: np.ndarray) -> float:
    if len(positions) == 0:
        return 0.0
    span = positions.max(axis=0) - positions.min(axis=0)
    return float(math.hypot(*span))
