"""Ringnets: quad meshes organised around one extraordinary vertex or face.

Vertices carry segment labels ``(i, j, l)``. In a primal net the centre
vertex is ``(0, 0, 0)`` and every other vertex has ``i >= 1, j >= 0``; in a
dual net the centre face has the vertices ``(1, 1, l)`` and all labels have
``i, j >= 1``. Labels on the seams between segments are stored in one
canonical form, see :func:`canonical_label`.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import InvalidParameter, StateError, StructuralError
from .mesh import QuadMesh, diameter, face_rings
from .operators import OperatorWord, apply_factor, parse_word

SYMMETRY_TOL = 1e-9


def canonical_label(i: int, j: int, l: int, kind: str, m: int) -> tuple[int, int, int]:
    """Canonical form of a vertex label.

    Primal: ``(0, j, l) == (j, 0, l+1)``. Dual: ``(0, j, l) == (j, 1, l+1)``
    and ``(i, 0, l) == (1, i, l-1)``.
    """
    if kind == "primal":
        if i == 0 and j == 0:
            return (0, 0, 0)
        if i == 0:
            return (j, 0, (l + 1) % m)
        return (i, j, l % m)
    if i == 0 and j == 0:
        raise StructuralError("dual nets have no vertex (0, 0)")
    if i == 0:
        return (j, 1, (l + 1) % m)
    if j == 0:
        return (1, i, (l - 1) % m)
    return (i, j, l % m)


def grid_position(i, j, l, m: int, f: int, kind: str) -> complex:
    """Grid-mesh vertex as a complex number."""
    phi = 2 * np.pi * f / m
    rot = np.exp(1j * l * phi)
    if kind == "primal":
        return rot * (i + j * np.exp(1j * phi))
    return rot * ((i - 0.5) + (j - 0.5) * np.exp(1j * phi))


@dataclass(frozen=True, eq=False)
class Ringnet:
    """A labelled ringnet.

    Attributes
    ----------
    mesh : QuadMesh
    m : int
        Valence of the centre element.
    kind : str
        ``"primal"`` (centre vertex) or ``"dual"`` (centre face).
    center : int
        Vertex id (primal) or face id (dual) of the centre.
    labels : ndarray, shape (n, 3)
        Canonical ``(i, j, l)`` per vertex; ``-1`` rows for unlabelled vertices.
    ref : ndarray, shape (n, 2)
        Image of the frequency-1 grid mesh under the same operators; used
        only to align segment 0 after subdivision.
    frequency : int or None
        Frequency when the positions are those of a grid mesh.
    half_turn : int
        Parity of mid-edge steps since the reference grid; an odd value
        means segments are rotated by half a segment angle.
    core : frozenset or None
        Core labels once computed for a word.
    """

    mesh: QuadMesh
    m: int
    kind: str
    center: int
    labels: np.ndarray
    ref: np.ndarray
    frequency: int | None = None
    half_turn: int = 0
    core: frozenset | None = field(default=None)

    @cached_property
    def index(self) -> dict[tuple[int, int, int], int]:
        out = {}
        for v, (i, j, l) in enumerate(self.labels.tolist()):
            if i >= 0:
                out[(i, j, l)] = v
        return out

    @property
    def positions(self) -> np.ndarray:
        return self.mesh.positions

    @property
    def phi(self) -> float:
        return 2 * np.pi * (self.frequency or 1) / self.m

    def canonical(self, i, j, l):
        return canonical_label(i, j, l, self.kind, self.m)

    def vertex(self, i: int, j: int, l: int = 0) -> int:
        return self.index[self.canonical(i, j, l)]

    def get(self, i: int, j: int, l: int = 0):
        """Complex position of ``p^l_ij`` or None when absent."""
        try:
            key = self.canonical(i, j, l)
        except StructuralError:
            return None
        v = self.index.get(key)
        if v is None:
            return None
        p = self.positions[v]
        return complex(p[0], p[1])

    def center_vertices(self) -> list[int]:
        if self.kind == "primal":
            return [self.center]
        return list(self.mesh.faces[self.center])

    def with_positions(self, positions) -> Ringnet:
        return replace(self, mesh=self.mesh.with_positions(positions), frequency=None)

    def with_core(self, core_labels) -> Ringnet:
        return replace(self, core=frozenset(core_labels))

    def ring_index(self, basis: str = "center") -> np.ndarray:
        out = np.full(self.mesh.n_vertices, -1, dtype=np.int64)
        for k, ring in enumerate(rings(self, basis)):
            out[list(ring)] = k
        return out

    def to_json(self) -> str:
        """Debug dump of the indexing: vertex id -> i, j, l, ring."""
        ring = self.ring_index()
        data = {
            "m": self.m,
            "kind": self.kind,
            "vertices": {
                str(v): {"i": int(i), "j": int(j), "l": int(l), "ring": int(ring[v])}
                for v, (i, j, l) in enumerate(self.labels.tolist())
            },
        }
        return json.dumps(data, indent=1, sort_keys=True)


# -- construction -------------------------------------------------------------

def build_grid_mesh(m: int, f: int = 1, depth: int = 2, kind: str = "primal") -> Ringnet:
    """Primal or dual grid mesh of valence ``m`` and frequency ``f``.

    ``depth`` counts rings around the centre: primal vertices satisfy
    ``max(i, j) <= depth``, dual vertices ``max(i, j) <= depth + 1``.
    """
    if int(m) != m or m < 3:
        raise InvalidParameter(f"valence must be an integer >= 3, got {m}")
    if int(f) != f or not 1 <= f <= m - 1:
        raise InvalidParameter(f"frequency must lie in 1..{m - 1}, got {f}")
    if int(depth) != depth or depth < 1:
        raise InvalidParameter(f"depth must be >= 1, got {depth}")
    if kind not in ("primal", "dual"):
        raise InvalidParameter(f"kind must be primal or dual, got {kind!r}")
    labels = []
    if kind == "primal":
        labels.append((0, 0, 0))
        for l in range(m):
            for i in range(1, depth + 1):
                for j in range(depth + 1):
                    labels.append((i, j, l))
        top = depth
    else:
        top = depth + 1
        for l in range(m):
            for i in range(1, top + 1):
                for j in range(1, top + 1):
                    labels.append((i, j, l))
    index = {lab: k for k, lab in enumerate(labels)}

    def vid(i, j, l):
        return index[canonical_label(i, j, l, kind, m)]

    faces = []
    if kind == "dual":
        faces.append(tuple(vid(1, 1, l) for l in range(m)))
    lo = 1 if kind == "primal" else 2
    for l in range(m):
        for i in range(lo, top + 1):
            for j in range(lo, top + 1):
                faces.append((vid(i - 1, j - 1, l), vid(i, j - 1, l), vid(i, j, l), vid(i - 1, j, l)))
        if kind == "dual":
            # faces straddling spoke l
            for i in range(2, top + 1):
                faces.append((vid(i - 1, 0, l), vid(i, 0, l), vid(i, 1, l), vid(i - 1, 1, l)))
    lab = np.array(labels, dtype=np.int64)
    z = np.array([grid_position(i, j, l, m, f, kind) for i, j, l in labels])
    pos = np.column_stack([z.real, z.imag])
    if kind == "primal":
        pos[0] = 0.0
    mesh = QuadMesh(pos, tuple(faces))
    if f == 1:
        ref = pos.copy()
    else:
        z1 = np.array([grid_position(i, j, l, m, 1, kind) for i, j, l in labels])
        ref = np.column_stack([z1.real, z1.imag])
        if kind == "primal":
            ref[0] = 0.0
    return Ringnet(mesh, m, kind, 0, lab, ref, frequency=f)


def symmetric_net(m: int, depth: int, kind: str, segment) -> Ringnet:
    """Rotation-symmetric (frequency 1) net from 0-th segment values.

    ``segment`` maps ``(i, j)`` to a complex number and is called for every
    canonical label of segment 0; other segments are rotated copies.
    """
    grid = build_grid_mesh(m, 1, depth, kind)
    rot = np.exp(2j * np.pi / m)
    pos = np.empty_like(grid.positions)
    for v, (i, j, l) in enumerate(grid.labels.tolist()):
        z = 0j if (kind == "primal" and i == 0 and j == 0) else complex(segment(i, j)) * rot ** l
        pos[v] = (z.real, z.imag)
    return grid.with_positions(pos)


# -- labelling ----------------------------------------------------------------

def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def label_ringnet(mesh: QuadMesh, center: int, kind: str, ref=None, half_turn: int = 0,
                  m: int | None = None) -> np.ndarray:
    """Assign ``(i, j, l)`` labels by walking faces outward from the centre.

    When ``ref`` (a frequency-1 reference embedding) is given, segment 0 is
    chosen so that vertex ``(1, 1, 0)`` sits at angle ``phi/2`` (shifted by
    a further ``phi/2`` for odd ``half_turn``).
    """
    if kind == "primal":
        starts = list(mesh.outgoing(center))
        if not mesh.is_interior_vertex(center):
            raise StructuralError(f"centre vertex {center} lies on the boundary")
        m = len(starts)
        bases = starts
        first_corner = [int(mesh.origin[mesh.next[mesh.next[h]]]) for h in bases]
        c_ref = None if ref is None else ref[center]
    else:
        loop = list(mesh.face_halfedges(center))
        m = len(loop)
        bases = []
        for h in loop:
            b = mesh.ccw(h)
            b = -1 if b < 0 else mesh.ccw(b)
            if b < 0:
                raise StructuralError("centre face touches the boundary")
            bases.append(b)
        first_corner = [int(mesh.origin[h]) for h in loop]
        c_ref = None if ref is None else ref[list(mesh.faces[center])].mean(axis=0)
    shift = 0
    if ref is not None:
        phi = 2 * np.pi / m
        target = phi / 2 + (half_turn % 2) * phi / 2
        ang = [np.arctan2(*(ref[v] - c_ref)[::-1]) for v in first_corner]
        shift = int(np.argmin([abs(_wrap(a - target)) for a in ang]))
    labels = np.full((mesh.n_vertices, 3), -1, dtype=np.int64)
    if kind == "primal":
        labels[center] = (0, 0, 0)
    lo = 1 if kind == "primal" else 2
    origin, nxt, prv, twin = mesh.origin, mesh.next, mesh.prev, mesh.twin
    for l in range(m):
        start = bases[(l + shift) % m]
        seen = {(lo, lo)}
        queue = deque([(lo, lo, start)])
        while queue:
            i, j, b = queue.popleft()
            f = mesh.he_face[b]
            if len(mesh.faces[f]) != 4:
                raise StructuralError(f"face {int(f)} of segment {l} is not a quad")
            h1 = int(nxt[b])
            h2 = int(nxt[h1])
            h3 = int(prv[b])
            corners = ((b, i - 1, j - 1), (h1, i, j - 1), (h2, i, j), (h3, i - 1, j))
            for h, a, c in corners:
                lab = canonical_label(a, c, l, kind, m)
                v = origin[h]
                if labels[v, 0] < 0:
                    labels[v] = lab
                elif tuple(labels[v]) != lab:
                    raise StructuralError(
                        f"vertex {int(v)} labelled both {tuple(labels[v])} and {lab}")
            moves = []
            t = twin[h1]
            if t >= 0:
                moves.append((i + 1, j, int(nxt[t])))
            t = twin[h2]
            if t >= 0:
                moves.append((i, j + 1, int(t)))
            t = twin[h3]
            if t >= 0 and i - 1 >= lo:
                moves.append((i - 1, j, int(prv[t])))
            t = twin[b]
            if t >= 0 and j - 1 >= lo:
                moves.append((i, j - 1, int(nxt[nxt[t]])))
            for ii, jj, bb in moves:
                if (ii, jj) not in seen:
                    seen.add((ii, jj))
                    queue.append((ii, jj, bb))
    return labels


def make_ringnet(mesh: QuadMesh, center: int | None = None, kind: str | None = None,
                 ref=None, half_turn: int = 0) -> Ringnet:
    """Wrap a mesh with a single extraordinary element as a labelled ringnet."""
    if kind is None:
        ev = mesh.extraordinary_vertices()
        ef = mesh.extraordinary_faces()
        if len(ev) + len(ef) != 1:
            raise StructuralError(
                f"a ringnet needs exactly one extraordinary element, found "
                f"{len(ev)} vertices and {len(ef)} faces")
        kind, center = ("primal", ev[0]) if ev else ("dual", ef[0])
    if center is None:
        raise InvalidParameter("centre element required when kind is given")
    labels = label_ringnet(mesh, center, kind, ref, half_turn)
    m = len(mesh.outgoing(center)) if kind == "primal" else len(mesh.faces[center])
    if ref is None:
        ref = np.asarray(mesh.positions[:, :2], dtype=float)
    return Ringnet(mesh, m, kind, center, labels, ref, half_turn=half_turn)


def subdivide_net(net: Ringnet, word: OperatorWord | str, steps: int = 1,
                  with_weights: bool = False):
    """Apply ``word`` to a ringnet and relabel the result.

    Returns the new :class:`Ringnet`, or ``(net, W)`` with the sparse
    vertex map ``W`` when ``with_weights`` is set.
    """
    import scipy.sparse as sp

    if isinstance(word, str):
        word = parse_word(word)
    mesh = net.mesh
    center = ("v", net.center) if net.kind == "primal" else ("f", net.center)
    ref = net.ref
    half = net.half_turn
    W = sp.identity(mesh.n_vertices, format="csr") if with_weights else None
    for _ in range(steps):
        for fac in word.application_order():
            st = apply_factor(mesh, fac, center)
            mesh, center = st.mesh, st.center
            ref = st.weights @ ref
            if W is not None:
                W = (st.weights @ W).tocsr()
            if fac.symbol == "V":
                half ^= 1
    kind = "primal" if center[0] == "v" else "dual"
    labels = label_ringnet(mesh, center[1], kind, ref, half)
    out = Ringnet(mesh, net.m, kind, center[1], labels, ref,
                  frequency=net.frequency, half_turn=half)
    return (out, W) if with_weights else out


# -- rings --------------------------------------------------------------------

def rings(net: Ringnet, basis: str = "center", connectivity: str = "face") -> list[set[int]]:
    """Vertex rings ``N_k`` around the centre or around the core.

    With ``connectivity="face"`` ring ``k`` holds the vertices sharing a face
    with the inner rings; ``"edge"`` uses edge neighbours instead.
    """
    if basis == "center":
        seed = net.center_vertices()
    elif basis == "core":
        if net.core is None:
            raise StateError("core labelling not computed for this ringnet")
        seed = [net.index[lab] for lab in net.core if lab in net.index]
    else:
        raise InvalidParameter(f"basis must be 'center' or 'core', got {basis!r}")
    if connectivity == "face":
        return face_rings(net.mesh, seed)
    if connectivity != "edge":
        raise InvalidParameter(f"connectivity must be 'face' or 'edge', got {connectivity!r}")
    out = [set(seed)]
    seen = set(seed)
    while True:
        new = {w for v in out[-1] for w in net.mesh.neighbors(v) if w not in seen}
        if not new:
            return out
        seen |= new
        out.append(new)


# -- symmetry -----------------------------------------------------------------

def _check_planar(net: Ringnet):
    if net.positions.shape[1] != 2:
        raise InvalidParameter("symmetry predicates need planar (2D) positions")


def _tol(net: Ringnet) -> float:
    return SYMMETRY_TOL * max(diameter(net.positions), 1e-300)


def is_rotation_symmetric(net: Ringnet, f: int = 1) -> bool:
    """True iff ``p^{l+1}_ij = Rot(2 pi f / m) p^l_ij`` for every labelled vertex."""
    _check_planar(net)
    tol = _tol(net)
    rot = np.exp(2j * np.pi * f / net.m)
    z = net.positions[:, 0] + 1j * net.positions[:, 1]
    for (i, j, l), v in net.index.items():
        if net.kind == "primal" and i == 0:
            if abs(z[v] * rot - z[v]) > tol:
                return False
            continue
        w = net.index.get(net.canonical(i, j, l + 1))
        if w is not None and abs(z[w] - rot * z[v]) > tol:
            return False
    return True


def is_reflection_symmetric(net: Ringnet) -> bool:
    """True iff ``p^{m-1-l}_ji`` equals the conjugate of ``p^l_ij`` everywhere.

    After an odd number of mid-edge steps the segments are turned by half a
    segment angle, and the mirror partner of segment ``l`` is ``m-2-l``.
    """
    _check_planar(net)
    tol = _tol(net)
    z = net.positions[:, 0] + 1j * net.positions[:, 1]
    m = net.m
    top = m - 1 - net.half_turn % 2
    for (i, j, l), v in net.index.items():
        try:
            key = net.canonical(j, i, top - l)
        except StructuralError:
            continue
        w = net.index.get(key)
        if w is not None and abs(z[w] - np.conj(z[v])) > tol:
            return False
    return True


def is_symmetric(net: Ringnet, f: int = 1) -> bool:
    return is_rotation_symmetric(net, f) and is_reflection_symmetric(net)
