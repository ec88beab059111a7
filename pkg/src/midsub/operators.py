"""Subdivision operators R, A, V, B and the operator-word algebra.

Words are written the way operators compose: the rightmost factor acts
first, so ``"AAR"`` refines with ``R`` and then averages twice.
"""

from __future__ import annotations

import re
from collections.abc import Iterable
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import (
    InvalidParameter,
    InvalidWord,
    NonManifoldError,
    ResourceError,
    WordSyntaxError,
)
from .mesh import QuadMesh

RESTRICTED = (Fraction(1, 4), Fraction(1, 2))


# -- B parameters -------------------------------------------------------------

@dataclass(frozen=True)
class BParams:
    """Per-valence weights ``alpha(m)``, ``beta(m)`` of a smoothing operator.

    ``table`` maps valences to ``(alpha, beta)``; ``default`` covers every
    other valence. The constant form ``B(a, b)`` stores only a default.
    """

    table: tuple[tuple[int, Fraction, Fraction], ...] = ()
    default: tuple[Fraction, Fraction] = RESTRICTED

    def __post_init__(self):
        for m, a, b in self.table:
            _check_ab(a, b, f"valence {m}")
        _check_ab(*self.default, "default")

    def weights(self, m: int) -> tuple[float, float]:
        for mm, a, b in self.table:
            if mm == m:
                return float(a), float(b)
        return float(self.default[0]), float(self.default[1])

    @property
    def restricted(self) -> bool:
        """True when ``alpha(4) = 1/4`` and ``beta(4) = 1/2``."""
        a, b = self.weights(4)
        return (a, b) == (0.25, 0.5)

    @property
    def constant(self) -> bool:
        return not self.table

    def text(self) -> str:
        if not self.table:
            return f"B({_num(self.default[0])},{_num(self.default[1])})"
        parts = [f"{m}:{_num(a)},{_num(b)}" for m, a, b in self.table]
        if self.default != RESTRICTED:
            parts.append(f"*:{_num(self.default[0])},{_num(self.default[1])}")
        return "B(" + ";".join(parts) + ")"


def _num(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _check_ab(a: Fraction, b: Fraction, where: str) -> None:
    if not (0 <= a < 1 and 0 <= b < 1):
        raise InvalidParameter(f"B weights must lie in [0, 1) ({where}: alpha={a}, beta={b})")
    if not (0 < a + b < 1):
        raise InvalidParameter(f"B weights need 0 < alpha + beta < 1 ({where}: alpha+beta={a + b})")


# -- words --------------------------------------------------------------------

@dataclass(frozen=True)
class Factor:
    symbol: str
    params: BParams | None = None

    def text(self) -> str:
        return self.params.text() if self.symbol == "B" else self.symbol


@dataclass(frozen=True)
class OperatorWord:
    """A product of subdivision factors, stored in written (left-to-right) order."""

    factors: tuple[Factor, ...]

    @property
    def text(self) -> str:
        return "".join(f.text() for f in self.factors)

    def __str__(self) -> str:
        return self.text

    def count(self, symbol: str) -> int:
        return sum(1 for f in self.factors if f.symbol == symbol)

    @property
    def a(self) -> int:
        return self.count("A")

    @property
    def v(self) -> int:
        return self.count("V")

    @property
    def r(self) -> int:
        return self.count("R")

    @property
    def has_b(self) -> bool:
        return any(f.symbol == "B" for f in self.factors)

    @property
    def symbols(self) -> str:
        return "".join(f.symbol for f in self.factors)

    def application_order(self) -> tuple[Factor, ...]:
        return tuple(reversed(self.factors))

    def power(self, k: int) -> OperatorWord:
        return OperatorWord(self.factors * k)

    def squared(self) -> OperatorWord:
        return self.power(2)

    def even(self) -> OperatorWord:
        """The word itself when ``v`` is even, else its square."""
        return self if self.v % 2 == 0 else self.squared()

    @property
    def sigma(self) -> Fraction:
        """Regular-grid scaling factor ``2**(-r - v/2)``; exact for even ``v``."""
        if self.v % 2:
            raise InvalidParameter("sigma of an odd-v word is irrational; square the word first")
        return Fraction(1, 2 ** (self.r + self.v // 2))

    @property
    def sigma_float(self) -> float:
        return 2.0 ** (-self.r - self.v / 2)

    def is_valid(self) -> bool:
        return classify_word(self).kind != "Invalid"

    def require_valid(self) -> OperatorWord:
        cls = classify_word(self)
        if cls.kind == "Invalid":
            raise InvalidWord(f"invalid word {self.text!r}: {cls.reason}")
        return self

    def output_kind(self) -> str:
        """Primal/dual type of ``U N`` for any input ringnet ``N``."""
        kind = "primal"
        for f in self.application_order():
            kind = _KIND_STEP[f.symbol](kind)
        return kind


_KIND_STEP = {
    "R": lambda k: "primal",
    "A": lambda k: "dual" if k == "primal" else "primal",
    "V": lambda k: "dual",
    "B": lambda k: k,
}

_SUPERSCRIPTS = str.maketrans("⁰¹²³⁴⁵⁶⁷⁸⁹", "0123456789")
_NUM = re.compile(r"\s*([+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?(?:/\d+)?)\s*")


def parse_word(text: str) -> OperatorWord:
    """Parse an operator word such as ``"A^2 R"``, ``"VAV"`` or ``"B(1/4,1/2) R"``.

    Parenthesised groups may carry an exponent, e.g. ``"(VRVR)^2"``.
    Validity (``a + v >= 1`` and ``v + r >= 1``) is not enforced here; see
    :func:`classify_word`.
    """
    if not text or not text.strip():
        raise WordSyntaxError("empty word", 0)
    src = text.translate(_SUPERSCRIPTS)
    # unicode superscripts become plain digits; mark them as exponents
    src = re.sub(r"(?<=[AVR)])(\d+)", r"^\1", src) if src != text else src
    parser = _Parser(src)
    factors = parser.word()
    parser.skip()
    if parser.pos != len(src):
        raise WordSyntaxError(f"unexpected {src[parser.pos]!r}", parser.pos)
    if not factors:
        raise WordSyntaxError("empty word", 0)
    return OperatorWord(tuple(factors))


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0

    def skip(self):
        while self.pos < len(self.src) and self.src[self.pos] in " \t*·":
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def word(self) -> list[Factor]:
        out = []
        while True:
            c = self.peek()
            if c in ("A", "V", "R"):
                self.pos += 1
                out += [Factor(c)] * self.exponent()
            elif c == "B":
                self.pos += 1
                f = Factor("B", self.bparams())
                out += [f] * self.exponent()
            elif c == "(":
                self.pos += 1
                inner = self.word()
                if self.peek() != ")":
                    raise WordSyntaxError("expected ')'", self.pos)
                self.pos += 1
                out += inner * self.exponent()
            elif c in ("", ")"):
                return out
            else:
                raise WordSyntaxError(f"unexpected {c!r}", self.pos)

    def exponent(self) -> int:
        if self.peek() != "^":
            return 1
        self.pos += 1
        self.skip()
        m = re.match(r"\d+", self.src[self.pos:])
        if not m:
            raise WordSyntaxError("expected exponent", self.pos)
        self.pos += m.end()
        k = int(m.group())
        if k < 1:
            raise WordSyntaxError("exponent must be positive", self.pos)
        return k

    def number(self) -> Fraction:
        m = _NUM.match(self.src, self.pos)
        if not m:
            raise WordSyntaxError("expected number", self.pos)
        self.pos = m.end()
        return Fraction(m.group(1)).limit_denominator(10**12)

    def expect(self, ch: str):
        if self.peek() != ch:
            raise WordSyntaxError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def bparams(self) -> BParams:
        self.expect("(")
        start = self.pos
        close = self.src.find(")", start)
        if close < 0:
            raise WordSyntaxError("unterminated B(", start)
        body = self.src[start:close]
        if ":" not in body:
            a = self.number()
            self.expect(",")
            b = self.number()
            self.expect(")")
            return BParams(default=(a, b))
        table = []
        default = RESTRICTED
        while True:
            self.skip()
            if self.src.startswith("*", self.pos):
                self.pos += 1
                key = None
            else:
                m = re.match(r"\d+", self.src[self.pos:])
                if not m:
                    raise WordSyntaxError("expected valence", self.pos)
                self.pos += m.end()
                key = int(m.group())
                if key < 3:
                    raise InvalidParameter(f"valence {key} in B table is below 3")
            self.expect(":")
            a = self.number()
            self.expect(",")
            b = self.number()
            if key is None:
                default = (a, b)
            else:
                table.append((key, a, b))
            if self.peek() == ";":
                self.pos += 1
                continue
            self.expect(")")
            break
        return BParams(tuple(table), default)


# -- classification -----------------------------------------------------------

@dataclass(frozen=True)
class WordClass:
    kind: str
    vav_factors: tuple[str, ...] | None = None
    general_midpoint: bool = False
    reason: str = ""
    restricted: bool | None = None

    @property
    def is_vav(self) -> bool:
        return self.vav_factors is not None

    @property
    def is_gcc(self) -> bool:
        return self.kind == "GeneralizedCC"


def classify_word(word: OperatorWord) -> WordClass:
    """Classify a word as GeneralizedCC, MidpointClassic, VAVScheme,
    GeneralMidpoint or Invalid.

    A word is a VAV-scheme when it factors into ``A``, ``R``, ``V^2`` and
    ``V A^l V``. Such a factorisation pairs the ``V`` factors consecutively,
    so checking that only ``A`` sits between paired ``V`` is exhaustive.
    """
    s = word.symbols
    if word.has_b:
        m = re.fullmatch(r"A?(B+)R", s)
        if not m:
            return WordClass("Invalid", reason="B factors need the shape B...BR or AB...BR")
        restricted = all(f.params.restricted for f in word.factors if f.symbol == "B")
        return WordClass("GeneralizedCC", restricted=restricted)
    a, v, r = word.a, word.v, word.r
    if a + v < 1:
        return WordClass("Invalid", reason="needs a + v >= 1")
    if v + r < 1:
        return WordClass("Invalid", reason="needs v + r >= 1")
    factors = vav_factorization(s)
    if re.fullmatch(r"A+R", s):
        return WordClass("MidpointClassic", factors, True)
    if factors is not None:
        return WordClass("VAVScheme", factors, True)
    return WordClass("GeneralMidpoint", None, True)


def vav_factorization(symbols: str) -> tuple[str, ...] | None:
    if symbols.count("V") % 2:
        return None
    out = []
    i = 0
    while i < len(symbols):
        c = symbols[i]
        if c in "AR":
            out.append(c)
            i += 1
            continue
        j = symbols.index("V", i + 1)
        middle = symbols[i + 1:j]
        if middle.strip("A"):
            return None
        out.append("VV" if not middle else "V" + middle + "V")
        i = j + 1
    return tuple(out)


# -- mesh operators -----------------------------------------------------------

@dataclass
class Step:
    """Result of one operator application.

    ``weights`` maps input vertex values to output vertex values and
    ``center`` is the image of the tracked element, ``("v", i)`` or ``("f", i)``.
    """

    mesh: QuadMesh
    weights: sp.csr_matrix
    center: tuple[str, int] | None = None


def _edge_ids(mesh: QuadMesh) -> tuple[np.ndarray, int]:
    twin = mesh.twin
    nh = len(twin)
    h = np.arange(nh)
    canon = (twin < 0) | (h < twin)
    ids = np.full(nh, -1, dtype=np.int64)
    ids[canon] = np.arange(int(canon.sum()))
    has_twin = ~canon
    ids[has_twin] = ids[twin[has_twin]]
    return ids, int(canon.sum())


def _coo(rows, cols, vals, shape) -> sp.csr_matrix:
    return sp.csr_matrix((np.asarray(vals, float), (np.asarray(rows), np.asarray(cols))), shape=shape)


def _build(W, faces, positions) -> tuple[QuadMesh, sp.csr_matrix]:
    """Output mesh ``W @ positions``; boundary pinches are split into copies.

    Near the boundary of a finite mesh two output faces can meet in a
    single vertex only. Such a vertex gets one copy per face fan.
    """
    faces = [tuple(f) for f in faces]
    try:
        return QuadMesh(W @ positions, tuple(faces)), W
    except NonManifoldError as exc:
        if not str(exc).startswith("non-manifold vertex"):
            raise
        pinched = [e[0] for e in exc.elements]
    incident: dict[int, list[int]] = {v: [] for v in pinched}
    for fi, f in enumerate(faces):
        for v in f:
            if v in incident:
                incident[v].append(fi)
    extra_rows = []
    n = W.shape[0]
    for v, fis in incident.items():
        # faces around v are adjacent when they share an edge at v
        parent = {fi: fi for fi in fis}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        spokes = {}
        for fi in fis:
            f = faces[fi]
            k = f.index(v)
            for w in (f[k - 1], f[(k + 1) % len(f)]):
                if w in spokes:
                    parent[find(fi)] = find(spokes[w])
                else:
                    spokes[w] = fi
        roots = sorted({find(fi) for fi in fis})
        for root in roots[1:]:
            new = n + len(extra_rows)
            extra_rows.append(v)
            for fi in fis:
                if find(fi) == root:
                    faces[fi] = tuple(new if u == v else u for u in faces[fi])
    W = sp.vstack([W, W[extra_rows]]).tocsr()
    return QuadMesh(W @ positions, tuple(faces)), W


def _face_rows(mesh: QuadMesh, offset: int):
    rows, cols, vals = [], [], []
    for f, vs in enumerate(mesh.faces):
        w = 1.0 / len(vs)
        for v in vs:
            rows.append(offset + f)
            cols.append(v)
            vals.append(w)
    return rows, cols, vals


def refine_step(mesh: QuadMesh, center=None) -> Step:
    """R: split every ``k``-gon at its centroid into ``k`` quads."""
    n = mesh.n_vertices
    eid, ne = _edge_ids(mesh)
    nf = mesh.n_faces
    origin, nxt = mesh.origin, mesh.next
    rows = list(range(n))
    cols = list(range(n))
    vals = [1.0] * n
    canon = np.nonzero(np.bincount(eid, minlength=ne) > 0)[0]
    first_h = np.full(ne, -1, dtype=np.int64)
    first_h[eid[::-1]] = np.arange(len(eid))[::-1]
    a = origin[first_h]
    b = origin[nxt[first_h]]
    rows += list(n + canon) * 2
    cols += list(a[canon]) + list(b[canon])
    vals += [0.5] * (2 * len(canon))
    fr, fc, fv = _face_rows(mesh, n + ne)
    rows += fr
    cols += fc
    vals += fv
    W = _coo(rows, cols, vals, (n + ne + nf, n))
    faces = []
    for f in range(nf):
        hs = list(mesh.face_halfedges(f))
        c = n + ne + f
        for i, h in enumerate(hs):
            faces.append((int(origin[h]), n + int(eid[h]), c, n + int(eid[hs[i - 1]])))
    out, W = _build(W, faces, mesh.positions)
    if center is not None:
        center = ("v", center[1]) if center[0] == "v" else ("v", n + ne + center[1])
    return Step(out, W, center)


def average_step(mesh: QuadMesh, center=None) -> Step:
    """A: connect the centroids of faces around every interior vertex."""
    nf = mesh.n_faces
    fr, fc, fv = _face_rows(mesh, 0)
    faces = []
    face_of_vertex = {}
    for v in range(mesh.n_vertices):
        if mesh.is_interior_vertex(v):
            face_of_vertex[v] = len(faces)
            faces.append(tuple(int(mesh.he_face[h]) for h in mesh.outgoing(v)))
    W = _coo(fr, fc, fv, (nf, mesh.n_vertices))
    W, faces, remap = _compact(W, faces)
    out, W = _build(W, faces, mesh.positions)
    if center is not None:
        if center[0] == "v":
            center = ("f", face_of_vertex[center[1]])
        else:
            center = ("v", int(remap[center[1]]))
    return Step(out, W, center)


def midedge_step(mesh: QuadMesh, center=None) -> Step:
    """V: connect the midpoints of adjacent edges."""
    eid, ne = _edge_ids(mesh)
    origin, nxt = mesh.origin, mesh.next
    first_h = np.full(ne, -1, dtype=np.int64)
    first_h[eid[::-1]] = np.arange(len(eid))[::-1]
    rows = np.concatenate([np.arange(ne), np.arange(ne)])
    cols = np.concatenate([origin[first_h], origin[nxt[first_h]]])
    W = _coo(rows, cols, np.full(2 * ne, 0.5), (ne, mesh.n_vertices))
    faces = [tuple(int(eid[h]) for h in mesh.face_halfedges(f)) for f in range(mesh.n_faces)]
    face_of_vertex = {}
    for v in range(mesh.n_vertices):
        if mesh.is_interior_vertex(v):
            face_of_vertex[v] = len(faces)
            faces.append(tuple(int(eid[h]) for h in mesh.outgoing(v)))
    out, W = _build(W, faces, mesh.positions)
    if center is not None:
        center = ("f", face_of_vertex[center[1]]) if center[0] == "v" else ("f", center[1])
    return Step(out, W, center)


def smooth_step(mesh: QuadMesh, params: BParams, center=None) -> Step:
    """B: move each interior vertex to its alpha/beta weighted neighbourhood average.

    A vertex ``v`` of valence ``m`` goes to ``alpha v + beta/m * (edge
    neighbours) + (1 - alpha - beta)/m * (far corner of each incident face)``;
    for a face with more than four vertices its far corner is the mean of
    the vertices not adjacent to ``v``.
    """
    if mesh.extraordinary_faces():
        raise InvalidParameter("B needs a primal mesh (no extraordinary faces)")
    rows, cols, vals = [], [], []
    keep = []
    for v in range(mesh.n_vertices):
        if not mesh.is_interior_vertex(v):
            continue
        fan = mesh.outgoing(v)
        m = len(fan)
        alpha, beta = params.weights(m)
        gamma = (1.0 - alpha - beta) / m
        r = len(keep)
        keep.append(v)
        rows.append(r)
        cols.append(v)
        vals.append(alpha)
        for h in fan:
            rows.append(r)
            cols.append(mesh.dest(h))
            vals.append(beta / m)
            f = int(mesh.he_face[h])
            vs = mesh.faces[f]
            if len(vs) < 4:
                raise InvalidParameter("B is undefined next to triangles")
            i = vs.index(v)
            far = [vs[(i + k) % len(vs)] for k in range(2, len(vs) - 1)]
            for w in far:
                rows.append(r)
                cols.append(w)
                vals.append(gamma / len(far))
    W = _coo(rows, cols, vals, (len(keep), mesh.n_vertices))
    new_id = np.full(mesh.n_vertices, -1, dtype=np.int64)
    new_id[keep] = np.arange(len(keep))
    faces = tuple(tuple(int(new_id[v]) for v in f) for f in mesh.faces if all(new_id[v] >= 0 for v in f))
    W, faces, remap = _compact(W, faces)
    out, W = _build(W, faces, mesh.positions)
    if center is not None:
        if center[0] != "v":
            raise InvalidParameter("B tracks vertices only")
        center = ("v", int(remap[new_id[center[1]]]))
    return Step(out, W, center)


def _compact(W, faces):
    """Drop output vertices that no face uses."""
    n = W.shape[0]
    used = np.zeros(n, dtype=bool)
    for f in faces:
        used[list(f)] = True
    remap = np.full(n, -1, dtype=np.int64)
    remap[used] = np.arange(int(used.sum()))
    faces = tuple(tuple(int(remap[v]) for v in f) for f in faces)
    return W[used], faces, remap


_STEPS = {"R": refine_step, "A": average_step, "V": midedge_step}


def apply_factor(mesh: QuadMesh, factor: Factor, center=None) -> Step:
    """One factor; ``center`` is the tracked ``("v" | "f", index)`` element."""
    if center is not None:
        n = mesh.n_vertices if center[0] == "v" else mesh.n_faces
        if not 0 <= center[1] < n:
            raise ResourceError("tracked center element fell off the mesh; "
                                "use a deeper mesh or fewer rounds")
    try:
        if factor.symbol in _STEPS:
            return _STEPS[factor.symbol](mesh, center)
        return smooth_step(mesh, factor.params, center)
    except KeyError:
        raise ResourceError("tracked center element is on the mesh boundary; "
                            "use a deeper mesh or fewer rounds") from None


def apply_R(mesh: QuadMesh) -> QuadMesh:
    return refine_step(mesh).mesh


def apply_A(mesh: QuadMesh) -> QuadMesh:
    return average_step(mesh).mesh


def apply_V(mesh: QuadMesh) -> QuadMesh:
    return midedge_step(mesh).mesh


def apply_B(mesh: QuadMesh, alpha=None, beta=None, params: BParams | None = None) -> QuadMesh:
    if params is None:
        a = Fraction(RESTRICTED[0] if alpha is None else alpha).limit_denominator(10**12)
        b = Fraction(RESTRICTED[1] if beta is None else beta).limit_denominator(10**12)
        params = BParams(default=(a, b))
    return smooth_step(mesh, params).mesh


@dataclass
class Subdivision:
    mesh: QuadMesh
    weights: sp.csr_matrix | None
    center: tuple[str, int] | None
    rounds: list[dict] = field(default_factory=list)


def subdivide(mesh: QuadMesh, word: OperatorWord | str, steps: int = 1, *,
              center=None, track_weights: bool = False) -> Subdivision:
    """Apply ``word`` ``steps`` times, rightmost factor first."""
    if isinstance(word, str):
        word = parse_word(word)
    word.require_valid()
    if steps < 1:
        raise InvalidParameter("steps must be >= 1")
    W = sp.identity(mesh.n_vertices, format="csr") if track_weights else None
    rounds = []
    parity = 0
    for k in range(steps):
        for f in word.application_order():
            st = apply_factor(mesh, f, center)
            mesh, center = st.mesh, st.center
            if W is not None:
                W = (st.weights @ W).tocsr()
            parity ^= f.symbol == "V"
        rounds.append({
            "round": k + 1,
            "vertices": mesh.n_vertices,
            "faces": mesh.n_faces,
            "kind": mesh.kind,
            "lattice": "diagonal" if parity else "axis",
        })
    return Subdivision(mesh, W, center, rounds)


def apply_word(mesh: QuadMesh, word: OperatorWord | str, steps: int = 1) -> QuadMesh:
    return subdivide(mesh, word, steps).mesh


def enumerate_words(max_len: int, alphabet: Iterable[str] = "AVR", valid_only: bool = True):
    """All words over ``alphabet`` up to ``max_len`` letters."""
    from itertools import product

    for n in range(1, max_len + 1):
        for letters in product(alphabet, repeat=n):
            w = OperatorWord(tuple(Factor(c) for c in letters))
            if not valid_only or w.is_valid():
                yield w
