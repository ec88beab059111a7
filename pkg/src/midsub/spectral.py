"""Subdivision matrices on core nets and their spectra.

A word with an even number of mid-edge factors maps ringnets of one
orientation to ringnets of the same orientation, so one round acts as a
linear map on vertex labels ``(i, j, l)``. Everything here is assembled
from that label map on a sufficiently deep grid mesh.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cache, lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import (
    InvalidParameter,
    InvalidWord,
    ResourceError,
    StateError,
    StructuralError,
)
from .kernels import power_iteration, reachable_positive_column
from .mesh import face_rings, vertex_faces_table
from .operators import OperatorWord, classify_word, parse_word
from .ringnet import Ringnet, build_grid_mesh, canonical_label, subdivide_net

log = logging.getLogger(__name__)

EIG_TOL = 1e-10
MAX_ITER = 100_000
RANK_TOL = 1e-9
MAX_DEPTH = 48

_CENTER_MAP = {
    "R": {"v": "v", "f": "v"},
    "A": {"v": "f", "f": "v"},
    "V": {"v": "f", "f": "f"},
    "B": {"v": "v", "f": "f"},
}


def _word(word) -> OperatorWord:
    return parse_word(word) if isinstance(word, str) else word


def natural_kind(word: OperatorWord | str) -> str:
    """Orientation of the ringnets a word produces after its first round."""
    word = _word(word)
    c = "v"
    for _ in range(2):
        for f in word.application_order():
            c = _CENTER_MAP[f.symbol][c]
    return "primal" if c == "v" else "dual"


def _even_word(word: OperatorWord) -> OperatorWord:
    word.require_valid() if not word.has_b else None
    if classify_word(word).kind == "Invalid":
        raise InvalidWord(f"invalid word {word.text!r}: {classify_word(word).reason}")
    return word.even()


# -- label operator -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LabelOperator:
    """One round of a word as a sparse map on the labels of a grid mesh.

    ``T[a, b]`` is the weight of input vertex ``b`` in output vertex ``a``,
    both indexed by the vertices of ``net``. Rows of labels absent from the
    output (too close to the boundary) are empty and flagged in ``has_row``.
    """

    word: OperatorWord
    m: int
    kind: str
    depth: int
    net: Ringnet
    T: sp.csr_matrix
    has_row: np.ndarray

    def support(self, rows) -> set[int]:
        rows = list(rows)
        if not self.has_row[rows].all():
            raise ResourceError("grid mesh too small for the requested rows")
        sub = self.T[rows]
        return set(np.unique(sub.indices).tolist())

    def complete(self, verts) -> bool:
        """True when every face around ``verts`` exists in the grid mesh."""
        lab = self.net.labels[list(verts)]
        top = self.depth if self.kind == "primal" else self.depth + 1
        return bool((np.maximum(lab[:, 0], lab[:, 1]) < top).all())


@lru_cache(maxsize=64)
def label_operator(word_text: str, m: int, kind: str, depth: int) -> LabelOperator:
    word = parse_word(word_text)
    net = build_grid_mesh(m, 1, depth, kind)
    out, W = subdivide_net(net, word, 1, with_weights=True)
    if out.kind != kind:
        raise StructuralError(f"word {word.text!r} changes the orientation; square it first")
    W = W.tocsr()
    index = net.index
    n = net.mesh.n_vertices
    rows, cols, vals = [], [], []
    has_row = np.zeros(n, dtype=bool)
    for v, (i, j, l) in enumerate(out.labels.tolist()):
        if i < 0:
            continue
        a = index.get((i, j, l))
        if a is None:
            continue
        has_row[a] = True
        lo, hi = W.indptr[v], W.indptr[v + 1]
        for b, w in zip(W.indices[lo:hi], W.data[lo:hi]):
            if w != 0.0:
                rows.append(a)
                cols.append(int(b))
                vals.append(float(w))
    T = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    T.sum_duplicates()
    return LabelOperator(word, m, kind, depth, net, T, has_row)


# -- core ---------------------------------------------------------------------

@dataclass(frozen=True)
class CoreLabeling:
    """Core of a ringnet with respect to a word, and the rings around it.

    ``rings[0]`` is the core; ``rings[k]`` is ring ``c.k``. ``corners``
    are the convex corners of ring ``c.1`` and ``others`` the rest of it.
    """

    word: str
    m: int
    kind: str
    core: tuple
    rings: tuple
    corners: tuple
    others: tuple
    horizon: int

    @property
    def ring_count(self) -> int:
        return len(self.rings) - 1


def _sort_labels(labels) -> tuple:
    return tuple(sorted((tuple(int(x) for x in lab) for lab in labels), key=lambda t: (t[2], t[0], t[1])))


def _center_rows(op: LabelOperator) -> list[int]:
    return op.net.center_vertices()


def _core_indices(op: LabelOperator, max_rounds: int = 200) -> tuple[set[int], int]:
    """Union of the supports of ``N_0`` after ``k = 1, 2, ...`` rounds.

    The support after ``k`` rounds depends only on the support after
    ``k - 1``, so the sequence is eventually periodic and the union is
    complete once a set repeats.
    """
    current = frozenset(_center_rows(op))
    seen = {current}
    union: set[int] = set()
    for k in range(1, max_rounds + 1):
        current = frozenset(op.support(current))
        union |= current
        if current in seen:
            return union, k
        seen.add(current)
    raise ResourceError("influence propagation did not stabilise")


def _corners(mesh, band: set[int], ring1: set[int]) -> tuple[set[int], set[int]]:
    vf = vertex_faces_table(mesh)
    corners, others = set(), set()
    for v in ring1:
        count = sum(1 for f in vf[v] if all(w in band for w in mesh.faces[f]))
        (corners if count == 1 else others).add(v)
    return corners, others


def _labels_of(op: LabelOperator, verts) -> tuple:
    return _sort_labels(op.net.labels[sorted(verts)])


def _rings_for(op: LabelOperator, core: set[int], rho: int):
    rs = face_rings(op.net.mesh, core, rho)
    if len(rs) <= rho:
        raise ResourceError("grid mesh too small for the requested rings")
    inner = set().union(*rs[:rho]) if rho else set(core)
    if not op.complete(inner):
        raise ResourceError("grid mesh too small for the requested rings")
    return rs


def _grow(fn, word: OperatorWord, m: int, kind: str, depth: int | None, need: int):
    """Call ``fn(op)`` on label operators of increasing depth."""
    d = depth if depth is not None else max(4, need)
    last = None
    while d <= MAX_DEPTH:
        op = label_operator(word.text, m, kind, d)
        try:
            return fn(op)
        except ResourceError as exc:
            last = exc
            if depth is not None and d == depth:
                log.debug("depth %d too small, growing", d)
            d += 2
    raise ResourceError(f"ringnet too small even at depth {MAX_DEPTH}: {last}")


def _check_m(m: int):
    if int(m) != m or m < 3:
        raise InvalidParameter(f"valence must be an integer >= 3, got {m}")


def compute_core(word: OperatorWord | str, m: int, kind: str | None = None,
                 rings: int = 1, depth: int | None = None) -> CoreLabeling:
    """Core mesh of a ``kind`` ringnet of valence ``m`` for ``word``.

    Odd-v words are squared first. ``rings`` rings around the core are
    labelled as well; ``rings >= 1`` also yields the convex corners.
    """
    _check_m(m)
    word = _even_word(_word(word))
    kind = kind or natural_kind(word)

    def run(op):
        core, horizon = _core_indices(op)
        rs = _rings_for(op, core, max(rings, 1))
        band = rs[0] | rs[1]
        corners, others = _corners(op.net.mesh, band, rs[1])
        return CoreLabeling(
            word.text, m, kind,
            _labels_of(op, core),
            tuple(_labels_of(op, r) for r in rs[: rings + 1]),
            _labels_of(op, corners), _labels_of(op, others), horizon)

    return _grow(run, word, m, kind, depth, 2 * rings + 4)


def classify_corners(core: CoreLabeling) -> tuple[tuple, tuple]:
    """``(N_a, N_b)``: convex corners of ring ``c.1`` and the remaining vertices.

    A ring vertex is a convex corner when it lies on exactly one face of
    the band formed by the core and ring ``c.1``.
    """
    m = core.m
    per_segment = {}
    for lab in core.corners:
        per_segment.setdefault(lab[2], []).append(lab[:2])
    counts = {len(per_segment.get(l, [])) for l in range(m)}
    shapes = {tuple(sorted(per_segment.get(l, []))) for l in range(m)}
    if len(counts) != 1 or len(shapes) != 1:
        raise StructuralError("core is not rotation symmetric; corners differ between segments")
    return core.corners, core.others


# -- subdivision matrix -------------------------------------------------------

GROUPS = ("C", "B", "A")


@dataclass(frozen=True, eq=False)
class SubdivisionMatrix:
    """Row-stochastic matrix of one round on a ``c.rho``-net.

    Vertices are ordered core, ring ``c.1`` without convex corners, convex
    corners, then rings ``c.2`` to ``c.rho``; ``groups`` gives the slices.
    """

    word: OperatorWord
    m: int
    kind: str
    rho: int
    labels: tuple
    groups: dict
    S: np.ndarray
    core: CoreLabeling
    depth: int

    @property
    def n(self) -> int:
        return self.S.shape[0]

    def block(self, name: str) -> np.ndarray:
        s = self.groups[name]
        return self.S[s, s]

    @property
    def C(self) -> np.ndarray:
        return self.block("C")

    @property
    def B(self) -> np.ndarray:
        return self.block("B")

    @property
    def A(self) -> np.ndarray:
        return self.block("A")

    @property
    def index(self) -> dict:
        return {lab: k for k, lab in enumerate(self.labels)}

    def rotation(self) -> np.ndarray:
        """Permutation taking label ``(i, j, l)`` to ``(i, j, l + 1)``."""
        idx = self.index
        return np.array([idx[canonical_label(i, j, l + 1, self.kind, self.m)]
                         for (i, j, l) in self.labels])

    def row_sum_error(self) -> float:
        return float(np.abs(self.S.sum(axis=1) - 1.0).max())

    def min_entry(self) -> float:
        return float(self.S.min())

    def commutation_residual(self) -> float:
        p = self.rotation()
        P = np.empty_like(self.S)
        P[np.ix_(p, p)] = self.S
        return float(np.abs(P - self.S).max())

    def forbidden_blocks(self) -> list[tuple[str, str, float]]:
        """Blocks that must vanish in the lower triangular layout, with their max entry."""
        names = list(self.groups)
        out = []
        for a, ga in enumerate(names):
            for b, gb in enumerate(names):
                if b > a or (b == a and a >= 3):
                    blk = self.S[self.groups[ga], self.groups[gb]]
                    if blk.size:
                        out.append((ga, gb, float(np.abs(blk).max())))
        return out

    def is_block_triangular(self) -> bool:
        return all(v == 0.0 for _, _, v in self.forbidden_blocks())

    def triplets(self) -> str:
        """Sparse ``row col value`` lines with exact rational values."""
        lines = [f"# {self.word.text} m={self.m} {self.kind} rho={self.rho} n={self.n}"]
        rows, cols = np.nonzero(self.S)
        for r, c in zip(rows.tolist(), cols.tolist()):
            q = Fraction(float(self.S[r, c])).limit_denominator(1 << 40)
            lines.append(f"{r} {c} {q}")
        return "\n".join(lines) + "\n"


def rho_min(word: OperatorWord | str) -> int:
    """Support radius of the regular stencil of the even word plus two."""

    word = _even_word(_word(word))
    if word.has_b:
        return 3
    return _support_radius(word.text) + 2


@cache
def _support_radius(text: str) -> int:
    from .regular import regular_stencil

    return regular_stencil(text).support_radius()


def build_subdivision_matrix(word: OperatorWord | str, m: int, orientation: str | None = None,
                             rho: int | None = None, depth: int | None = None,
                             grow: bool = True) -> SubdivisionMatrix:
    """Subdivision matrix of ``word`` (squared if ``v`` is odd) on a ``c.rho``-net.

    Columns come from applying the word to a deep grid mesh and reading
    weights in label space. With ``rho=None`` the smallest admissible
    ``rho >= rho_min`` is used; an explicit ``rho`` whose output is not
    determined by the input raises :class:`StateError`.
    """
    _check_m(m)
    word = _even_word(_word(word))
    kind = orientation or natural_kind(word)
    if kind not in ("primal", "dual"):
        raise InvalidParameter(f"orientation must be primal or dual, got {kind!r}")
    auto = rho is None
    r = rho_min(word) if auto else int(rho)
    if r < 1:
        raise InvalidParameter("rho must be >= 1")
    while True:
        try:
            return _grow(lambda op: _assemble(op, r), word, m, kind, depth, 2 * r + 4)
        except StateError:
            if not (auto and grow) or r > 12:
                raise
            r += 1


def _assemble(op: LabelOperator, rho: int) -> SubdivisionMatrix:
    core, _ = _core_indices(op)
    rs = _rings_for(op, core, max(rho, 1))
    corners, others = _corners(op.net.mesh, rs[0] | rs[1], rs[1])
    groups_v = [sorted(rs[0]), sorted(others), sorted(corners)] + [sorted(r) for r in rs[2: rho + 1]]
    names = list(GROUPS) + [f"c.{k}" for k in range(2, rho + 1)]
    lab = op.net.labels
    order, groups = [], {}
    for name, vs in zip(names, groups_v):
        vs = sorted(vs, key=lambda v: (lab[v, 2], lab[v, 0], lab[v, 1]))
        groups[name] = slice(len(order), len(order) + len(vs))
        order += vs
    if not op.has_row[order].all():
        raise ResourceError("output rows missing")
    sub = op.T[order]
    pos = np.full(op.T.shape[1], -1, dtype=np.int64)
    pos[order] = np.arange(len(order))
    if (pos[sub.indices] < 0).any():
        raise StateError(
            f"rho={rho} too small: the image of the c.{rho}-net depends on vertices outside it; "
            f"increase rho (a c.k-net determines the c.2k-net of its image)")
    S = sub[:, order].toarray()
    core_lab = CoreLabeling(op.word.text, op.m, op.kind, _labels_of(op, rs[0]),
                            tuple(_labels_of(op, r) for r in rs[: rho + 1]),
                            _labels_of(op, corners), _labels_of(op, others), 0)
    labels = tuple(tuple(int(x) for x in lab[v]) for v in order)
    return SubdivisionMatrix(op.word, op.m, op.kind, rho, labels, groups, S, core_lab, op.depth)


# -- frequency decomposition --------------------------------------------------

@dataclass(frozen=True, eq=False)
class FrequencyBlocks:
    """Discrete Fourier blocks of a rotation-commuting matrix.

    ``reps`` are the segment-0 labels indexing each block; for a primal
    net the centre vertex is appended to the frequency-0 block only.
    """

    m: int
    reps: tuple
    blocks: tuple
    center: tuple | None

    def __getitem__(self, f: int) -> np.ndarray:
        return self.blocks[f % self.m]

    def __len__(self) -> int:
        return self.m

    def spectrum(self) -> np.ndarray:
        return np.concatenate([np.linalg.eigvals(b) for b in self.blocks])


def frequency_decompose(mat: SubdivisionMatrix, tol: float = 1e-12) -> FrequencyBlocks:
    """Blocks ``S_f[a, b] = sum_l S[(a, 0), (b, l)] w**(f l)`` with ``w = exp(2 pi i / m)``.

    A frequency-``f`` vector ``x[(b, l)] = y[b] w**(f l)`` satisfies
    ``(S x)[(a, l)] = w**(f l) (S_f y)[a]``.
    """
    res = mat.commutation_residual()
    if res > tol:
        raise StructuralError(f"matrix does not commute with the rotation (residual {res:.3g})")
    m = mat.m
    idx = mat.index
    center = None
    reps = [lab for lab in mat.labels if lab[2] == 0 and not (mat.kind == "primal" and lab[0] == 0)]
    if mat.kind == "primal":
        center = (0, 0, 0)
    rows = np.array([idx[lab] for lab in reps])
    cols = np.array([[idx[canonical_label(i, j, l, mat.kind, m)] for l in range(m)] for (i, j, _) in reps])
    S = mat.S
    sub = S[rows]  # (n_rep, n)
    gathered = sub[:, cols]  # (n_rep, n_rep, m)
    w = np.exp(2j * np.pi / m)
    blocks = []
    for f in range(m):
        phase = w ** (f * np.arange(m))
        blk = gathered @ phase
        if f == 0 and center is not None:
            c = idx[center]
            top = np.concatenate([gathered.sum(axis=2).real, S[rows, c][:, None]], axis=1)
            bottom = np.concatenate([S[c, cols].sum(axis=1), [S[c, c]]])[None, :]
            blk = np.vstack([top, bottom]).astype(complex)
        blocks.append(blk)
    return FrequencyBlocks(m, tuple(reps), tuple(blocks), center)


# -- eigenvalues --------------------------------------------------------------

@dataclass(frozen=True)
class EigResult:
    value: complex
    vector: np.ndarray
    iterations: int
    method: str
    residual: float


def dominant_eig(M: np.ndarray, tol: float = EIG_TOL, max_iter: int = MAX_ITER,
                 seed: int = 0, start=None) -> EigResult:
    """Dominant eigenpair by power iteration, falling back to a dense solver."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    if n == 0:
        return EigResult(0j, np.zeros(0, complex), 0, "empty", 0.0)
    if start is None:
        rng = np.random.default_rng(seed)
        start = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    lam, vec, its, ok, res = power_iteration(M, np.asarray(start, complex), tol, max_iter)
    if ok:
        return EigResult(complex(lam), vec, its, "power", float(res))
    vals, vecs = np.linalg.eig(M)
    k = _pick_dominant(vals)
    v = vecs[:, k]
    res = float(np.abs(M @ v - vals[k] * v).max())
    return EigResult(complex(vals[k]), v, its, "dense", res)


def _pick_dominant(vals: np.ndarray, tol: float = 1e-9) -> int:
    mags = np.abs(vals)
    top = mags.max()
    cand = np.nonzero(mags >= top - tol * max(top, 1.0))[0]
    # prefer the real, positive representative among ties
    return int(max(cand, key=lambda k: (vals[k].real, -abs(vals[k].imag))))


def spectral_radius(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvals(M)).max())


def block_spectral_radii(mat: SubdivisionMatrix) -> tuple[float, float]:
    """Spectral radii ``(rho_B, rho_A)`` of the two ring-``c.1`` diagonal blocks."""
    return spectral_radius(mat.B), spectral_radius(mat.A)


def spectral_bounds(word: OperatorWord) -> tuple[float, float]:
    """Upper bounds on ``rho_B`` and ``rho_A`` from the factor counts."""
    a, v, r = word.a, word.v, word.r
    return 2.0 ** (-r - a - v), (0.0 if v > 0 else 4.0 ** (-r - a))


def _nullity(M: np.ndarray, tol: float) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int((s <= tol).sum())


def generalized_eigenvector_rank(M: np.ndarray, lam: complex, tol: float = RANK_TOL) -> tuple[int, int]:
    """``(dim ker (M - lam I), dim ker (M - lam I)^2)``.

    The rank tolerance is ``tol`` times the largest absolute entry of ``M``.
    """
    M = np.asarray(M)
    n = M.shape[0]
    if n == 0:
        return 0, 0
    D = M - lam * np.eye(n)
    thr = tol * max(float(np.abs(M).max()), 1e-300)
    return _nullity(D, thr), _nullity(D @ D, thr)


def blockwise_multiplicity(blocks: FrequencyBlocks, lam: complex, tol: float = RANK_TOL) -> tuple[int, int]:
    """Multiplicities of ``lam`` in the full matrix, summed over frequency blocks."""
    g = a = 0
    for b in blocks.blocks:
        x, y = generalized_eigenvector_rank(b, lam, tol)
        g += x
        a += y
    return g, a


# -- reports ------------------------------------------------------------------

@dataclass
class SpectrumReport:
    """Per-frequency dominant eigenvalues and the block spectral radii."""

    word: str
    m: int
    kind: str
    rho: int
    size: int
    lambdas: list
    methods: list
    iterations: list
    residuals: list
    mu0: complex
    mu0_tie: bool
    lambda_pi: float
    rho_B: float
    rho_A: float
    multiplicity: tuple
    block_multiplicity: dict = field(default_factory=dict)
    norm: str = "max-abs entry"

    @property
    def lambda_1(self) -> float:
        """``lambda_{2 pi / m}``."""
        return self.lambdas[1 % self.m].real

    def lambda_f(self, f: int) -> complex:
        return self.lambdas[f % self.m]

    def subdominant(self) -> bool:
        """``lambda_{2 pi/m}`` exceeds every other eigenvalue modulus except 1."""
        lam = abs(self.lambda_1)
        others = [abs(self.mu0), self.rho_B, self.rho_A]
        others += [abs(x) for f, x in enumerate(self.lambdas) if f not in (0, 1, self.m - 1)]
        return all(lam > o + 1e-9 for o in others)

    def to_dict(self) -> dict:
        return {
            "word": self.word, "valence": self.m, "orientation": self.kind, "rho": self.rho,
            "size": self.size,
            "lambda": [{"f": f, "value": complex(x), "method": mth, "iterations": it, "residual": res}
                       for f, (x, mth, it, res) in enumerate(
                           zip(self.lambdas, self.methods, self.iterations, self.residuals))],
            "lambda_2pi_over_m": self.lambda_1,
            "mu0": complex(self.mu0), "mu0_abs": abs(self.mu0), "mu0_tie": self.mu0_tie,
            "lambda_pi": self.lambda_pi, "rho_B": self.rho_B, "rho_A": self.rho_A,
            "multiplicity": {"geometric": self.multiplicity[0], "generalized_order2": self.multiplicity[1]},
            "norm": self.norm,
        }

    def csv(self) -> str:
        lines = ["f,re,im,abs,method,iterations,residual"]
        for f, (x, mth, it, res) in enumerate(zip(self.lambdas, self.methods, self.iterations, self.residuals)):
            lines.append(f"{f},{x.real:.17g},{x.imag:.17g},{abs(x):.17g},{mth},{it},{res:.3g}")
        return "\n".join(lines) + "\n"


def subdominant_of_zero(block: np.ndarray, tol: float = 1e-9) -> tuple[complex, bool]:
    """Largest-modulus eigenvalue of the frequency-0 block other than the simple eigenvalue 1."""
    vals = np.linalg.eigvals(block)
    k = int(np.argmin(np.abs(vals - 1.0)))
    rest = np.delete(vals, k)
    if rest.size == 0:
        return 0j, False
    mags = np.abs(rest)
    top = mags.max()
    ties = rest[mags >= top - tol]
    tie = len({(round(z.real, 9), round(abs(z.imag), 9)) for z in ties}) > 1
    j = _pick_dominant(rest)
    return complex(rest[j]), tie


@lru_cache(maxsize=64)
def _lambda_pi(word_text: str, kind: str) -> float:
    mat = build_subdivision_matrix(word_text, 4, kind)
    blk = frequency_decompose(mat)[2]
    return abs(dominant_eig(blk).value)


def lambda_phi(word: OperatorWord | str, m: int, f: int, kind: str | None = None,
               rho: int | None = None) -> float:
    """Dominant eigenvalue of frequency ``f`` at valence ``m`` (segment angle ``2 pi f / m``)."""
    word = _even_word(_word(word))
    mat = build_subdivision_matrix(word, m, kind, rho)
    e = dominant_eig(frequency_decompose(mat)[f])
    return e.value.real if abs(e.value.imag) < 1e-12 else abs(e.value)


def spectrum_report(word: OperatorWord | str, m: int, rho: int | None = None,
                    kind: str | None = None, tol: float = EIG_TOL, max_iter: int = MAX_ITER) -> SpectrumReport:
    """Eigen-data of the subdivision matrix of ``word`` at valence ``m``."""
    word = _even_word(_word(word))
    mat = build_subdivision_matrix(word, m, kind, rho)
    fb = frequency_decompose(mat)
    lambdas, methods, its, res = [], [], [], []
    for f in range(m):
        e = dominant_eig(fb[f], tol, max_iter)
        lambdas.append(e.value)
        methods.append(e.method)
        its.append(e.iterations)
        res.append(e.residual)
    mu0, tie = subdominant_of_zero(fb[0])
    rb, ra = block_spectral_radii(mat)
    lam1 = lambdas[1 % m]
    mult = blockwise_multiplicity(fb, lam1)
    per_block = {f: generalized_eigenvector_rank(fb[f], lam1) for f in range(m)}
    return SpectrumReport(word.text, m, mat.kind, mat.rho, mat.n, lambdas, methods, its, res,
                          mu0, tie, _lambda_pi(word.text, mat.kind), rb, ra, mult, per_block)


# -- C0 -------------------------------------------------------------------------

def positive_column_power(S: np.ndarray, l_max: int = 40) -> int | None:
    """Smallest ``l <= l_max`` for which ``S**l`` has a strictly positive column."""
    return reachable_positive_column((np.asarray(S) > 0).astype(np.uint8), l_max)


def check_c0(word: OperatorWord | str, m: int, rho: int | None = None, *, matrix=None,
             l_max: int = 40, tol: float = 1e-14):
    """C0 certificate: stochastic matrix, positive column of a power, simple eigenvalue 1."""
    from .certificate import C0, NOT_CERTIFIABLE, Certificate

    if matrix is None:
        word = _even_word(_word(word))
        mat = build_subdivision_matrix(word, m, None, rho)
        S = mat.S
        subject = {"word": word.text, "valence": m, "orientation": mat.kind}
    else:
        mat = None
        S = np.asarray(matrix, dtype=float)
        subject = {"word": str(word), "valence": m, "orientation": "synthetic"}
    row_err = float(np.abs(S.sum(axis=1) - 1.0).max())
    min_entry = float(S.min())
    stochastic = row_err <= tol and min_entry >= 0.0
    l = positive_column_power(S, l_max)
    vals = np.linalg.eigvals(S) if mat is None else frequency_decompose(mat).spectrum()
    near_one = int((np.abs(vals - 1.0) <= 1e-9).sum())
    top_other = float(np.sort(np.abs(vals))[-2]) if len(vals) > 1 else 0.0
    simple = near_one == 1 and top_other < 1.0 - 1e-9
    ok = stochastic and l is not None and simple
    cert = Certificate(subject, C0 if ok else NOT_CERTIFIABLE)
    cert.add("size", S.shape[0])
    cert.add("row_sum_error", row_err)
    cert.add("min_entry", min_entry)
    cert.add("stochastic", stochastic)
    cert.add("positive_column_power", l, f"searched l <= {l_max}")
    cert.add("eigenvalue_one_multiplicity", near_one)
    cert.add("second_modulus", top_other)
    if mat is not None:
        cert.add("rho", mat.rho)
    cert.provenance.append("stochastic subdivision matrix with a positive column in some power")
    return cert
