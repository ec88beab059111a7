"""Characteristic meshes, second-direction edges and cone tests at extraordinary elements."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .certificate import (
    C1_EXTRAORDINARY,
    INAPPLICABLE,
    INVALID,
    NOT_CERTIFIABLE,
    Certificate,
)
from .errors import InvalidParameter, InvalidWord, MidsubError, StructuralError
from .kernels import power_iteration
from .operators import OperatorWord, apply_factor, classify_word, parse_word
from .ringnet import build_grid_mesh, canonical_label, grid_position, label_ringnet
from .spectral import (
    SubdivisionMatrix,
    _even_word,
    _pick_dominant,
    _word,
    blockwise_multiplicity,
    build_subdivision_matrix,
    frequency_decompose,
    spectrum_report,
)

log = logging.getLogger(__name__)

ANGLE_TOL = 1e-9
CHAR_TOL = 1e-13
CHAR_MAX_ITER = 200000
STALL = 3000
CONE_STEPS = 4


# -- cones --------------------------------------------------------------------

@dataclass(frozen=True)
class Cone:
    """Angular sector ``(0, inf) e^{i [lo, hi]}``; ``pointed`` adds the origin."""

    alpha: float
    beta: float
    pointed: bool = False

    @property
    def lo(self) -> float:
        return min(self.alpha, self.beta)

    @property
    def hi(self) -> float:
        return max(self.alpha, self.beta)

    def offset(self, z: complex) -> float:
        """Angle of ``z`` measured from ``lo`` in ``[-pi, pi)``."""
        d = np.angle(z) - self.lo
        return float((d + np.pi) % (2 * np.pi) - np.pi)

    def with_pointed(self, pointed: bool) -> Cone:
        return Cone(self.alpha, self.beta, pointed)


def sector_cone(m: int, pointed: bool = False) -> Cone:
    """``C(2 pi / m, pi / 2)``, the cone for second-direction edges at valence ``m``."""
    return Cone(2 * np.pi / m, np.pi / 2, pointed)


@dataclass(frozen=True)
class ConeWitness:
    label: object
    vector: complex
    angle: float
    reason: str  # "outside", "zero" or "boundary"


@dataclass
class ConeCheck:
    """Outcome of a containment test; ``violations`` is empty iff contained."""

    cone: Cone
    violations: list = field(default_factory=list)
    boundary: list = field(default_factory=list)
    count: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        def w(x):
            return {"label": list(x.label) if isinstance(x.label, tuple) else x.label,
                    "vector": x.vector, "angle": x.angle, "reason": x.reason}

        return {"cone": [self.cone.lo, self.cone.hi], "pointed": self.cone.pointed,
                "vectors": self.count, "contained": self.ok,
                "violations": [w(x) for x in self.violations],
                "boundary": [w(x) for x in self.boundary]}


def cone_contains(cone: Cone, vectors, pointed: bool | None = None, tol: float = ANGLE_TOL,
                  zero_tol: float | None = None) -> ConeCheck:
    """Test whether every vector lies in ``cone``.

    ``vectors`` is a mapping ``label -> complex`` or a sequence. Angles
    within ``tol`` of a boundary count as inside and are listed in
    ``boundary``. A vector is zero when its modulus is at most
    ``zero_tol`` (default ``1e-12`` times the largest modulus).
    """
    if pointed is not None:
        cone = cone.with_pointed(pointed)
    items = list(vectors.items()) if isinstance(vectors, dict) else list(enumerate(vectors))
    mags = [abs(complex(z)) for _, z in items]
    if zero_tol is None:
        zero_tol = 1e-12 * max(mags, default=0.0)
    out = ConeCheck(cone, count=len(items))
    width = cone.hi - cone.lo
    for (lab, z), r in zip(items, mags):
        z = complex(z)
        if r <= zero_tol:
            if not cone.pointed:
                out.violations.append(ConeWitness(lab, z, float("nan"), "zero"))
            continue
        d = cone.offset(z)
        ang = float(np.angle(z))
        if d < -tol or d > width + tol:
            out.violations.append(ConeWitness(lab, z, ang, "outside"))
        elif abs(d) <= tol or abs(d - width) <= tol:
            out.boundary.append(ConeWitness(lab, z, ang, "boundary"))
    return out


# -- second-direction edges ---------------------------------------------------

def nabla2(net, max_index: int | None = None) -> dict:
    """Edges ``p_ij - p_i,j-1`` of segment 0 for ``j > 0``.

    ``i`` starts at 0 on primal nets and at 1 on dual nets, where the
    ``j = 0`` end is the canonical vertex ``(1, i)`` of segment ``-1``.
    ``net`` needs ``kind`` and ``get(i, j, l)`` returning a complex or None.
    """
    lo = 0 if net.kind == "primal" else 1
    top = max_index if max_index is not None else _max_index(net)
    out = {}
    for i in range(lo, top + 1):
        for j in range(1, top + 1):
            a = net.get(i, j, 0)
            b = net.get(i, j - 1, 0)
            if a is not None and b is not None:
                out[(i, j)] = complex(a) - complex(b)
    return out


def _max_index(net) -> int:
    if hasattr(net, "values"):
        return max(max(i, j) for i, j in net.values)
    labels = net.labels
    return int(labels[:, :2].max())


# -- characteristic mesh ------------------------------------------------------

@dataclass
class CharacteristicMesh:
    """Frequency-1 eigennet of the subdivision matrix on a ``c.rho``-net.

    ``values`` maps segment-0 labels ``(i, j)`` to complex positions; other
    segments are rotations by ``exp(2 pi i l / m)``.
    """

    word: str
    m: int
    kind: str
    rho: int
    values: dict
    eigenvalue: float
    residual: float
    iterations: int
    method: str
    converged: bool
    frequency: int = 1

    def get(self, i: int, j: int, l: int = 0):
        try:
            a, b, k = canonical_label(i, j, l, self.kind, self.m)
        except StructuralError:
            return None
        if self.kind == "primal" and a == 0:
            return 0j
        z = self.values.get((a, b))
        if z is None:
            return None
        return z * np.exp(2j * np.pi * self.frequency * k / self.m)

    def segment(self, size: int = 3) -> np.ndarray:
        """``size x size`` array with entry ``[i-1, j-1] = c_ij``."""
        out = np.full((size, size), np.nan + 0j)
        for i in range(1, size + 1):
            for j in range(1, size + 1):
                z = self.get(i, j, 0)
                if z is not None:
                    out[i - 1, j - 1] = z
        return out

    def vector(self, labels) -> np.ndarray:
        return np.array([self.get(i, j, l) for (i, j, l) in labels], dtype=complex)

    def nabla2(self) -> dict:
        return nabla2(self)

    def is_rotation_symmetric(self, tol: float = 1e-9) -> bool:
        scale = max(abs(z) for z in self.values.values())
        w = np.exp(2j * np.pi / self.m)
        for (i, j) in self.values:
            for l in range(self.m):
                a, b = self.get(i, j, l), self.get(i, j, l + 1)
                if a is not None and b is not None and abs(b - w * a) > tol * scale:
                    return False
        return True

    def is_reflection_symmetric(self, tol: float = 1e-9) -> bool:
        """``c^{-1}_ji`` is the mirror image of ``c^0_ij`` in the real axis."""
        scale = max(abs(z) for z in self.values.values())
        for (i, j), z in self.values.items():
            try:
                w = self.get(j, i, -1)
            except StructuralError:
                continue
            if w is not None and abs(w - np.conj(z)) > tol * scale:
                return False
        return True

    def in_sector(self, tol: float = ANGLE_TOL) -> bool:
        """Segment 0 lies in ``[0, inf) e^{i [0, 2 pi / m]}``."""
        cone = Cone(0.0, 2 * np.pi / self.m, pointed=True)
        return cone_contains(cone, self.values, tol=tol).ok

    def to_mesh(self):
        """Planar mesh (``z = 0``) over every segment of the known labels."""
        from .mesh import QuadMesh

        top = max(max(i, j) for i, j in self.values)
        depth = top if self.kind == "primal" else top - 1
        grid = build_grid_mesh(self.m, 1, max(depth, 1), self.kind)
        keep = np.zeros(grid.mesh.n_vertices, bool)
        pos = np.zeros((grid.mesh.n_vertices, 3))
        for v, (i, j, l) in enumerate(grid.labels.tolist()):
            z = self.get(i, j, l)
            if z is not None:
                keep[v] = True
                pos[v, :2] = (z.real, z.imag)
        faces = [f for f in grid.mesh.faces if all(keep[v] for v in f)]
        used = sorted({v for f in faces for v in f})
        new = {v: k for k, v in enumerate(used)}
        return QuadMesh(pos[used], tuple(tuple(new[v] for v in f) for f in faces))

    def to_dict(self) -> dict:
        return {"word": self.word, "valence": self.m, "orientation": self.kind, "rho": self.rho,
                "eigenvalue": self.eigenvalue, "residual": self.residual,
                "iterations": self.iterations, "method": self.method, "converged": self.converged,
                "segment": {f"{i},{j}": z for (i, j), z in sorted(self.values.items())}}


def _reps(mat: SubdivisionMatrix) -> list:
    return [lab for lab in mat.labels if lab[2] == 0 and not (mat.kind == "primal" and lab[0] == 0)]


def _full_vector(y: np.ndarray, reps, mat: SubdivisionMatrix) -> np.ndarray:
    pos = {lab[:2]: k for k, lab in enumerate(reps)}
    w = np.exp(2j * np.pi / mat.m)
    out = np.zeros(mat.n, complex)
    for k, (i, j, l) in enumerate(mat.labels):
        if mat.kind == "primal" and i == 0:
            continue
        out[k] = y[pos[(i, j)]] * w ** l
    return out


def _gauge(values: dict, kind: str, m: int) -> dict:
    """Rotate so the mirror axis of segments 0 and -1 is the positive real axis.

    Mirror partners satisfy ``c^{-1}_ji = conj(c^0_ij)``, which fixes the
    rotation up to a half turn; the half turn is chosen so segment 0 has a
    non-negative mean imaginary part.
    """
    w = np.exp(2j * np.pi / m)
    best, pair = -1.0, None
    for (i, j), z in values.items():
        a, b, l = canonical_label(j, i, -1, kind, m)
        partner = values.get((a, b))
        if partner is None:
            continue
        zb = partner * w ** l
        r = abs(z) * abs(zb)
        if r > best:
            best, pair = r, (z, zb)
    if pair is None or best <= 0:
        raise StructuralError("net has no non-zero mirror pair")
    za, zb = pair
    e2 = np.conj(za) / zb
    g = np.sqrt(e2 / abs(e2))
    out = {k: v * g for k, v in values.items()}
    if np.mean([z.imag for z in out.values()]) < 0:
        out = {k: -v for k, v in out.items()}
    scale = max(abs(z) for z in out.values())
    return {k: v / scale for k, v in out.items()}


def _chain_heads(M: np.ndarray, lam: complex, x: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Eigenvector heading the longest Jordan chain of ``lam``, nearest to ``x``.

    The image of ``ker (M - lam)^2`` under ``M - lam`` consists of the
    eigenvectors that have a generalized eigenvector above them.
    """
    n = M.shape[0]
    D = M - lam * np.eye(n)
    thr = tol * max(np.abs(M).max(), 1e-300)
    _, s, vh = np.linalg.svd(D @ D)
    K2 = vh[s <= thr].conj().T
    img = D @ K2
    if img.size == 0 or np.abs(img).max() <= thr:
        _, s, vh = np.linalg.svd(D)
        Q = vh[s <= thr].conj().T
    else:
        u, s, _ = np.linalg.svd(img, full_matrices=False)
        Q = u[:, s > thr * max(1.0, s.max())]
    if Q.shape[1] == 0:
        raise StructuralError("no eigenvector found for the dominant eigenvalue")
    return Q @ (Q.conj().T @ x) if np.abs(Q.conj().T @ x).max() > 0 else Q[:, 0]


def characteristic_mesh(word: OperatorWord | str, m: int, rho: int | None = None,
                        tol: float = CHAR_TOL, max_iter: int = CHAR_MAX_ITER,
                        stall: int = STALL) -> CharacteristicMesh:
    """Normalised limit of the subdivided frequency-1 grid mesh.

    Power iteration runs on the frequency-1 block of ``S`` starting from
    the grid mesh. When it stalls (competing eigenvalues or a Jordan
    block, as for ``VV`` at valence 3) the dominant eigenvalue is taken from
    a dense solve and the net is the eigenvector heading the Jordan chain,
    projected from the last iterate.
    """
    word = _even_word(_word(word))
    mat = build_subdivision_matrix(word, m, rho=rho)
    fb = frequency_decompose(mat)
    B1 = np.asarray(fb[1])
    reps = list(fb.reps)
    y0 = np.array([grid_position(i, j, 0, m, 1, mat.kind) for (i, j, _) in reps])
    lam, y, its, ok, res = power_iteration(B1, y0, tol, max_iter, stall)
    method = "iteration"
    if not ok or abs(complex(lam).imag) > 1e-9 or complex(lam).real <= 0:
        log.info("%s m=%d: iteration did not settle (residual %.3g after %d steps); "
                 "switching to the generalized-eigenvector path", word.text, m, res, its)
        vals = np.linalg.eigvals(B1)
        lam = vals[_pick_dominant(vals)]
        y = _chain_heads(B1, lam, np.asarray(y, complex))
        method = "generalized-eigenvector"
    lam = complex(lam)
    values = {lab[:2]: complex(z) for lab, z in zip(reps, y)}
    values = _gauge(values, mat.kind, m)
    cm = CharacteristicMesh(word.text, m, mat.kind, mat.rho, values, lam.real, 0.0, int(its),
                            method, bool(ok))
    z = cm.vector(mat.labels)
    cm.residual = float(np.abs(mat.S @ z - lam * z).max() / np.abs(z).max())
    return cm


def segment_match_error(cm: CharacteristicMesh, expected: dict) -> float:
    """Relative error of the best complex-scale fit of ``cm`` to ``expected``.

    ``expected`` maps ``(i, j)`` to complex values; the mirror image of the
    fit is tried as well, so the comparison ignores scale and gauge.
    """
    keys = sorted(expected)
    b = np.array([expected[k] for k in keys], complex)
    a = np.array([cm.get(i, j, 0) for i, j in keys], complex)
    best = np.inf
    for x in (a, np.conj(a)):
        s = np.vdot(x, b) / np.vdot(x, x)
        best = min(best, float(np.linalg.norm(s * x - b) / np.linalg.norm(b)))
    return best


# -- finite-level cone checks -------------------------------------------------

def grid_nabla2_sequence(word: OperatorWord | str, m: int, steps: int = CONE_STEPS,
                         rho: int | None = None) -> list[dict]:
    """``nabla2(U^k M / sigma^k)`` on the ``c.rho``-net for ``k = 0..steps``."""
    word = _even_word(_word(word))
    mat = build_subdivision_matrix(word, m, rho=rho)
    fb = frequency_decompose(mat)
    reps = list(fb.reps)
    y = np.array([grid_position(i, j, 0, m, 1, mat.kind) for (i, j, _) in reps])
    sigma = word.sigma_float
    out = []
    for _ in range(steps + 1):
        vals = {lab[:2]: complex(z) for lab, z in zip(reps, y)}
        out.append(nabla2(_SegmentNet(mat.kind, m, vals)))
        y = (fb[1] @ y) / sigma
    return out


@dataclass
class _SegmentNet:
    kind: str
    m: int
    values: dict

    def get(self, i, j, l=0):
        try:
            a, b, k = canonical_label(i, j, l, self.kind, self.m)
        except StructuralError:
            return None
        if self.kind == "primal" and a == 0:
            return 0j
        z = self.values.get((a, b))
        return None if z is None else z * np.exp(2j * np.pi * k / self.m)


# -- phase calculus -----------------------------------------------------------

@lru_cache(maxsize=8)
def _phase_operator(word_text: str, kind: str, depth: int, m0: int):
    """Label-space operator of ``word`` on an ``m0``-segment grid.

    Centre vertices are zeroed after every factor: a rotation-symmetric
    net of non-zero frequency has its centre vertex at the origin.
    """
    word = parse_word(word_text)
    net = build_grid_mesh(m0, 1, depth, kind)
    mesh = net.mesh
    center = ("v", 0) if kind == "primal" else ("f", 0)
    ref = net.ref
    half = 0
    W = sp.identity(mesh.n_vertices, format="csr")
    for fac in word.application_order():
        st = apply_factor(mesh, fac, center)
        mesh, center = st.mesh, st.center
        step = st.weights
        if center[0] == "v":
            d = np.ones(mesh.n_vertices)
            d[center[1]] = 0.0
            step = sp.diags(d) @ step
        W = (step @ W).tocsr()
        ref = st.weights @ ref
        if fac.symbol == "V":
            half ^= 1
    out_kind = "primal" if center[0] == "v" else "dual"
    labels = label_ringnet(mesh, center[1], out_kind, ref, half)
    rows = [v for v, (i, j, l) in enumerate(labels.tolist()) if i >= 0 and l == 0]
    return net.labels, labels[rows, :2], W[rows], out_kind


def phase_apply(word: str, phi: float, kind: str = "dual", segment=None, depth: int = 3,
                m0: int = 8) -> tuple[str, dict]:
    """Apply ``word`` to a symmetric net whose segments are turned by ``phi``.

    ``segment(i, j)`` gives the 0-th segment (default: the grid mesh with
    segment angle ``phi``); segment ``l`` is that segment times
    ``exp(i phi l)``. Returns the output orientation and its 0-th segment.
    Only segments near 0 influence the result near the centre, so an
    ``m0``-segment label space serves every ``phi``.
    """
    in_labels, out_labels, W, out_kind = _phase_operator(word, kind, depth, m0)
    if segment is None:
        u1 = np.exp(1j * phi)
        off = 0.0 if kind == "primal" else 0.5

        def segment(i, j):
            return (i - off) + (j - off) * u1

    l = in_labels[:, 2]
    signed = np.where(l <= m0 // 2, l, l - m0)
    x = np.array([0j if (kind == "primal" and i == 0) else segment(i, j) * np.exp(1j * phi * s)
                  for (i, j, _), s in zip(in_labels.tolist(), signed)])
    y = W @ x
    return out_kind, {(int(i), int(j)): complex(z) for (i, j), z in zip(out_labels.tolist(), y)}


@dataclass
class _PhaseNet:
    kind: str
    phi: float
    values: dict

    def get(self, i, j, l=0):
        if self.kind == "primal":
            if i == 0 and j == 0:
                return 0j
            if i == 0:
                i, j, l = j, 0, l + 1
        else:
            if i == 0 and j == 0:
                return None
            if i == 0:
                i, j, l = j, 1, l + 1
            elif j == 0:
                i, j, l = 1, i, l - 1
        z = self.values.get((i, j))
        return None if z is None else z * np.exp(1j * self.phi * l)


PROBE_WINDOW = 6


def probe_edges(word: str, phi: float, kind: str = "dual", window: int = PROBE_WINDOW) -> dict:
    """``nabla2`` of ``word`` applied to the grid mesh of segment angle ``phi``."""
    out_kind, vals = phase_apply(word, phi, kind)
    return nabla2(_PhaseNet(out_kind, phi, vals), max_index=window)


def vrvr_probe(phi: float, window: int = PROBE_WINDOW) -> float:
    """Direction angle of the extreme edge of ``nabla2((VRVR)^2 M)``.

    ``M`` is the dual grid mesh with segment angle ``phi``. The returned
    edge is the one with the largest direction angle, i.e. the candidate
    closest to leaving the cone through its ``pi / 2`` side.
    """
    if not 0.0 < phi < np.pi / 2:
        raise InvalidParameter("segment angle must lie in (0, pi/2)")
    edges = probe_edges("(VRVR)^2", phi, "dual", window)
    angles = [float(np.angle(z)) for z in edges.values() if abs(z) > 1e-14]
    return max(angles)


# -- certification ------------------------------------------------------------

def _subject(word: OperatorWord, m: int, kind: str | None = None) -> dict:
    out = {"word": word.text, "valence": m}
    if kind:
        out["orientation"] = kind
    return out


def certify_extraordinary(word: OperatorWord | str, m: int, *, rho: int | None = None,
                          steps: int = CONE_STEPS, tol: float = ANGLE_TOL) -> Certificate:
    """C1 verdict at an extraordinary element of valence ``m``.

    Valence 4 goes to the regular analysis. VAV-schemes at valence ``>= 5``
    are certified by the covering theorem, corroborated by the cone tests
    on the characteristic mesh and on ``k`` subdivided grid meshes. At
    valence 3 the spectral inequality is tried first, then the Jordan-chain
    criterion. Generalized Catmull-Clark words go to :func:`certify_gcc`;
    other words get ``technique-inapplicable`` with any cone witness found.
    """
    from .regular import certify_regular

    try:
        w = parse_word(word) if isinstance(word, str) else word
        cls = classify_word(w)
        if cls.kind == "Invalid":
            raise InvalidWord(cls.reason)
        if int(m) != m or m < 3:
            raise InvalidParameter(f"valence must be an integer >= 3, got {m}")
    except MidsubError as exc:
        cert = Certificate({"word": str(word), "valence": m}, INVALID)
        return cert.add("error", str(exc))
    if m == 4:
        cert = certify_regular(w)
        cert.add("route", "valence 4 is regular")
        return cert
    if cls.is_gcc:
        return certify_gcc(w, m, rho=rho)
    w2 = _even_word(w)
    cls = classify_word(w2)
    report = spectrum_report(w2, m, rho)
    cert = Certificate(_subject(w2, m, report.kind), NOT_CERTIFIABLE,
                       config={"angle_tol": tol, "cone_steps": steps, "rho": report.rho})
    if w2 is not w:
        cert.add("squared", True, "odd number of V factors: the squared word is analysed")
    cert.add("class", cls.kind)
    lam = report.lambda_1
    cert.add("lambda_2pi_over_m", lam)
    cert.add("mu0", abs(report.mu0))
    cert.add("rho_B", report.rho_B)
    cert.add("rho_A", report.rho_A)
    cm = characteristic_mesh(w2, m, rho)
    cert.add("characteristic_method", cm.method)
    cert.add("characteristic_residual", cm.residual)
    cert.add("characteristic_eigenvalue", cm.eigenvalue)
    edges = cm.nabla2()
    D = sector_cone(m)
    c_check = cone_contains(D, edges, tol=tol)
    c0_check = cone_contains(D, edges, pointed=True, tol=tol)
    seq = grid_nabla2_sequence(w2, m, steps, rho)
    k_checks = [cone_contains(D, e, pointed=True, tol=tol) for e in seq]
    cert.add("nabla2_C_in_D", c_check.to_dict())
    cert.add("nabla2_UkM_in_D0", [c.ok for c in k_checks], f"k = 0..{steps}")

    if not cls.is_vav:
        witnesses = [v for v in c_check.violations]
        for k, c in enumerate(k_checks):
            witnesses += [ConeWitness(("k", k) + tuple(x.label), x.vector, x.angle, x.reason)
                          for x in c.violations]
        cert.verdict = INAPPLICABLE
        cert.add("cone_witness", [{"label": list(x.label), "vector": x.vector, "angle": x.angle,
                                   "reason": x.reason} for x in witnesses],
                 "edges outside the cone" if witnesses else
                 "none found; cone evidence present, no covering theorem")
        cert.provenance.append("cone technique covers VAV-schemes only")
        return cert

    if m >= 5:
        # covering theorem; numerics corroborate
        ok = c_check.ok and all(k_checks) and report.subdominant()
        cert.provenance.append("C1-property of VAV-schemes for valencies >= 5")
        cert.provenance.append("cone bound for the characteristic control net")
        cert.add("subdominant", report.subdominant())
        cert.add("multiplicity", list(report.multiplicity))
        cert.verdict = C1_EXTRAORDINARY if ok else NOT_CERTIFIABLE
        if not ok:
            cert.add("reason", "numerical corroboration failed")
        return cert

    # valence 3
    margin = lam - max(abs(report.mu0), report.rho_B, report.rho_A)
    cert.add("valence3_margin", margin, "lambda minus max(|mu0|, rho_B, rho_A)")
    if margin > 1e-9:
        cert.verdict = C1_EXTRAORDINARY
        cert.provenance.append("C1-property of VAV-schemes with the valence-3 inequality")
        return cert
    fb = frequency_decompose(build_subdivision_matrix(w2, m, rho=rho))
    geo, alg = blockwise_multiplicity(fb, lam)
    chains = alg - geo
    cert.add("geometric_multiplicity", geo)
    cert.add("generalized_multiplicity", alg)
    cert.add("chains", chains, "independent generalized eigenvectors above eigenvectors")
    cert.add("nabla2_C_in_D0", c0_check.to_dict())
    if chains == 2 and c0_check.ok:
        cert.verdict = C1_EXTRAORDINARY
        cert.provenance.append("generalized-eigenvector C1 criterion with the cone test")
    else:
        cert.add("reason", "inequality fails and the Jordan-chain criterion does not hold")
    return cert


# -- generalized Catmull-Clark ---------------------------------------------------

def _random_symmetric_primal(m: int, depth: int, rng) -> object:
    from .ringnet import symmetric_net

    table = {}

    def seg(i, j):
        if (i, j) not in table:
            table[(i, j)] = complex(rng.standard_normal(), rng.standard_normal())
        return table[(i, j)]

    return symmetric_net(m, depth, "primal", seg)


def b_equals_a2_residual(params, m: int, trials: int = 1, depth: int = 4, seed: int = 0) -> float:
    """Max ``|B N - A^2 N|`` on random rotation-symmetric primal nets of frequency 1."""
    from .operators import average_step, smooth_step

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        net = _random_symmetric_primal(m, depth, rng)
        b = smooth_step(net.mesh, params, ("v", net.center))
        a1 = average_step(net.mesh, ("v", net.center))
        a2 = average_step(a1.mesh, a1.center)
        WA = (a2.weights @ a1.weights).tocsr()
        WB = b.weights.tocsr()
        pos = net.positions
        zb = WB @ pos
        za = WA @ pos
        # compare vertex by vertex through the centre-anchored labels
        lb = label_ringnet(b.mesh, b.center[1], "primal", WB @ net.ref, 0)
        la = label_ringnet(a2.mesh, a2.center[1], "primal", WA @ net.ref, 0)
        ia = {tuple(x): k for k, x in enumerate(la.tolist()) if x[0] >= 0}
        for k, x in enumerate(lb.tolist()):
            if x[0] >= 0 and tuple(x) in ia:
                worst = max(worst, float(np.abs(zb[k] - za[ia[tuple(x)]]).max()))
    return worst


def certify_gcc(word: OperatorWord | str, m: int, *, rho: int | None = None) -> Certificate:
    """C1 verdict for a generalized Catmull-Clark word at valence ``m``.

    With restricted parameters (``alpha(4) = 1/4``, ``beta(4) = 1/2``) the
    word is certified when ``lambda > |mu0|`` and ``m`` is 3 or at least 5.
    The identity ``B N = A^2 N`` on symmetric nets of non-zero frequency is
    checked for every smoothing factor. Unrestricted parameters get the
    three sufficient conditions reported; the verdict is then not-certifiable
    since the covering argument needs the restriction.
    """
    w = parse_word(word) if isinstance(word, str) else word
    cls = classify_word(w)
    if not cls.is_gcc:
        cert = Certificate({"word": w.text, "valence": m}, INVALID)
        return cert.add("error", "not a generalized Catmull-Clark word")
    report = spectrum_report(w, m, rho)
    cert = Certificate(_subject(w, m, report.kind), NOT_CERTIFIABLE, config={"rho": report.rho})
    lam = report.lambda_1
    mu0 = abs(report.mu0)
    cert.add("lambda", lam, "dominant frequency-1 eigenvalue")
    cert.add("mu0", mu0)
    cert.add("rho_B", report.rho_B)
    cert.add("rho_A", report.rho_A)
    ineq = lam > mu0 + 1e-9
    cert.add("lambda_gt_mu0", ineq)
    params = [f.params for f in w.factors if f.symbol == "B"]
    res = max(b_equals_a2_residual(p, m) for p in params)
    cert.add("B_equals_A2_on_symmetric_nets", res, "max deviation")
    restricted = all(p.restricted for p in params)
    constant = all(p.constant for p in params)
    cert.add("restricted", restricted)
    cert.add("constant_parameters", constant)
    if m == 4:
        from .regular import certify_regular

        reg = certify_regular(w)
        cert.verdict = reg.verdict
        cert.add("regular", reg.verdict)
        return cert
    if restricted:
        ok = ineq and (m == 3 or m >= 5) and res <= 1e-12
        cert.provenance.append("C1-property of generalized midpoint smoothers with restricted parameters")
        cert.verdict = C1_EXTRAORDINARY if ok else NOT_CERTIFIABLE
        return cert
    conds = {
        "(1) m>=5 and constant parameters": bool(m >= 5 and constant),
        "(2) m>=5, non-constant parameters and lambda>|mu0|": bool(m >= 5 and not constant and ineq),
        "(3) m=3 and lambda>max(|mu0|,rho_B,rho_A)": bool(
            m == 3 and lam > max(mu0, report.rho_B, report.rho_A) + 1e-9),
    }
    cert.add("unrestricted_conditions", conds, "sufficient conditions proved elsewhere")
    cert.add("reason", "unrestricted parameters: the covering theorem does not apply")
    return cert
