"""Regular-grid analysis: exact stencils, second-difference schemes and the
regular C1 certificate.

Input meshes are indexed by ``Z^2``. After each operator the output lives
on an affine lattice ``o + B Z^2``; for even ``v`` that lattice is a scaled
(and possibly quarter-turned) copy of the input grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cache
from math import ceil

import numpy as np

from .errors import InvalidWord, NotABaseCase, StructuralError
from .operators import BParams, OperatorWord, classify_word, parse_word

F = Fraction
HALF = F(1, 2)

# the four difference directions
DIRECTIONS = {1: (1, 0), 2: (0, 1), 3: (1, 1), 4: (-1, 1)}
# second differences kept in a difference mesh, as (outer, inner) direction pairs
COMPONENTS = ((1, 1), (3, 1), (4, 1), (2, 2), (3, 2), (4, 2))
COMPONENT_NAMES = tuple(f"d{a}d{b}" for a, b in COMPONENTS)

# norms of the base difference schemes used by the composition bound
BASE_BOUNDS = {"A": F(1), "R": F(1, 2), "V": F(1, 2), "AR": F(3, 8)}


def _mat(a, b, c, d):
    return ((F(a), F(b)), (F(c), F(d)))


def _mul(M, N):
    return tuple(tuple(sum(M[i][k] * N[k][j] for k in range(2)) for j in range(2)) for i in range(2))


def _apply(M, k):
    return (M[0][0] * k[0] + M[0][1] * k[1], M[1][0] * k[0] + M[1][1] * k[1])


def _det(M):
    return M[0][0] * M[1][1] - M[0][1] * M[1][0]


def _inv(M):
    d = _det(M)
    return ((M[1][1] / d, -M[0][1] / d), (-M[1][0] / d, M[0][0] / d))


def _combine(values, weights):
    out: dict = {}
    for val, w in zip(values, weights):
        for j, c in val.items():
            out[j] = out.get(j, 0) + w * c
    return {j: c for j, c in out.items() if c != 0}


@dataclass
class LatticeNet:
    """Values on ``origin + basis @ k`` as exact combinations of input values."""

    origin: tuple
    basis: tuple
    values: dict = field(default_factory=dict)

    def position(self, k) -> tuple:
        b = _apply(self.basis, k)
        return (self.origin[0] + b[0], self.origin[1] + b[1])


def identity_net(radius: int) -> LatticeNet:
    vals = {(i, j): {(i, j): F(1)} for i in range(-radius, radius + 1) for j in range(-radius, radius + 1)}
    return LatticeNet((F(0), F(0)), _mat(1, 0, 0, 1), vals)


def _floor_ceil(x: Fraction):
    lo = x.numerator // x.denominator
    return (lo,) if lo == x else (lo, lo + 1)


def _step(net: LatticeNet, symbol: str, params: BParams | None, keep: Fraction | None) -> LatticeNet:
    B, o = net.basis, net.origin
    old = net.values
    ks = np.array(list(old.keys()))
    lo, hi = ks.min(axis=0), ks.max(axis=0)
    if symbol == "R":
        nb = tuple(tuple(x * HALF for x in row) for row in B)
        out = LatticeNet(o, nb)
        cand = ((a, b) for a in range(2 * lo[0], 2 * hi[0] + 1) for b in range(2 * lo[1], 2 * hi[1] + 1))

        def support(K):
            xs = _floor_ceil(F(K[0], 2))
            ys = _floor_ceil(F(K[1], 2))
            return [(x, y) for x in xs for y in ys]
    elif symbol == "A":
        out = LatticeNet(net.position((HALF, HALF)), B)
        cand = ((a, b) for a in range(lo[0], hi[0]) for b in range(lo[1], hi[1]))

        def support(K):
            return [K, (K[0] + 1, K[1]), (K[0], K[1] + 1), (K[0] + 1, K[1] + 1)]
    elif symbol == "V":
        M = _mat(HALF, -HALF, HALF, HALF)
        out = LatticeNet(net.position((HALF, 0)), _mul(B, M))
        # old point (x, y) sits near new index (x + y, y - x)
        cand = ((a, b) for a in range(int(lo[0] + lo[1]) - 1, int(hi[0] + hi[1]) + 2)
                for b in range(int(lo[1] - hi[0]) - 1, int(hi[1] - lo[0]) + 2))

        def support(K):
            s, d = K[0] + K[1], K[0] - K[1]
            if s % 2 == 0:
                # horizontal edge centred at x = (d + 1)/2
                return [(d // 2, s // 2), (d // 2 + 1, s // 2)]
            x = (d + 1) // 2
            return [(x, (s - 1) // 2), (x, (s + 1) // 2)]
    elif symbol == "B":
        out = LatticeNet(o, B)
        alpha, beta = params.weights(4)
        gamma = 1.0 - alpha - beta
        a, b, g = (F(x).limit_denominator(10**12) for x in (alpha, beta, gamma))
        cand = ((x, y) for x in range(lo[0] + 1, hi[0]) for y in range(lo[1] + 1, hi[1]))

        def support(K):
            x, y = K
            return [K, (x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1),
                    (x + 1, y + 1), (x - 1, y + 1), (x - 1, y - 1), (x + 1, y - 1)]
        wts = [a] + [b / 4] * 4 + [g / 4] * 4
    else:  # pragma: no cover - parser guarantees the alphabet
        raise ValueError(symbol)
    for K in cand:
        if keep is not None:
            p = out.position(K)
            if abs(p[0]) > keep or abs(p[1]) > keep:
                continue
        sup = support(K)
        if not all(s in old for s in sup):
            continue
        w = wts if symbol == "B" else [F(1, len(sup))] * len(sup)
        out.values[K] = _combine([old[s] for s in sup], w)
    if not out.values:
        raise StructuralError("stencil window too small")
    return out


@dataclass
class RegularStencil:
    """Action of a word on the regular grid with exact rational weights.

    ``values`` maps output lattice indices to ``{input index: weight}``
    for the output points near the origin.
    """

    word: OperatorWord
    origin: tuple
    basis: tuple
    values: dict

    @property
    def det(self) -> Fraction:
        return abs(_det(self.basis))

    @property
    def scale(self) -> float:
        return float(self.det) ** 0.5

    @property
    def exact_scale(self) -> Fraction | None:
        """Scale as a rational when the lattice is a quarter-turned square grid."""
        (a, b), (c, d) = self.basis
        if a == d and b == -c and (a == 0 or b == 0):
            return abs(a) if a != 0 else abs(b)
        if a == -d and b == c and (a == 0 or b == 0):
            return abs(a) if a != 0 else abs(b)
        return None

    def position(self, k):
        b = _apply(self.basis, k)
        return (self.origin[0] + b[0], self.origin[1] + b[1])

    def weights_at(self, k) -> dict:
        return self.values[k]

    def masks(self) -> list[tuple[Fraction, ...]]:
        """Distinct sorted weight multisets over all output points."""
        seen = set()
        for val in self.values.values():
            seen.add(tuple(sorted(val.values(), reverse=True)))
        return sorted(seen)

    def support_radius(self) -> int:
        """Largest Chebyshev distance (input units) from an output point to its support."""
        r = F(0)
        for k, val in self.values.items():
            p = self.position(k)
            for j in val:
                r = max(r, abs(j[0] - p[0]), abs(j[1] - p[1]))
        return int(ceil(r))

    def cosets(self) -> list[tuple[int, int]]:
        """Representatives of output indices modulo input translations.

        An input translation ``t`` moves output index ``k`` to
        ``k + basis^-1 t``, so ``k`` and ``k'`` are equivalent iff
        ``basis (k - k')`` is integral.
        """
        count = int(1 / self.det)
        reps: list[tuple[int, int]] = []
        for a in range(count + 1):
            for b in range(count + 1):
                if len(reps) == count:
                    return reps
                if any(all(x.denominator == 1 for x in _apply(self.basis, (a - r[0], b - r[1])))
                       for r in reps):
                    continue
                reps.append((a, b))
        return reps

    def check_lattice(self) -> bool:
        """Lattice scale equals ``2**(-r - v/2)`` (squared: ``|det| = 4**(-r) 2**(-v)``)."""
        w = self.word
        return self.det == F(1, 4 ** w.r * 2 ** w.v)


def regular_stencil(word: OperatorWord | str, keep=F(3, 2)) -> RegularStencil:
    """Exact action of ``word`` on ``Z^2`` near the origin.

    Only output points within ``keep`` (Chebyshev, input units) of the
    origin are retained; the input window is sized from the word length.
    """
    if isinstance(word, str):
        word = parse_word(word)
    order = word.application_order()
    # lattice spacing seen by each factor; a factor reaches at most 1.5 spacings
    spacing = []
    s = 1.0
    for f in order:
        spacing.append(s)
        s *= {"R": 0.5, "V": 2 ** -0.5}.get(f.symbol, 1.0)
    reach = [1.5 * sum(spacing[k + 1:]) for k in range(len(order))]
    keep = F(keep)
    net = identity_net(int(ceil(keep + F(1.5 * sum(spacing)))) + 2)
    for idx, f in enumerate(order):
        net = _step(net, f.symbol, f.params, F(keep + 1) + F(reach[idx]).limit_denominator(1000))
    return RegularStencil(word, net.origin, net.basis, net.values)


@cache
def lattice_map(word_text: str) -> tuple:
    """Origin and basis of the output lattice, without weights."""
    word = parse_word(word_text)
    o = (F(0), F(0))
    B = _mat(1, 0, 0, 1)
    for f in word.application_order():
        if f.symbol == "R":
            B = tuple(tuple(x * HALF for x in row) for row in B)
        elif f.symbol == "A":
            b = _apply(B, (HALF, HALF))
            o = (o[0] + b[0], o[1] + b[1])
        elif f.symbol == "V":
            b = _apply(B, (HALF, 0))
            o = (o[0] + b[0], o[1] + b[1])
            B = _mul(B, _mat(HALF, -HALF, HALF, HALF))
    return o, B


def lattice_scale(word: OperatorWord | str) -> float:
    text = word if isinstance(word, str) else word.text
    _, B = lattice_map(text)
    return float(abs(_det(B))) ** 0.5


# -- second differences -------------------------------------------------------

def _diff2_functional(point, comp, step) -> dict:
    """``d_a d_b x_point`` as ``{index: coefficient}`` using index offsets ``step``."""
    a, b = comp
    ea, eb = step[a], step[b]
    k = point
    terms = (
        (k, 1),
        ((k[0] - ea[0], k[1] - ea[1]), -1),
        ((k[0] - eb[0], k[1] - eb[1]), -1),
        ((k[0] - ea[0] - eb[0], k[1] - ea[1] - eb[1]), 1),
    )
    out: dict = {}
    for p, c in terms:
        out[p] = out.get(p, 0) + c
    return {p: c for p, c in out.items() if c}


@dataclass
class Diff2Row:
    coset: tuple
    component: str
    terms: list  # (component name, input index, coefficient)

    @property
    def l1(self) -> Fraction:
        return sum((abs(c) for _, _, c in self.terms), F(0))


@dataclass
class Diff2Scheme:
    """A second-order difference scheme for one base operator."""

    name: str
    stencil: RegularStencil
    rows: list

    @property
    def norm(self) -> Fraction:
        return max(r.l1 for r in self.rows)

    @property
    def row_sums(self) -> list[Fraction]:
        return [r.l1 for r in self.rows]

    def apply(self, diffs_of_input, shift=(0, 0)) -> dict:
        """Evaluate rows given a callable ``(component, index) -> value``."""
        out = {}
        for r in self.rows:
            out[(r.coset, r.component)] = sum(
                float(c) * diffs_of_input(comp, (j[0] + shift[0], j[1] + shift[1]))
                for comp, j, c in r.terms)
        return out


def _output_target(st: RegularStencil, K, comp) -> dict:
    func = _diff2_functional(K, comp, DIRECTIONS)
    vals = [st.values[p] for p in func]
    return _combine(vals, [F(c) for c in func.values()])


def _represent(target: dict, center, radius: int):
    """Minimal-l1 combination of input second differences equal to ``target``."""
    from scipy.optimize import linprog

    cx, cy = int(np.floor(float(center[0]))), int(np.floor(float(center[1])))
    pts = [(cx + a, cy + b) for a in range(-radius, radius + 2) for b in range(-radius, radius + 2)]
    columns = []
    for comp, name in zip(COMPONENTS, COMPONENT_NAMES):
        for p in pts:
            columns.append((name, p, _diff2_functional(p, comp, DIRECTIONS)))
    idx = {}
    for _, _, fn in columns:
        for q in fn:
            idx.setdefault(q, len(idx))
    for q in target:
        if q not in idx:
            return None
    A = np.zeros((len(idx), len(columns)))
    for c, (_, _, fn) in enumerate(columns):
        for q, v in fn.items():
            A[idx[q], c] = v
    b = np.zeros(len(idx))
    for q, v in target.items():
        b[idx[q]] = float(v)
    n = len(columns)
    res = linprog(np.ones(2 * n), A_eq=np.hstack([A, -A]), b_eq=b, bounds=(0, None), method="highs")
    if res.status != 0:
        return None
    x = res.x[:n] - res.x[n:]
    terms = []
    for c, val in enumerate(x):
        if abs(val) > 1e-12:
            fr = F(val).limit_denominator(4096)
            terms.append((columns[c][0], columns[c][1], fr))
    # exact verification of the rationalised representation
    acc: dict = {}
    comp_of = dict(zip(COMPONENT_NAMES, COMPONENTS))
    for name, p, coef in terms:
        for q, v in _diff2_functional(p, comp_of[name], DIRECTIONS).items():
            acc[q] = acc.get(q, 0) + coef * v
    acc = {q: v for q, v in acc.items() if v != 0}
    if acc != {q: v for q, v in target.items() if v != 0}:
        raise StructuralError("difference representation failed exact verification")
    return terms


BASE_CASES = ("A", "R", "V", "AR")


@cache
def diff2_scheme(op: str) -> Diff2Scheme:
    """Second-order difference scheme of a base operator ``A``, ``R``, ``V`` or ``AR``.

    Each output component at each output coset is written as the
    minimal-l1 combination of input second differences, found by linear
    programming and then checked in exact arithmetic. The scheme norm is
    the largest row l1 sum.
    """
    key = op.replace(" ", "")
    if key not in BASE_CASES:
        raise NotABaseCase(f"{op!r} is not one of the base operators {', '.join(BASE_CASES)}")
    st = regular_stencil(key, keep=3)
    rows = []
    for K in st.cosets():
        for comp, name in zip(COMPONENTS, COMPONENT_NAMES):
            target = _output_target(st, K, comp)
            terms = None
            for radius in (2, 3, 4):
                terms = _represent(target, st.position(K), radius)
                if terms is not None:
                    break
            if terms is None:
                raise StructuralError(f"no difference representation for {name} at {K}")
            rows.append(Diff2Row(K, name, terms))
    return Diff2Scheme(key, st, rows)


def second_differences(values: np.ndarray, point, comp) -> float:
    """Second difference of a 2D array indexed ``values[i, j]`` at ``point``."""
    total = 0.0
    for q, c in _diff2_functional(point, comp, DIRECTIONS).items():
        total += c * values[q]
    return total


def verify_eq1(op: str, trials: int = 100, seed: int = 0, mesh=None) -> float:
    """Largest residual of ``(U C)'' = U'' C''`` over random bounded meshes.

    ``mesh`` may be a callable ``(i, j) -> value`` replacing the random data
    (e.g. a constant or linear mesh); then one trial is run.
    """
    scheme = diff2_scheme(op)
    st = scheme.stencil
    rng = np.random.default_rng(seed)
    R = 12
    worst = 0.0
    runs = 1 if mesh is not None else trials
    comp_of = dict(zip(COMPONENT_NAMES, COMPONENTS))
    for _ in range(runs):
        if mesh is None:
            data = {(i, j): rng.uniform(-1, 1) for i in range(-R, R + 1) for j in range(-R, R + 1)}
        else:
            data = {(i, j): float(mesh(i, j)) for i in range(-R, R + 1) for j in range(-R, R + 1)}

        def out_value(K, shift):
            # output of the input translated by ``shift``
            return sum(float(w) * data[(j[0] + shift[0], j[1] + shift[1])] for j, w in st.values[K].items())

        def in_diff(name, p):
            return sum(c * data[q] for q, c in _diff2_functional(p, comp_of[name], DIRECTIONS).items())

        for shift in ((0, 0), (1, 0), (0, 1), (-2, 1), (3, -2)):
            for row in scheme.rows:
                K = row.coset
                fn = _diff2_functional(K, comp_of[row.component], DIRECTIONS)
                lhs = sum(c * out_value(p, shift) for p, c in fn.items())
                rhs = sum(float(c) * in_diff(n, (j[0] + shift[0], j[1] + shift[1])) for n, j, c in row.terms)
                worst = max(worst, abs(lhs - rhs))
    return worst


# -- composition bound and certificate ----------------------------------------

def compose_diff2_bound(word: OperatorWord | str) -> Fraction:
    """Upper bound on the norm of the difference scheme of ``word**2``.

    Products of base norms: every ``V`` and ``R`` of the squared word
    contributes ``1/2`` and every ``A`` contributes 1. Without ``V`` one
    adjacent ``AR`` pair of the squared word is bounded jointly by ``3/8``.
    """
    if isinstance(word, str):
        word = parse_word(word)
    cls = classify_word(word)
    if cls.kind == "Invalid":
        raise InvalidWord(f"invalid word {word.text!r}: {cls.reason}")
    if word.has_b:
        raise NotABaseCase("the composition bound covers general midpoint words only")
    v, r = word.v, word.r
    if v >= 1:
        return BASE_BOUNDS["V"] ** (2 * v) * BASE_BOUNDS["R"] ** (2 * r) * BASE_BOUNDS["A"] ** (2 * word.a)
    return BASE_BOUNDS["AR"] * BASE_BOUNDS["R"] ** (2 * r - 1) * BASE_BOUNDS["A"] ** (2 * word.a - 1)


def sigma_squared(word: OperatorWord) -> Fraction:
    """``sigma(word**2) = 2**(-v - 2r)``."""
    return F(1, 2 ** (word.v + 2 * word.r))


def equivalent_midpoint_word(word: OperatorWord) -> OperatorWord | None:
    """On regular meshes a restricted smoother acts as ``A^2``; return the
    general midpoint word with each such ``B`` replaced, or None."""
    from .operators import Factor

    out = []
    for f in word.factors:
        if f.symbol == "B":
            if not f.params.restricted:
                return None
            out += [Factor("A"), Factor("A")]
        else:
            out.append(f)
    return OperatorWord(tuple(out))


def _exact_scale_of(basis) -> Fraction | None:
    (a, b), (c, d) = basis
    if (a == d and b == -c) or (a == -d and b == c):
        det = abs(a * d - b * c)
        num, den = det.numerator, det.denominator
        rn, rd = int(round(num ** 0.5)), int(round(den ** 0.5))
        if rn * rn == num and rd * rd == den:
            return F(rn, rd)
    return None


def certify_regular(word: OperatorWord | str):
    """Regular-mesh C1 certificate for a general midpoint word.

    The squared word must have a difference scheme whose norm bound is
    strictly below its lattice scale ``sigma(U^2) = 2**(-v-2r)``.
    Generalized Catmull-Clark words are checked through their regular
    equivalent, in which every restricted smoother acts as ``A^2``.
    """
    from .certificate import C1_REGULAR, INAPPLICABLE, Certificate

    if isinstance(word, str):
        word = parse_word(word)
    cls = classify_word(word)
    if cls.kind == "Invalid":
        raise InvalidWord(f"invalid word {word.text!r}: {cls.reason}")
    subject = {"word": word.text, "valence": 4, "orientation": "regular"}
    target = word
    if word.has_b:
        target = equivalent_midpoint_word(word)
        if target is None:
            cert = Certificate(subject, INAPPLICABLE)
            cert.add("reason", "smoother parameters differ from (1/4, 1/2) at valence 4; "
                     "no regular equivalent midpoint word")
            return cert
    a, v, r = target.a, target.v, target.r
    bound = compose_diff2_bound(target)
    sig2 = sigma_squared(target)
    _, basis = lattice_map(target.squared().text)
    scale2 = _exact_scale_of(basis)
    lattice_ok = scale2 == sig2
    cert = Certificate(subject, C1_REGULAR if (bound < sig2 and lattice_ok) else INAPPLICABLE)
    if target is not word:
        cert.add("regular_equivalent", target.text)
    cert.add("a", a).add("v", v).add("r", r)
    cert.add("sigma", target.sigma if v % 2 == 0 else target.sigma_float)
    cert.add("bound", bound, "upper bound on the difference-scheme norm of U^2")
    cert.add("sigma_U2", sig2)
    cert.add("strict", bound < sig2)
    cert.add("lattice_scale_U2", scale2)
    cert.add("lattice_check", lattice_ok)
    cert.provenance.append("contractive second-difference scheme implies C1 on regular meshes")
    cert.provenance.append("base norms: A 1, R 1/2, V 1/2, AR 3/8")
    return cert
