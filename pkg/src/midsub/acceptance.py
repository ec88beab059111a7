"""Reproduction suite: every numbered check with its tolerance and time budget.

Each check returns a :class:`Result`; :func:`run_all` runs them in order and
:func:`tap` renders TAP-style lines for the command line.
"""

from __future__ import annotations

import math
import random
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction as F

import numpy as np

from .certificate import C0, C1_EXTRAORDINARY, INAPPLICABLE
from .characteristic import (
    Cone,
    b_equals_a2_residual,
    certify_extraordinary,
    certify_gcc,
    characteristic_mesh,
    cone_contains,
    nabla2,
    sector_cone,
    segment_match_error,
    vrvr_probe,
)
from .mesh import cube, square_grid
from .operators import BParams, apply_A, apply_B, enumerate_words, parse_word, subdivide
from .regular import compose_diff2_bound, diff2_scheme, sigma_squared, verify_eq1
from .ringnet import build_grid_mesh, is_symmetric, subdivide_net, symmetric_net
from .spectral import (
    _even_word,
    _lambda_pi,
    block_spectral_radii,
    build_subdivision_matrix,
    check_c0,
    frequency_decompose,
    lambda_phi,
    natural_kind,
    spectral_bounds,
    spectrum_report,
)

SEED = 20240601
TRIALS = 500

V2_SEGMENT = {
    (1, 1): 1 + 1j * math.sqrt(3), (2, 1): 3 + 1j * math.sqrt(3), (3, 1): 5 + 1j * math.sqrt(3),
    (1, 2): 0 + 2j * math.sqrt(3), (2, 2): 2.5 + 2.5j * math.sqrt(3), (3, 2): 4.75 + 2.75j * math.sqrt(3),
    (1, 3): -1 + 3j * math.sqrt(3), (2, 3): 1.75 + 3.75j * math.sqrt(3), (3, 3): 4 + 4j * math.sqrt(3),
}

EXPECTED_NORMS = {"A": F(1), "R": F(1, 2)}
ROW_BOUNDS = {"V": F(1, 2), "AR": F(3, 8)}
AR_ROWS = (F(4, 16), F(6, 16), F(6, 16))

C0_WORDS = ("VV", "VAV", "VRV", "VRVR^2", "AAR", "AAAR")
C0_VALENCES = (3, 5, 6, 7, 8)
SUBDOMINANT_WORDS = ("VV", "VAV", "VAAV", "AAR", "AAAR")
SUBDOMINANT_VALENCES = (5, 6, 7, 9)


@dataclass
class Result:
    number: int
    name: str
    passed: bool
    seconds: float
    budget: float | None
    details: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def within_budget(self) -> bool:
        return self.budget is None or self.seconds < self.budget

    @property
    def ok(self) -> bool:
        return self.passed and self.within_budget

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        budget = f" (budget {self.budget:g} s)" if self.budget else ""
        text = f"[{status}] {self.number:2d} {self.name}: {self.seconds:.2f} s{budget}"
        if self.failures:
            text += " -- " + "; ".join(str(f) for f in self.failures[:3])
        return text


def _timed(number: int, name: str, budget: float | None):
    def deco(fn):
        def run() -> Result:
            t = time.perf_counter()
            failures, details = fn()
            dt = time.perf_counter() - t
            return Result(number, name, not failures, dt, budget, details, failures)

        run.number = number
        run.check_name = name
        return run

    return deco


# -- 1 ------------------------------------------------------------------------

@_timed(1, "difference-scheme norms", 1.0)
def criterion_1():

    fails = []
    norms = {op: diff2_scheme(op).norm for op in ("A", "R", "V", "AR")}
    for op, want in EXPECTED_NORMS.items():
        if norms[op] != want:
            fails.append(f"|{op}''| = {norms[op]}, expected {want}")
    rows = {op: diff2_scheme(op).row_sums for op in ROW_BOUNDS}
    for op, bound in ROW_BOUNDS.items():
        if max(rows[op]) > bound:
            fails.append(f"{op} row sum {max(rows[op])} > {bound}")
    ar_rows = rows["AR"]
    have = Counter(ar_rows)
    if any(have[k] < n for k, n in Counter(AR_ROWS).items()):
        fails.append("AR row sums miss " + ", ".join(str(x) for x in AR_ROWS))
    return fails, {"norms": {k: str(v) for k, v in norms.items()},
                   "AR_row_sums": sorted(str(x) for x in set(ar_rows))}


# -- 2 ------------------------------------------------------------------------

@_timed(2, "regular C1 for all words up to length 6", 10.0)
def criterion_2():

    fails = []
    count = 0
    for w in enumerate_words(6):
        count += 1
        b, s = compose_diff2_bound(w), sigma_squared(w)
        if not b < s:
            fails.append(f"{w.text}: bound {b} >= {s}")
    resid = {op: verify_eq1(op, trials=100, seed=SEED) for op in ("A", "R", "V", "AR")}
    for op, r in resid.items():
        if r > 1e-10:
            fails.append(f"difference identity residual {r:.3g} for {op}")
    return fails, {"words": count, "residuals": resid}


# -- 3 ------------------------------------------------------------------------

def sample_even_words(count: int, max_len: int = 5, seed: int = SEED) -> list[str]:

    pool = [w.text for w in enumerate_words(max_len) if w.v % 2 == 0]
    rng = random.Random(seed)
    return sorted(rng.sample(pool, count), key=lambda s: (len(s), s))


def subdominant_modulus(word: str, m: int) -> float:
    """Largest eigenvalue modulus of ``S`` after removing the eigenvalue 1."""

    ev = frequency_decompose(build_subdivision_matrix(word, m)).spectrum()
    k = int(np.argmin(np.abs(ev - 1.0)))
    return float(np.abs(np.delete(ev, k)).max())


@_timed(3, "scaling law at valence 4 and lambda_{pi/2} at valence 8", 60.0)
def criterion_3():

    fails = []
    words = sample_even_words(25, 4)
    worst = 0.0
    for w in words:
        sig = parse_word(w).sigma_float
        err = abs(subdominant_modulus(w, 4) - sig)
        worst = max(worst, err)
        if err > 1e-8:
            fails.append(f"{w}: subdominant differs from sigma by {err:.3g}")
    worst8 = 0.0
    for w in words[:10]:
        sig = parse_word(w).sigma_float
        err = abs(lambda_phi(w, 8, 2) - sig)
        worst8 = max(worst8, err)
        if err > 1e-8:
            fails.append(f"{w}: lambda_pi/2 differs from sigma by {err:.3g}")
    return fails, {"words": words, "max_error_m4": worst, "max_error_m8": worst8}


# -- 4 and 6 ------------------------------------------------------------------

@_timed(4, "C0 on the word/valence grid", 120.0)
def criterion_4():

    fails = []
    powers = {}
    for w in C0_WORDS:
        for m in C0_VALENCES:
            c = check_c0(w, m)
            powers[f"{w}@{m}"] = c["positive_column_power"]
            if c.verdict != C0 or c["row_sum_error"] > 1e-14:
                fails.append(f"{w} m={m}: {c.verdict}")
    return fails, {"positive_column_power": powers}


@_timed(6, "spectral radii of the ring blocks", None)
def criterion_6():

    fails = []
    for w in C0_WORDS:
        word = _even_word(parse_word(w))
        bB, bA = spectral_bounds(word)
        for m in C0_VALENCES:
            rB, rA = block_spectral_radii(build_subdivision_matrix(word, m))
            if rB > bB + 1e-12:
                fails.append(f"{w} m={m}: rho_B {rB:.6g} > {bB:.6g}")
            if word.v > 0 and rA > 1e-12:
                fails.append(f"{w} m={m}: rho_A {rA:.3g} != 0")
            if word.v == 0 and rA > bA + 1e-12:
                fails.append(f"{w} m={m}: rho_A {rA:.6g} > {bA:.6g}")
    return fails, {}


# -- 5 ------------------------------------------------------------------------

@_timed(5, "valence-3 eigenvalues of VRV, VRVR and VV", 30.0)
def criterion_5():

    fails = []

    def near(name, x, y, tol=1e-9):
        if abs(x - y) > tol:
            fails.append(f"{name} = {x:.12g}, expected {y:.12g}")

    a = spectrum_report("VRV", 3)
    near("VRV lambda", a.lambda_1, 1 / 8)
    near("VRV |mu0|", abs(a.mu0), 0.0)
    near("VRV rho_B", a.rho_B, 0.0)
    near("VRV rho_A", a.rho_A, 0.0)
    b = spectrum_report("VRVR", 3)
    near("VRVR lambda", b.lambda_1, 1 / 16)
    c = spectrum_report("VV", 3)
    near("VV lambda", c.lambda_1, 1 / 4)
    near("VV |mu0|", abs(c.mu0), 1 / 4)
    near("VV rho_B", c.rho_B, 1 / 4)
    return fails, {"VRV": a.lambda_1, "VRVR": b.lambda_1, "VV": [c.lambda_1, abs(c.mu0), c.rho_B]}


# -- 7 ------------------------------------------------------------------------

def angle_profile(word: str, m: int = 12) -> dict:
    """``lambda_phi`` for ``phi = 2 pi f / m``, ``f = 1 .. m/2 - 1``, then ``lambda_pi``.

    Keys are the angles as strings ``"f/m*2pi"`` and ``"pi"``.
    """

    out = {f"2pi*{f}/{m}": lambda_phi(word, m, f) for f in range(1, m // 2)}
    out["pi"] = _lambda_pi(word, natural_kind(word))
    return out


@_timed(7, "subdominance, multiplicity two and angle monotonicity", None)
def criterion_7():

    fails = []
    details = {}
    for w in SUBDOMINANT_WORDS:
        for m in SUBDOMINANT_VALENCES:
            r = spectrum_report(w, m)
            if not r.subdominant():
                fails.append(f"{w} m={m}: not subdominant")
            if tuple(r.multiplicity) != (2, 2):
                fails.append(f"{w} m={m}: multiplicity {r.multiplicity}")
        lams = angle_profile(w)
        vals = list(lams.values())
        for (a, la), (t, lt) in zip(list(lams.items()), list(lams.items())[1:]):
            if not la - lt > 1e-9:
                fails.append(f"{w}: lambda({a}) - lambda({t}) = {la - lt:.3g}")
        details[w] = vals
    return fails, details


# -- 8 ------------------------------------------------------------------------

@_timed(8, "VV at valence 3: characteristic segment, cone and verdict", 10.0)
def criterion_8():

    fails = []
    cm = characteristic_mesh("VV", 3)
    err = segment_match_error(cm, V2_SEGMENT)
    if err > 1e-6:
        fails.append(f"segment relative error {err:.3g}")
    cone = Cone(math.pi / 2, 2 * math.pi / 3)
    edges = {k: v for k, v in cm.nabla2().items() if max(k) <= 3}
    chk = cone_contains(cone, edges)
    if not chk.ok:
        fails.append("edges outside C(pi/2, 2pi/3): "
                     + ", ".join(f"{x.label}:{x.reason}" for x in chk.violations))
    cert = certify_extraordinary("VV", 3)
    if cert.verdict != C1_EXTRAORDINARY:
        fails.append(f"verdict {cert.verdict}")
    return fails, {"method": cm.method, "segment_error": err, "edges": len(edges),
                   "verdict": cert.verdict, "chains": cert.get("chains")}


# -- 9 ------------------------------------------------------------------------

@_timed(9, "VRVR probe angle and inapplicability witness", None)
def criterion_9():

    fails = []
    phis = np.linspace(0.05, 1.5, 20)
    worst = 0.0
    for phi in phis:
        got = vrvr_probe(float(phi))
        want = math.pi - math.atan(16 * math.tan(phi))
        worst = max(worst, abs(got - want))
    if worst > 1e-9:
        fails.append(f"probe angle off by up to {worst:.3g} rad")
    cert = certify_extraordinary("VRVR", 5)
    if cert.verdict != INAPPLICABLE:
        fails.append(f"verdict {cert.verdict}")
    if not cert.get("cone_witness"):
        fails.append("no cone-violation witness")
    return fails, {"max_probe_error": worst, "verdict": cert.verdict}


# -- 10 -----------------------------------------------------------------------

def b_vs_a2_on_grid(n: int = 12, seed: int = SEED) -> float:
    """``B(1/4, 1/2)`` against ``A^2`` on an ``n x n`` grid with random heights."""

    g = square_grid(n, n, dim=3)
    rng = np.random.default_rng(seed)
    pos = g.positions.copy()
    pos[:, 2] = rng.standard_normal(len(pos))
    g = g.with_positions(pos)
    b = apply_B(g, F(1, 4), F(1, 2))
    a = apply_A(apply_A(g))
    key = {(round(x, 9), round(y, 9)): z for x, y, z in a.positions}
    worst = 0.0
    hits = 0
    for x, y, z in b.positions:
        k = (round(x, 9), round(y, 9))
        if k in key:
            hits += 1
            worst = max(worst, abs(z - key[k]))
    if hits == 0:
        return math.inf
    return worst


@_timed(10, "generalized Catmull-Clark", None)
def criterion_10():

    fails = []
    g = b_vs_a2_on_grid()
    if g > 1e-12:
        fails.append(f"B(1/4,1/2) vs A^2 on the grid: {g:.3g}")
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(5):
        m = int(rng.choice([3, 5, 6, 7]))
        a = F(float(rng.uniform(0.0, 0.9))).limit_denominator(1000)
        b = F(float(rng.uniform(0.0, 0.95 - float(a)))).limit_denominator(1000)
        if a + b <= 0:
            b = F(1, 10)
        worst = max(worst, b_equals_a2_residual(BParams(table=((m, a, b),)), m))
    if worst > 1e-12:
        fails.append(f"B N vs A^2 N on symmetric nets: {worst:.3g}")
    lams = {}
    for m in (3, 5, 7):
        c = certify_gcc("B(1/4,1/2)R", m)
        lams[m] = c["lambda"]
        if abs(c["mu0"] - 0.25) > 1e-9 or not c["lambda"] > c["mu0"]:
            fails.append(f"m={m}: lambda {c['lambda']:.6g}, |mu0| {c['mu0']:.6g}")
        if c.verdict != C1_EXTRAORDINARY:
            fails.append(f"m={m}: verdict {c.verdict}")
    return fails, {"grid": g, "symmetric": worst, "lambda": lams}


# -- 11 -----------------------------------------------------------------------

def _warp(z: complex, rng_params) -> complex:
    """Deformation of the quadrant commuting with its diagonal mirror."""
    e1, e2, e3 = rng_params
    r2 = abs(z) ** 2
    if r2 == 0:
        return z
    q = z ** 4 / r2 ** 2
    scale = 1 + e1 * math.sin(0.3 * math.sqrt(r2)) + e2 * q.real
    return z * scale * np.exp(1j * e3 * q.imag * math.exp(-0.1 * r2))


def random_symmetric_net(m: int, kind: str, rng, depth: int = 5, amplitude: float = 0.08):
    """Symmetric net from a warped quadrant grid mapped by ``z**(4/m)``."""

    params = tuple(float(x) for x in rng.uniform(-amplitude, amplitude, 3))
    off = 0.0 if kind == "primal" else 0.5

    def seg(i, j):
        z = _warp(complex(i - off, j - off), params)
        return abs(z) ** (4 / m) * np.exp(1j * np.angle(z) * 4 / m)

    return symmetric_net(m, depth, kind, seg)


def _cone_window(net, word_len: int) -> int:
    return 3 if word_len > 2 else 4


def check_cone_preservation(rng, m: int, op: str):

    cone = sector_cone(m, pointed=True)
    for _ in range(50):
        kind = "primal" if rng.random() < 0.5 else "dual"
        net = random_symmetric_net(m, kind, rng)
        if cone_contains(cone, nabla2(net, 4)).ok:
            break
    else:
        return None
    out = subdivide_net(net, op)
    res = cone_contains(cone, nabla2(out, _cone_window(out, len(op))))
    return res


def property_trials(trials: int = TRIALS, seed: int = SEED) -> tuple[list, dict]:
    """Affine invariance, symmetry preservation, orientation parity and
    cone preservation over randomized inputs.

    Trials cycle through the four properties. Orientation parity checks that
    a regular grid comes out with diagonal edges exactly when ``v`` is odd,
    and that the tracked center is a vertex or face as the factor rules
    predict. Cone trials draw symmetric nets with ``nabla2`` in the pointed
    sector cone and check that ``A``, ``R``, ``VV``, ``VAV`` or ``VAAV``
    keeps it there.
    """

    rng = np.random.default_rng(seed)
    fails = []
    counts = Counter()
    kinds = ("affine", "symmetry", "parity", "cone")
    for t in range(trials):
        what = kinds[t % 4]
        counts[what] += 1
        if what == "affine":
            base = cube() if rng.random() < 0.5 else square_grid(6, 6, dim=3)
            pos = base.positions + 0.1 * rng.standard_normal(base.positions.shape)
            base = base.with_positions(pos)
            word = _random_word(rng, 3)
            A = rng.standard_normal((3, 3)) + 2 * np.eye(3)
            b = rng.standard_normal(3)
            lhs = subdivide(base.with_positions(pos @ A.T + b), word).mesh.positions
            rhs = subdivide(base, word).mesh.positions @ A.T + b
            err = float(np.abs(lhs - rhs).max())
            if err > 1e-9:
                fails.append(f"affine {word}: {err:.3g}")
        elif what == "symmetry":
            m = int(rng.choice([3, 5, 6, 7]))
            kind = "primal" if rng.random() < 0.5 else "dual"
            net = random_symmetric_net(m, kind, rng, depth=4, amplitude=0.2)
            word = _random_word(rng, 3)
            out = subdivide_net(net, word)
            if not is_symmetric(out):
                fails.append(f"symmetry {word} m={m} {kind}")
        elif what == "parity":
            m = int(rng.choice([3, 5, 6, 7]))
            word = _random_word(rng, 4)
            grid = build_grid_mesh(m, 1, 4, "primal")
            res = subdivide(grid.mesh, word, center=("v", grid.center))
            kind = "primal"
            for f in parse_word(word).application_order():
                kind = _KIND_FOLD[f.symbol](kind)
            if res.rounds[-1]["kind"] != kind:
                fails.append(f"parity {word} m={m}: {res.rounds[-1]['kind']} != {kind}")
            lattice = "diagonal" if parse_word(word).v % 2 else "axis"
            got = lattice_orientation(subdivide(square_grid(8, 8), word).mesh)
            if got != lattice:
                fails.append(f"lattice parity {word}: {got} != {lattice}")
        else:
            m = int(rng.choice([3, 5, 6, 7]))
            op = str(rng.choice(["A", "R", "VV", "VAV", "VAAV"]))
            res = check_cone_preservation(rng, m, op)
            if res is None:
                fails.append(f"cone: no admissible net for m={m}")
            elif not res.ok:
                fails.append(f"cone {op} m={m}: {res.violations[0]}")
    return fails, dict(counts)


def lattice_orientation(mesh) -> str:
    """``axis``, ``diagonal`` or ``mixed`` from the edge directions of a planar mesh."""
    kinds = set()
    for f in mesh.faces:
        for u, v in zip(f, f[1:] + f[:1]):
            d = np.abs(mesh.positions[v, :2] - mesh.positions[u, :2])
            kinds.add("axis" if d.min() < 1e-12 else "diagonal")
    return kinds.pop() if len(kinds) == 1 else "mixed"


_KIND_FOLD = {
    "R": lambda k: "primal",
    "V": lambda k: "dual",
    "A": lambda k: "dual" if k == "primal" else "primal",
}


def _random_word(rng, max_len: int) -> str:

    while True:
        n = int(rng.integers(1, max_len + 1))
        text = "".join(rng.choice(list("AVR"), n))
        if parse_word(text).is_valid():
            return text


@_timed(11, "property suite", None)
def criterion_11():
    fails, counts = property_trials()
    return fails, {"trials": TRIALS, "seed": SEED, "by_property": counts}


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11)


def run_all(select=None) -> list[Result]:
    out = []
    for c in CRITERIA:
        if select and c.number not in select:
            continue
        out.append(c())
    return out


def tap(results: list[Result]) -> str:
    lines = [f"1..{len(results)}"]
    for k, r in enumerate(results, 1):
        status = "ok" if r.ok else "not ok"
        lines.append(f"{status} {k} - criterion {r.number}: {r.name} ({r.seconds:.2f} s)")
        for f in r.failures[:5]:
            lines.append(f"  # {f}")
        if not r.within_budget:
            lines.append(f"  # over budget: {r.seconds:.2f} s >= {r.budget:g} s")
    return "\n".join(lines) + "\n"
