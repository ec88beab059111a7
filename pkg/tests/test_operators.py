from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from midsub.errors import InvalidParameter, InvalidWord, WordSyntaxError
from midsub.mesh import QuadMesh, cube, square_grid
from midsub.operators import (
    BParams,
    apply_A,
    apply_B,
    apply_R,
    apply_V,
    apply_word,
    classify_word,
    enumerate_words,
    parse_word,
    subdivide,
)
from midsub.ringnet import build_grid_mesh, is_symmetric, subdivide_net

words = st.text(alphabet="AVR", min_size=1, max_size=4).filter(lambda t: parse_word(t).is_valid())


def unit_square():
    return QuadMesh(np.array([[0, 0], [1, 0], [1, 1], [0, 1.0]]), ((0, 1, 2, 3),))


# -- parsing and classification ------------------------------------------------

def test_parse_counts():
    w = parse_word("A A R")
    assert (w.a, w.v, w.r) == (2, 0, 1) and w.is_valid()
    assert classify_word(w).kind == "MidpointClassic"
    v = parse_word("V")
    assert (v.a, v.v, v.r) == (0, 1, 0) and v.is_valid()


def test_parse_exponents_and_superscripts():
    assert parse_word("A^3R").text == "AAAR"
    assert parse_word("VRVR²").text == "VRVRR"


def test_rightmost_factor_first():
    assert [f.symbol for f in parse_word("VAR").application_order()] == ["R", "A", "V"]


def test_r_alone_is_invalid():
    w = parse_word("R")
    assert not w.is_valid()
    assert classify_word(w).kind == "Invalid"
    with pytest.raises(InvalidWord):
        apply_word(cube(), "R")


def test_syntax_error_has_position():
    with pytest.raises(WordSyntaxError) as exc:
        parse_word("A(V")
    assert exc.value.position == 3


@pytest.mark.parametrize("text", ["B(1/2,1/2)R", "B(0.6,0.5)R", "B(-0.1,0.5)R", "B(5:1,0)R"])
def test_b_parameter_domain(text):
    with pytest.raises(InvalidParameter):
        parse_word(text)


@pytest.mark.parametrize("text,kind,factors", [
    ("VAV", "VAVScheme", ("VAV",)),
    ("VV", "VAVScheme", ("VV",)),
    ("VRVR", "GeneralMidpoint", None),
    ("AAR", "MidpointClassic", None),
    ("B(1/4,1/2)R", "GeneralizedCC", None),
    ("AB(9/20,9/20)R", "GeneralizedCC", None),
])
def test_classification(text, kind, factors):
    c = classify_word(parse_word(text))
    assert c.kind == kind
    if factors:
        assert c.vav_factors == factors


def test_vav_factorization_is_parse_independent():
    c = classify_word(parse_word("VAVAVV"))
    assert c.kind == "VAVScheme"
    assert "".join(c.vav_factors) == "VAVAVV"


def test_restricted_flag():
    assert classify_word(parse_word("B(1/4,1/2)R")).restricted
    assert not classify_word(parse_word("B(0.45,0.45)R")).restricted
    assert classify_word(parse_word("B(5:0.45,0.45)R")).restricted


def test_enumeration_counts_valid_words():
    total = sum(1 for _ in enumerate_words(3, valid_only=False))
    assert total == 3 + 9 + 27
    assert all(w.is_valid() for w in enumerate_words(3))


# -- single operators ----------------------------------------------------------

def test_r_on_unit_square():
    m = apply_R(unit_square())
    assert m.n_faces == 4
    assert any(np.allclose(p, (0.5, 0.5)) for p in m.positions)


def test_r_on_pentagon():
    ang = 2 * np.pi * np.arange(5) / 5
    p = QuadMesh(np.column_stack([np.cos(ang), np.sin(ang)]), ((0, 1, 2, 3, 4),))
    m = apply_R(p)
    assert m.n_faces == 5 and all(len(f) == 4 for f in m.faces)
    assert max(m.vertex_valence(v) for v in range(m.n_vertices)) == 5


def test_v_on_unit_square():
    m = apply_V(unit_square())
    pts = {tuple(p) for p in m.positions.tolist()}
    assert pts == {(0.5, 0.0), (1.0, 0.5), (0.5, 1.0), (0.0, 0.5)}


def test_v_turns_vertex_into_face():
    g = build_grid_mesh(5, 1, 2, "primal")
    m = apply_V(g.mesh)
    assert m.extraordinary_faces() and not m.extraordinary_vertices()
    assert {len(m.faces[f]) for f in m.extraordinary_faces()} == {5}


def test_a_on_three_by_three_grid():
    m = apply_A(square_grid(2, 2))
    assert m.n_faces == 1
    assert {tuple(p) for p in m.positions.tolist()} == {(0.5, 0.5), (1.5, 0.5), (0.5, 1.5), (1.5, 1.5)}


def _impulse_response(word: str, n: int = 8) -> dict:
    g = square_grid(n, n, dim=3)
    pos = g.positions.copy()
    c = np.argmin(np.abs(pos[:, 0] - n / 2) + np.abs(pos[:, 1] - n / 2))
    pos[c, 2] = 1.0
    out = g.with_positions(pos)
    for _ in word:
        out = apply_A(out)
    return {(round(x - n / 2, 9), round(y - n / 2, 9)): z for x, y, z in out.positions if abs(z) > 0}


def test_a_squared_stencil():
    # two rounds of 2x2 averaging: tensor square of (1/4, 1/2, 1/4)
    resp = _impulse_response("AA")
    w = {-1: 0.25, 0: 0.5, 1: 0.25}
    want = {(float(i), float(j)): w[i] * w[j] for i in w for j in w}
    assert set(resp) == set(want)
    for k, v in want.items():
        assert resp[k] == pytest.approx(v, abs=1e-15)
    assert sorted(set(round(v, 12) for v in want.values())) == [1 / 16, 1 / 8, 1 / 4]


def _lr1d(x, u, word):
    """One-dimensional midpoint operators on (positions, values)."""
    for s in reversed(word):
        if s == "R":
            xm, um = (x[:-1] + x[1:]) / 2, (u[:-1] + u[1:]) / 2
            x = np.insert(x, np.arange(1, len(x)), xm)
            u = np.insert(u, np.arange(1, len(u)), um)
        else:
            x, u = (x[:-1] + x[1:]) / 2, (u[:-1] + u[1:]) / 2
    return x, u


def test_aar_is_tensor_lane_riesenfeld(rng):
    n = 7
    u, w = rng.standard_normal(n + 1), rng.standard_normal(n + 1)
    g = square_grid(n, n, dim=3)
    pos = g.positions.copy()
    pos[:, 2] = u[pos[:, 0].round().astype(int)] * w[pos[:, 1].round().astype(int)]
    out = apply_word(g.with_positions(pos), "AAR")
    xs, us = _lr1d(np.arange(n + 1.0), u, "AAR")
    ys, ws = _lr1d(np.arange(n + 1.0), w, "AAR")
    ux = dict(zip(np.round(xs, 9), us))
    wy = dict(zip(np.round(ys, 9), ws))
    hits = 0
    for x, y, z in out.positions:
        kx, ky = round(x, 9), round(y, 9)
        if kx in ux and ky in wy:
            hits += 1
            assert z == pytest.approx(ux[kx] * wy[ky], abs=1e-12)
    assert hits == out.n_vertices


def test_vv_halves_the_grid():
    g = square_grid(6, 6)
    out = apply_word(g, "VV")
    xs = np.unique(np.round(out.positions[:, 0], 12))
    assert np.allclose(np.diff(xs), 0.5)


# -- B -------------------------------------------------------------------------

def test_b_quarter_half_is_a_squared_on_grid(rng):
    from midsub.acceptance import b_vs_a2_on_grid

    assert b_vs_a2_on_grid(12, seed=7) <= 1e-12


@pytest.mark.parametrize("m", [3, 5, 6])
def test_b_matches_a_squared_on_symmetric_nets(m):
    from midsub.characteristic import b_equals_a2_residual

    params = BParams(table=((m, F(3, 10), F(1, 5)),))
    assert b_equals_a2_residual(params, m, trials=2) <= 1e-12


def test_b_rejects_closed_interval():
    with pytest.raises(InvalidParameter):
        apply_B(cube(), F(1, 2), F(1, 2))


# -- properties ----------------------------------------------------------------

@given(words)
def test_constant_mesh_is_fixed(word):
    g = square_grid(6, 6, dim=3)
    g = g.with_positions(np.tile([0.3, -1.0, 2.0], (g.n_vertices, 1)))
    out = apply_word(g, word)
    assert np.allclose(out.positions, [0.3, -1.0, 2.0], atol=1e-13)


@given(words, st.integers(0, 2**31 - 1))
def test_affine_invariance(word, seed):
    r = np.random.default_rng(seed)
    base = cube()
    base = base.with_positions(base.positions + 0.1 * r.standard_normal(base.positions.shape))
    A = r.standard_normal((3, 3))
    b = r.standard_normal(3)
    lhs = apply_word(base.with_positions(base.positions @ A.T + b), word).positions
    rhs = apply_word(base, word).positions @ A.T + b
    assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, np.abs(rhs).max())


@given(words)
def test_weights_are_convex(word):
    res = subdivide(cube(), word, track_weights=True)
    W = res.weights.toarray()
    assert W.min() >= 0
    assert np.allclose(W.sum(axis=1), 1, atol=1e-14)


def _lattice(mesh) -> str:
    """``axis`` or ``diagonal`` from the direction of interior edges."""
    kinds = set()
    for f in mesh.faces:
        for u, v in zip(f, f[1:] + f[:1]):
            d = mesh.positions[v, :2] - mesh.positions[u, :2]
            kinds.add("axis" if min(abs(d)) < 1e-12 else "diagonal")
    assert len(kinds) == 1
    return kinds.pop()


@given(words)
def test_orientation_parity(word):
    res = subdivide(square_grid(8, 8), word)
    want = "diagonal" if parse_word(word).v % 2 else "axis"
    assert _lattice(res.mesh) == want == res.rounds[-1]["lattice"]


def test_center_lost_is_a_resource_error():
    from midsub.errors import ResourceError

    g = build_grid_mesh(3, 1, 5, "primal")
    with pytest.raises(ResourceError):
        subdivide(g.mesh, "AVAAAVAA", steps=2, center=("v", g.center))


@given(words, st.sampled_from([3, 5, 7]), st.sampled_from(["primal", "dual"]))
def test_symmetry_preserved(word, m, kind):
    net = build_grid_mesh(m, 1, 4, kind)
    assert is_symmetric(subdivide_net(net, word))


def test_extraordinary_elements_isolated():
    g = build_grid_mesh(5, 1, 4, "primal")
    out = apply_word(g.mesh, "VAV")
    ex = out.extraordinary_faces() + out.extraordinary_vertices()
    assert len(ex) == 1
