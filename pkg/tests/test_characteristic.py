import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from midsub.certificate import (
    C1_EXTRAORDINARY,
    C1_REGULAR,
    INAPPLICABLE,
    INVALID,
    NOT_CERTIFIABLE,
)
from midsub.characteristic import (
    Cone,
    _gauge,
    certify_extraordinary,
    certify_gcc,
    characteristic_mesh,
    cone_contains,
    nabla2,
    sector_cone,
    vrvr_probe,
)
from midsub.errors import InvalidParameter
from midsub.ringnet import build_grid_mesh, symmetric_net
from midsub.spectral import build_subdivision_matrix, frequency_decompose


@pytest.fixture(scope="module")
def aar5():
    return characteristic_mesh("AAR", 5)


def test_eigenvalue_matches_dense_block(aar5):
    fb = frequency_decompose(build_subdivision_matrix("AAR", 5))
    ev = np.linalg.eigvals(fb[1])
    assert aar5.eigenvalue == pytest.approx(float(np.abs(ev).max()), abs=1e-8)
    assert aar5.converged and aar5.method == "iteration"


def test_characteristic_mesh_is_symmetric(aar5):
    assert aar5.is_rotation_symmetric()
    assert aar5.is_reflection_symmetric()


def test_residual_small(aar5):
    assert aar5.residual <= 1e-10


@pytest.mark.parametrize("word,m", [("AAR", 5), ("VAV", 6), ("VV", 7)])
def test_segment_lies_in_sector(word, m):
    assert characteristic_mesh(word, m).in_sector()


def test_characteristic_mesh_export(aar5, tmp_path):
    mesh = aar5.to_mesh()
    assert mesh.positions.shape[1] == 3
    assert np.all(mesh.positions[:, 2] == 0)
    assert mesh.n_faces > 0


def test_gauge_undoes_rotation_reflection_and_scale(aar5):
    vals = aar5.values
    for t, s, flip in [(0.7, 2.5, False), (-2.0, 0.1, True), (math.pi, 1.0, False)]:
        g = cmath.exp(1j * t) * s
        moved = {k: (np.conj(v) if flip else v) * g for k, v in vals.items()}
        if flip:
            # a reflection also swaps the roles of i and j
            moved = {(j, i): np.conj(vals[(i, j)]) * g for (i, j) in vals if (j, i) in vals}
        back = _gauge(moved, aar5.kind, aar5.m)
        for k in back:
            assert back[k] == pytest.approx(vals[k], abs=1e-12)


def test_vv_valence_three_uses_chain_path():
    cm = characteristic_mesh("VV", 3)
    assert cm.method == "generalized-eigenvector"
    assert cm.eigenvalue == pytest.approx(0.25, abs=1e-12)


# -- cones ----------------------------------------------------------------------

def test_zero_vector_pointed_and_unpointed():
    cone = Cone(0.0, math.pi / 2)
    assert not cone_contains(cone, [0j, 1 + 1j], pointed=False).ok
    assert cone_contains(cone, [0j, 1 + 1j], pointed=True).ok


def test_cone_reports_outside_with_angle():
    res = cone_contains(Cone(math.pi / 2, 2 * math.pi / 3), {"e": cmath.exp(2.0j),
                                                              "f": cmath.exp(1.0j)})
    assert [w.label for w in res.violations] == ["f"]
    assert res.violations[0].angle == pytest.approx(1.0)


def test_boundary_vectors_are_listed():
    res = cone_contains(Cone(math.pi / 2, 2 * math.pi / 3), [1j])
    assert res.ok and len(res.boundary) == 1


def test_probe_edge_angle_outside_upper_bound():
    # the closed-form probe direction for phi = pi/4 leaves a cone whose upper edge is pi/2
    angle = math.pi - math.atan(16)
    assert angle == pytest.approx(1.6332, abs=1e-4)
    assert not cone_contains(Cone(2 * math.pi / 5, math.pi / 2), [cmath.exp(1j * angle)]).ok


@pytest.mark.parametrize("m", [3, 5, 6, 8])
@pytest.mark.parametrize("kind", ["primal", "dual"])
def test_grid_edges_in_pointed_sector(m, kind):
    g = build_grid_mesh(m, 1, 4, kind)
    assert cone_contains(sector_cone(m, pointed=True), nabla2(g)).ok


def test_constant_net_edges_are_zero():
    net = symmetric_net(5, 3, "dual", lambda i, j: 0.0)
    assert all(z == 0 for z in nabla2(net).values())


def test_nabla2_index_ranges():
    p = nabla2(build_grid_mesh(5, 1, 3, "primal"))
    d = nabla2(build_grid_mesh(5, 1, 3, "dual"))
    assert min(i for i, _ in p) == 0 and min(i for i, _ in d) == 1
    assert min(j for _, j in p) == 1 and min(j for _, j in d) == 1


@given(st.sampled_from([3, 5, 6, 7]), st.sampled_from(["A", "R", "VV", "VAV", "VAAV"]),
       st.integers(0, 2**31 - 1))
def test_cone_preservation(m, op, seed):
    from midsub.acceptance import check_cone_preservation

    res = check_cone_preservation(np.random.default_rng(seed), m, op)
    assert res is not None and res.ok


# -- probe ------------------------------------------------------------------------

@pytest.mark.parametrize("phi", [0.0, math.pi / 2, -0.3, 2.0])
def test_probe_domain(phi):
    with pytest.raises(InvalidParameter):
        vrvr_probe(phi)


def test_probe_returns_edge_angle():
    a = vrvr_probe(math.pi / 4)
    assert 0 < a <= math.pi


# -- certificates -------------------------------------------------------------------

def test_vav_valence_seven():
    c = certify_extraordinary("VAV", 7)
    assert c.verdict == C1_EXTRAORDINARY
    assert c["subdominant"] and tuple(c["multiplicity"]) == (2, 2)


def test_vv_valence_three():
    c = certify_extraordinary("VV", 3)
    assert c.verdict == C1_EXTRAORDINARY
    assert c["chains"] == 2


def test_vrvr_inapplicable():
    c = certify_extraordinary("VRVR", 5)
    assert c.verdict == INAPPLICABLE
    assert c.get("cone_witness") is not None


def test_odd_v_word_is_squared():
    c = certify_extraordinary("V", 5)
    assert c.verdict == C1_EXTRAORDINARY


def test_valence_four_goes_regular():
    assert certify_extraordinary("AAR", 4).verdict == C1_REGULAR


@pytest.mark.parametrize("word,m", [("R", 5), ("VAV", 2), ("A(", 5)])
def test_invalid_inputs(word, m):
    c = certify_extraordinary(word, m)
    assert c.verdict == INVALID and c.evidence


@pytest.mark.parametrize("m", [3, 5])
def test_gcc_restricted(m):
    c = certify_gcc("B(1/4,1/2)R", m)
    assert c.verdict == C1_EXTRAORDINARY
    assert c["mu0"] == pytest.approx(0.25, abs=1e-9)
    assert c["lambda"] > c["mu0"]


def test_gcc_per_valence_parameters_follow_inequality():
    c = certify_gcc("B(5:0.45,0.45)R", 5)
    want = C1_EXTRAORDINARY if c["lambda"] > c["mu0"] else NOT_CERTIFIABLE
    assert c.verdict == want


def test_gcc_unrestricted_reports_conditions():
    c = certify_gcc("B(0.45,0.45)R", 5)
    assert c.verdict == NOT_CERTIFIABLE
    assert c["unrestricted_conditions"]["(1) m>=5 and constant parameters"]


def test_certificate_json_is_deterministic():
    a = certify_extraordinary("VAV", 5).to_json(timestamp=False)
    b = certify_extraordinary("VAV", 5).to_json(timestamp=False)
    assert a == b
