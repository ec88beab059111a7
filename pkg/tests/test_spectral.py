import numpy as np
import pytest

from midsub.certificate import C0, NOT_CERTIFIABLE
from midsub.operators import parse_word
from midsub.spectral import (
    block_spectral_radii,
    build_subdivision_matrix,
    check_c0,
    classify_corners,
    compute_core,
    frequency_decompose,
    generalized_eigenvector_rank,
    lambda_phi,
    spectral_bounds,
    spectrum_report,
)


@pytest.fixture(scope="module")
def vav5():
    return build_subdivision_matrix("VAV", 5)


def test_matrix_is_stochastic(vav5):
    assert vav5.min_entry() >= 0
    assert vav5.row_sum_error() <= 1e-14


def test_block_triangular_and_rotation_invariant(vav5):
    assert vav5.is_block_triangular()
    assert all(v == 0 for _, _, v in vav5.forbidden_blocks())
    assert vav5.commutation_residual() <= 1e-12


def test_frequency_blocks_cover_spectrum(vav5):
    fb = frequency_decompose(vav5)
    dense = np.linalg.eigvals(vav5.S)
    blocks = fb.spectrum()
    assert len(blocks) == len(dense)
    for z in dense:
        assert np.abs(blocks - z).min() <= 1e-9


def test_conjugate_frequencies(vav5):
    fb = frequency_decompose(vav5)
    for f in range(1, 5):
        a = np.sort_complex(np.linalg.eigvals(fb[f]))
        b = np.sort_complex(np.conj(np.linalg.eigvals(fb[5 - f])))
        assert np.allclose(a, b, atol=1e-9)


def test_frequency_zero_dominant_is_one(vav5):
    fb = frequency_decompose(vav5)
    ev = np.linalg.eigvals(fb[0])
    assert np.abs(ev).max() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("word", ["AR", "VV", "VAV", "AAVVR"])
def test_valence_four_subdominant_is_sigma(word):
    from midsub.acceptance import subdominant_modulus

    assert subdominant_modulus(word, 4) == pytest.approx(parse_word(word).sigma_float, abs=1e-9)


@pytest.mark.parametrize("word", ["VAV", "AAR", "VRVR"])
def test_quarter_turn_eigenvalue_is_sigma(word):
    w = parse_word(word).even()
    assert lambda_phi(word, 8, 2) == pytest.approx(w.sigma_float, abs=1e-9)


def test_valence_three_examples():
    vv = spectrum_report("VV", 3)
    assert vv.lambda_1 == pytest.approx(0.25, abs=1e-9)
    assert abs(vv.mu0) == pytest.approx(0.25, abs=1e-9)
    assert vv.rho_B == pytest.approx(0.25, abs=1e-9)
    vrv = spectrum_report("VRV", 3)
    assert vrv.lambda_1 == pytest.approx(1 / 8, abs=1e-9)
    assert max(abs(vrv.mu0), vrv.rho_B, vrv.rho_A) <= 1e-9
    assert spectrum_report("VRVR", 3).lambda_1 == pytest.approx(1 / 16, abs=1e-9)


@pytest.mark.parametrize("word", ["AR", "AAR", "AAAR"])
def test_midpoint_lambda_pi_and_mu0(word):
    r = spectrum_report(word, 5)
    assert r.lambda_pi == pytest.approx(0.25, abs=1e-9)
    assert abs(r.mu0) == pytest.approx(0.25, abs=1e-9)
    assert r.rho_B <= 0.25 + 1e-12 and r.rho_A <= 0.25 + 1e-12


@pytest.mark.parametrize("word", ["VAV", "VRV", "AAR"])
@pytest.mark.parametrize("m", [3, 5])
def test_block_radius_bounds(word, m):
    w = parse_word(word).even()
    rb, ra = block_spectral_radii(build_subdivision_matrix(w, m))
    bb, ba = spectral_bounds(w)
    assert rb <= bb + 1e-12
    assert ra <= ba + 1e-12
    if w.v:
        assert ra <= 1e-12


def test_power_iteration_matches_dense(vav5):
    fb = frequency_decompose(vav5)
    r = spectrum_report("VAV", 5)
    for f in range(5):
        ev = np.linalg.eigvals(fb[f])
        top = ev[np.argmax(np.abs(ev))]
        assert abs(abs(r.lambda_f(f)) - abs(top)) <= 1e-8


def test_subdominant_multiplicity_two():
    r = spectrum_report("AAR", 5)
    assert r.subdominant()
    assert tuple(r.multiplicity) == (2, 2)


def test_generalized_rank_diagonal():
    assert generalized_eigenvector_rank(np.diag([1.0, 2.0, 2.0, 3.0]), 2.0) == (2, 2)
    J = np.array([[2.0, 1.0], [0.0, 2.0]])
    assert generalized_eigenvector_rank(J, 2.0) == (1, 2)


def test_vv_valence_three_has_two_chains():
    mat = build_subdivision_matrix("VV", 3)
    fb = frequency_decompose(mat)
    g1, a1 = generalized_eigenvector_rank(fb[1], 0.25)
    g2, a2 = generalized_eigenvector_rank(fb[2], 0.25)
    assert (a1 - g1) + (a2 - g2) == 2


@pytest.mark.parametrize("word", ["VV", "VAV", "AAR"])
def test_c0_certificate(word):
    c = check_c0(word, 5)
    assert c.verdict == C0
    assert c["positive_column_power"] is not None
    assert c["eigenvalue_one_multiplicity"] == 1


def test_c0_negative_control():
    assert check_c0("identity", 5, matrix=np.eye(6)).verdict == NOT_CERTIFIABLE


def test_midpoint_core_is_one_ringnet():
    core = compute_core("AAR", 5)
    assert set(core.core) == {(0, 0, 0)} | {(1, a, l) for a in (0, 1) for l in range(5)}


def test_center_is_in_core():
    for w in ("VAV", "AAR", "RVVR"):
        core = compute_core(w, 5)
        kind = core.kind
        if kind == "primal":
            assert (0, 0, 0) in core.core
        else:
            assert (1, 1, 0) in core.core


@pytest.mark.parametrize("word,m", [("VAV", 5), ("RVVR", 5), ("AVAV", 5), ("AAR", 4)])
def test_convex_corners_repeat_per_segment(word, m):
    corners, others = classify_corners(compute_core(word, m))
    per_seg = {l: sum(1 for c in corners if c[2] == l) for l in range(m)}
    assert len(set(per_seg.values())) == 1 and per_seg[0] >= 1
    assert not set(corners) & set(others)


def test_regular_core_has_four_corners():
    corners, _ = classify_corners(compute_core("AAR", 4))
    assert len(corners) == 4
