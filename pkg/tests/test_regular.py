from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from midsub.certificate import C1_REGULAR
from midsub.errors import InvalidWord, NotABaseCase
from midsub.operators import enumerate_words, parse_word
from midsub.regular import (
    certify_regular,
    compose_diff2_bound,
    diff2_scheme,
    regular_stencil,
    sigma_squared,
    verify_eq1,
)


def test_ar_masks_are_tensor_chaikin():
    chaikin = (F(3, 4), F(1, 4))
    want = sorted(a * b for a in chaikin for b in chaikin)
    for mask in regular_stencil("AR").masks():
        assert sorted(mask) == want


def test_a_mask_is_face_centroid():
    assert regular_stencil("A").masks() == [(F(1, 4),) * 4]


def test_vv_scale():
    assert regular_stencil("VV").scale == pytest.approx(0.5)


def test_base_norms():
    assert diff2_scheme("A").norm == 1
    assert diff2_scheme("R").norm == F(1, 2)
    assert diff2_scheme("V").norm <= F(1, 2)
    assert diff2_scheme("AR").norm <= F(3, 8)


def test_ar_row_sums():
    rows = diff2_scheme("AR").row_sums
    for x in (F(4, 16), F(6, 16)):
        assert x in rows
    assert rows.count(F(6, 16)) >= 2


def test_unsupported_base_case():
    with pytest.raises(NotABaseCase):
        diff2_scheme("VAV")


@pytest.mark.parametrize("word,bound", [("VAV", F(1, 16)), ("AAR", F(3, 16)), ("V", F(1, 4))])
def test_composed_bounds(word, bound):
    assert compose_diff2_bound(word) == bound


@pytest.mark.parametrize("op", ["A", "R", "V", "AR"])
def test_difference_identity_random(op):
    assert verify_eq1(op, trials=20, seed=3) <= 1e-10


@pytest.mark.parametrize("op", ["A", "R", "V", "AR"])
def test_difference_identity_constant_and_linear(op):
    assert verify_eq1(op, mesh=lambda i, j: 1.0) <= 1e-12
    assert verify_eq1(op, mesh=lambda i, j: 2 * i + 3 * j) <= 1e-12


def test_certify_vrvr_uses_squared_word():
    c = certify_regular("VRVR")
    assert c.verdict == C1_REGULAR
    assert c["bound"] < c["sigma_U2"]
    assert c["bound"] == F(1, 2 ** 8)


def test_certify_v():
    c = certify_regular("V")
    assert c.verdict == C1_REGULAR
    assert (c["bound"], c["sigma_U2"]) == (F(1, 4), F(1, 2))


def test_certify_invalid():
    with pytest.raises(InvalidWord):
        certify_regular("R")


def test_all_short_words_certify():
    for w in enumerate_words(4):
        assert compose_diff2_bound(w) < sigma_squared(w)


@given(st.sampled_from([w.text for w in enumerate_words(3)]))
def test_lattice_scale_law(text):
    w = parse_word(text)
    assert regular_stencil(w.squared()).scale == pytest.approx(w.sigma_float ** 2, rel=1e-12)
