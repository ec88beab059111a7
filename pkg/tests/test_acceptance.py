"""The numbered reproduction checks, one test each, with a PASS/FAIL line per check."""

import pytest

from midsub import acceptance

KNOWN_FAILURES = {
    7: "lambda_phi of VV is 1/4 for every phi >= 2pi/3, so it is not strictly "
       "decreasing there; the same plateau gives lambda_{2pi/3}(VV) = 1/4 at valence 3",
    8: "the listed 3x3 segment is not in any generalized eigenspace of 1/4 and the computed "
       "characteristic net has a zero edge at (1, 1)",
    9: "the computed (VRVR)^2 edges all stay in the pointed sector cone; no edge at "
       "pi - arctan(16 tan phi) appears",
}


def _param(check):
    marks = [pytest.mark.slow] if check.number in (3, 4, 6, 9, 11) else []
    if check.number in KNOWN_FAILURES:
        marks.append(pytest.mark.xfail(strict=True, reason=KNOWN_FAILURES[check.number]))
    return pytest.param(check, id=f"criterion_{check.number:02d}", marks=marks)


@pytest.mark.parametrize("check", [_param(c) for c in acceptance.CRITERIA])
def test_criterion(check, capsys):
    result = check()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.ok, "; ".join(str(f) for f in result.failures) or "over time budget"


def test_valence_sweep_subdominance_part_passes():
    """The subdominance and multiplicity half of check 7 holds on its own."""
    from midsub.spectral import spectrum_report

    for w in acceptance.SUBDOMINANT_WORDS:
        for m in acceptance.SUBDOMINANT_VALENCES:
            r = spectrum_report(w, m)
            assert r.subdominant() and tuple(r.multiplicity) == (2, 2)


@pytest.mark.parametrize("word", ["VAV", "VAAV", "AAR", "AAAR"])
def test_angle_monotonicity_outside_the_plateau(word):
    vals = list(acceptance.angle_profile(word).values())
    assert all(a - b > 1e-9 for a, b in zip(vals, vals[1:]))


def test_vv_angle_profile_plateau():
    vals = acceptance.angle_profile("VV")
    plateau = [v for k, v in vals.items() if k in ("2pi*4/12", "2pi*5/12", "pi")]
    assert all(abs(v - 0.25) < 1e-9 for v in plateau)


def test_verdicts_of_the_worked_examples():
    """The verdict parts of checks 8 and 9 hold even though the numeric parts do not."""
    from midsub.certificate import C1_EXTRAORDINARY, INAPPLICABLE
    from midsub.characteristic import certify_extraordinary

    assert certify_extraordinary("VV", 3).verdict == C1_EXTRAORDINARY
    assert certify_extraordinary("VRVR", 5).verdict == INAPPLICABLE
