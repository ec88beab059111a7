import json

import pytest

from midsub.cli import EXIT_INVALID, EXIT_NOT_CERTIFIED, EXIT_OK, main
from midsub.config import Config, parse_config
from midsub.errors import InvalidParameter
from midsub.mesh import cube, read_obj, square_grid, write_obj


@pytest.fixture
def cube_obj(tmp_path):
    p = tmp_path / "cube.obj"
    write_obj(cube(), p)
    return p


def test_subdivide_cube(cube_obj, tmp_path, capsys):
    out = tmp_path / "out.obj"
    assert main(["subdivide", "--in", str(cube_obj), "--word", "AAR", "--steps", "3",
                 "--out", str(out)]) == EXIT_OK
    mesh = read_obj(out)
    # Catmull-Clark counts on a closed quad mesh: V' = V + E + F, F' = 4F
    v, e, f = 8, 12, 6
    for _ in range(3):
        v, e, f = v + e + f, 2 * e + 4 * f, 4 * f
    assert (mesh.n_vertices, mesh.n_faces) == (v, f)
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3 and "primal" in lines[0]


def test_subdivide_invalid_word(cube_obj, tmp_path, capsys):
    code = main(["subdivide", "--in", str(cube_obj), "--word", "R", "--out", str(tmp_path / "x.obj")])
    assert code == EXIT_INVALID
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "InvalidWord"


def test_subdivide_non_manifold(tmp_path, capsys):
    p = tmp_path / "bad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nv 1 1 1\n"
                 "f 1 2 3\nf 2 1 4\nf 1 2 5\n")
    assert main(["subdivide", "--in", str(p), "--word", "V", "--out", str(tmp_path / "o.obj")]) \
        == EXIT_INVALID
    assert json.loads(capsys.readouterr().err)["error"] == "NonManifoldError"


def test_subdivide_grid_v_twice(tmp_path):
    p = tmp_path / "g.obj"
    write_obj(square_grid(6, 6, dim=3), p)
    out = tmp_path / "o.obj"
    assert main(["subdivide", "--in", str(p), "--word", "V", "--steps", "2", "--out", str(out)]) == 0
    import numpy as np

    xs = np.unique(np.round(read_obj(out).positions[:, 0], 9))
    assert np.allclose(np.diff(xs), 0.5)


@pytest.mark.parametrize("args,code,verdict", [
    (["certify", "regular", "--word", "AAR"], EXIT_OK, "C1-certified-regular"),
    (["certify", "extraordinary", "--word", "VAV", "--valence", "7"], EXIT_OK,
     "C1-certified-extraordinary"),
    (["certify", "extraordinary", "--word", "VRVR", "--valence", "5"], EXIT_NOT_CERTIFIED,
     "technique-inapplicable"),
    (["certify", "extraordinary", "--word", "R", "--valence", "5"], EXIT_INVALID, "invalid-input"),
])
def test_certify(args, code, verdict, capsys):
    assert main(["--no-timestamp"] + args) == code
    data = json.loads(capsys.readouterr().out)
    assert data["verdict"] == verdict and data["schema"] == 1
    assert "timestamp" not in data and data["evidence"]


def test_certify_regular_invalid(capsys):
    assert main(["certify", "regular", "--word", "R"]) == EXIT_INVALID


def test_certify_output_is_byte_identical(capsys):
    main(["--no-timestamp", "certify", "extraordinary", "--word", "AAR", "--valence", "5"])
    a = capsys.readouterr().out
    main(["--no-timestamp", "certify", "extraordinary", "--word", "AAR", "--valence", "5"])
    assert capsys.readouterr().out == a


def test_spectrum(tmp_path, capsys):
    csv, trip = tmp_path / "s.csv", tmp_path / "S.txt"
    assert main(["spectrum", "--word", "VV", "--valence", "3", "--csv", str(csv),
                 "--dump-matrix", str(trip)]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["lambda_2pi_over_m"] == pytest.approx(0.25, abs=1e-9)
    assert csv.read_text().startswith("f,re,im")
    rows = [ln.split() for ln in trip.read_text().splitlines() if not ln.startswith("#")]
    assert rows and all(len(r) == 3 for r in rows)
    from fractions import Fraction

    sums = {}
    for r, _, v in rows:
        sums[r] = sums.get(r, 0) + Fraction(v)
    assert all(abs(s - 1) < Fraction(1, 10**9) for s in sums.values())


def test_charmap(tmp_path, capsys):
    out = tmp_path / "c.obj"
    assert main(["charmap", "--word", "AAR", "--valence", "5", "--out", str(out)]) == EXIT_OK
    assert read_obj(out).n_faces > 0
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "i,j,re,im,abs,angle" and len(lines) > 1


def test_reproduction_suite_negative_control(capsys):
    assert main(["verify-paper", "--only", "1", "--inject", "R=1/3"]) == EXIT_NOT_CERTIFIED
    out = capsys.readouterr().out
    assert out.startswith("1..1") and "not ok 1" in out
    from midsub import acceptance

    assert acceptance.EXPECTED_NORMS["R"] == acceptance.F(1, 2)


def test_reproduction_suite_single_check(capsys):
    assert main(["verify-paper", "--only", "2"]) == EXIT_OK
    assert "ok 1 - criterion 2" in capsys.readouterr().out


def test_config_file(tmp_path, capsys):
    p = tmp_path / "m.cfg"
    p.write_text("# knobs\neig_tol = 1e-11\ncone-steps = 2\nrho = auto\n")
    assert main(["--config", str(p), "--no-timestamp", "certify", "regular", "--word", "VV"]) == 0
    cfg = json.loads(capsys.readouterr().out)["config"]
    assert cfg["eig_tol"] == 1e-11 and cfg["cone_steps"] == 2 and cfg["rho"] is None


def test_flags_override_config(tmp_path):
    cfg = parse_config("rho = 4\ncone_steps = 3").merged(rho=5, cone_steps=None)
    assert (cfg.rho, cfg.cone_steps) == (5, 3)
    assert Config().merged().to_dict() == Config().to_dict()


@pytest.mark.parametrize("text", ["bogus = 1", "eig_tol = fast", "[section]\nx"])
def test_bad_config(text):
    with pytest.raises(InvalidParameter):
        parse_config(text)


def test_missing_config_file(capsys):
    assert main(["--config", "/nonexistent.cfg", "certify", "regular", "--word", "VV"]) == EXIT_INVALID


def test_log_level_from_environment(monkeypatch):
    import logging

    from midsub.config import setup_logging

    monkeypatch.setenv("MIDSUB_LOG_LEVEL", "debug")
    root = logging.getLogger()
    old = root.handlers[:]
    root.handlers.clear()
    try:
        setup_logging()
        assert root.level == logging.DEBUG
    finally:
        root.handlers[:] = old
        root.setLevel(logging.WARNING)
