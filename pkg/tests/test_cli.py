import json
import math

import numpy as np
import pytest

from spectral_metrics import cli, distances, geodesics
from spectral_metrics.specs import load_spec

ONES = '{"Rational": {"num": [1], "den": [1]}}'
MA1 = '{"Rational": {"num": [1, -0.5], "den": [1]}}'


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_measure():
    assert cli.parse_measure("SYM") == ("sym", None, None)
    name, r, s = cli.parse_measure("rs(-inf, 2)")
    assert (name, r.r, s.r) == ("rs", -math.inf, 2.0)
    with pytest.raises(cli.SpecParseError):
        cli.parse_measure("rs(1)")


def test_dist_examples(capsys, tmp_path):
    code, out, _ = run(capsys, "dist", "paper_f1", "paper_f1")
    assert (code, out) == (0, "0\n")
    ones = tmp_path / "ones.json"
    ones.write_text(json.dumps({"Samples": {"values": [1.0] * 8192}}))
    code, out, _ = run(capsys, "dist", str(ones), MA1, "--n", "8192")
    assert code == 0
    assert float(out) == pytest.approx(0.287682, abs=1e-6)


def test_dist_is_pass_through(capsys):
    rec = cli.cmd_dist(load_spec("paper_f1"), load_spec("paper_f2"), "sym", 8192)
    f1, f2 = load_spec("paper_f1").grid(8192), load_spec("paper_f2").grid(8192)
    assert rec["value"] == float(distances.delta_sym(f1, f2))
    code, out, _ = run(capsys, "dist", "--builtin", "paper_f1", "--builtin", "paper_f2", "--measure", "sym", "--n", "8192", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["value"] == rec["value"]
    assert data["measure"] == "sym"
    assert len(data["inputs"][0]["digest"]) == 64


def test_dist_prints_twelve_digits(capsys):
    code, out, _ = run(capsys, "dist", "paper_f1", "paper_f2", "--measure", "rs(-1,1)")
    assert out.strip() == f"{cli.cmd_dist(load_spec('paper_f1'), load_spec('paper_f2'), 'rs(-1,1)')['value']:.12g}"


def test_exit_codes(capsys, tmp_path, monkeypatch):
    code, _, err = run(capsys, "dist", "paper_f1", '{"Rational": {"num": [1], "den": "x"}}')
    assert code == 2 and "Rational.den" in err
    code, _, err = run(capsys, "dist", "paper_f1", "paper_f2", "--measure", "l2")
    assert code == 2 and "--measure" in err
    code, _, _ = run(capsys, "dist", "paper_f1", '{"Rational": {"num": [1, -1], "den": [1]}}', "--n", "16")
    assert code == 3
    code, _, _ = run(capsys, "surface", "paper_f1", "paper_f2", "paper_f3", "--steps", "2", "--n", "64",
                     "--out", str(tmp_path / "missing" / "s.csv"))
    assert code == 4
    code, _, err = run(capsys, "surface", "paper_f1", "paper_f2", "paper_f3", "--steps", "1")
    assert code == 2 and "--steps" in err
    # a correct simulator cannot be made to fail on demand, so fake a 10-sigma miss
    monkeypatch.setattr(
        cli.prediction, "simulate_prediction",
        lambda *a, **k: cli.prediction.SimulationReport(1.0, 1.1, 0.01, 20000, 1, 0),
    )
    code, _, err = run(capsys, "verify", ONES, MA1, "--samples", "20000", "--filter-len", "1", "--n", "256")
    assert code == 5 and "FAIL" in err


def test_surface(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "surface", "paper_f1", "paper_f2", "paper_f3", "--steps", "4", "--n", "512", "--out", str(out))
    assert code == 0
    text = out.read_bytes()
    lines = text.decode().splitlines()
    assert lines[0] == "tau,sigma,delta_ag,delta_sym,delta_kl"
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert rows.shape == (25, 5)
    np.testing.assert_array_equal(rows[:5, 2:], 0.0)
    assert np.all(rows[5:, 2:] > 0)
    # tau-major ordering
    np.testing.assert_array_equal(rows[:, 0], np.repeat(np.linspace(0, 1, 5), 5))
    corner = rows[(rows[:, 0] == 1) & (rows[:, 1] == 0)][0]
    for col, measure in zip((2, 3, 4), ("ag", "sym", "kl")):
        rec = cli.cmd_dist(load_spec("paper_f1"), load_spec("paper_f2"), measure, 512)
        assert corner[col] == pytest.approx(rec["value"], abs=1e-12)
    # byte-identical rerun, independent of the worker count
    again = tmp_path / "t.csv"
    cli.main(["surface", "paper_f1", "paper_f2", "paper_f3", "--steps", "4", "--n", "512", "--out", str(again)])
    assert again.read_bytes() == text
    single = cli.format_surface_csv(cli.surface_rows(*(load_spec(s).grid(512) for s in ("paper_f1", "paper_f2", "paper_f3")), 4, workers=1))
    assert single.encode() == text
    with pytest.raises(ValueError):
        cli.surface_rows(*(load_spec(s).grid(64) for s in ("paper_f1", "paper_f2", "paper_f3")), 1)


def test_geodesic(capsys):
    code, out, _ = run(capsys, "geodesic", "paper_f2", "paper_f2")
    data = json.loads(out)
    assert code == 0
    assert data["logpath_length"] == 0.0
    assert data["geodesic_residual"] is None and "ZeroSpeed" in data["note"]
    rep = cli.cmd_geodesic(load_spec(ONES), load_spec(MA1), 1001)
    assert rep["path_length"] == pytest.approx(0.731646, abs=1e-4)
    rep = cli.cmd_geodesic(load_spec("paper_f1"), load_spec("paper_f2"), 1001)
    assert rep["path_length"] == pytest.approx(rep["logpath_length"], rel=1e-3)
    f1, f2 = load_spec("paper_f1").grid(4096), load_spec("paper_f2").grid(4096)
    assert rep["logpath_length"] == geodesics.logpath_length(f1, f2)


def test_verify(capsys):
    code, out, err = run(capsys, "verify", ONES, MA1, "--seed", "7")
    data = json.loads(out)
    assert code == 0 and "PASS" in err
    assert data["analytic_variance"] == pytest.approx(4 / 3, rel=1e-12)
    assert data["exp_delta_ag_times_g_true"] == pytest.approx(4 / 3, rel=1e-12)
    code, again, _ = run(capsys, "verify", ONES, MA1, "--seed", "7")
    assert again == out
    code, _, err = run(capsys, "verify", MA1, MA1, "--seed", "42")
    assert code == 0


def test_moments(capsys, tmp_path):
    out = tmp_path / "sol.json"
    code, text, _ = run(capsys, "moments", "--moments", "1.3333333333333333,0.6666666666666666", "--out", str(out))
    assert code == 0
    sol = load_spec(str(out)).grid(4096)
    ar = 1 / np.abs(1 - 0.5 * np.exp(1j * np.linspace(-np.pi, np.pi, 4096, endpoint=False))) ** 2
    assert np.max(np.abs(sol.values - ar)) <= 1e-6
    data = json.loads(text)
    assert set(data) >= {"lambdas", "kappa", "residual", "iterations"}

    code, text, _ = run(capsys, "moments", "paper_f2", "--prior", "paper_f2", "--n-moments", "4")
    data = json.loads(text)
    assert code == 0 and data["residual"] <= 1e-9
    assert data["distance_ag_to_prior"] == pytest.approx(0.0, abs=1e-12)

    code, text, _ = run(capsys, "moments", "--moments", "1,0")
    data = json.loads(text)
    assert data["kappa"] == pytest.approx(1.0, rel=1e-14)
    assert data["lambdas"][1] == pytest.approx(0.0, abs=1e-14)


def test_moments_errors(capsys):
    code, _, err = run(capsys, "moments", "paper_f2", "--prior", "paper_f3", "--n-moments", "4", "--max-iter", "2")
    assert code == 6 and "residual" in err
    code, _, _ = run(capsys, "moments")
    assert code == 2
    code, _, _ = run(capsys, "moments", "--moments", "1,2")
    assert code == 3


def test_help_lists_builtins(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--help"])
    out = capsys.readouterr().out
    assert "paper_f3" in out and "(z^2+.9z+.99)(z^2+.9z+.99)" in out
