import json

import pytest

from spinbattery import cli


def _run(tmp_path, argv, config=None):
    args = list(argv)
    if config is not None:
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(config))
        args += ["--config", str(path)]
    return cli.main(args)


def _csv_body(text):
    lines = text.splitlines()
    meta = {l[2:].split(": ", 1)[0]: l[2:].split(": ", 1)[1] for l in lines if l.startswith("# ")}
    rows = [l.split(",") for l in lines if not l.startswith("#")]
    return meta, rows[0], rows[1:]


def test_simulate_csv(tmp_path):
    out = tmp_path / "trace.csv"
    rc = _run(tmp_path, ["simulate", "--out", str(out)], {"M": 2, "N": 4, "gt_max": 10, "points": 2001})
    assert rc == 0
    meta, header, rows = _csv_body(out.read_text())
    assert header == ["t", "gt", "E_over_omega0", "P_over_gomega0", "P_over_sqrtN_gomega0"]
    assert len(rows) == 2001
    assert max(float(r[2]) for r in rows) == pytest.approx(1.92, abs=1e-4)
    assert float(meta["E_max_over_omega0"]) == pytest.approx(1.92, abs=1e-9)
    config = json.loads(meta["config"])
    assert config["gamma"] == 0.0 and config["frame"] == "lab"


def test_determinism_and_echo_round_trip(tmp_path):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    cfg = {"M": 3, "N": 5, "gamma": 0.4, "points": 300}
    assert _run(tmp_path, ["simulate", "--out", str(a)], cfg) == 0
    assert _run(tmp_path, ["simulate", "--out", str(b)], cfg) == 0
    assert a.read_bytes() == b.read_bytes()
    echo = json.loads(_csv_body(a.read_text())[0]["config"])
    assert _run(tmp_path, ["simulate", "--out", str(c)], echo) == 0
    assert c.read_bytes() == a.read_bytes()


def test_json_output(tmp_path):
    out = tmp_path / "x.json"
    rc = _run(tmp_path, ["crosstalk", "--format", "json", "--out", str(out), "--threads", "1"],
              {"g1_over_g": [0.1, 1.0], "crossing_fraction": None})
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["scenario"] == "crosstalk"
    col = doc["columns"].index("E_max_over_omega0")
    assert doc["rows"][0][col] == pytest.approx(1.906, abs=0.01)
    assert doc["rows"][1][col] == pytest.approx(0.85, abs=0.01)


@pytest.mark.parametrize("cfg, path", [
    ({"M": 0}, "config.M"),
    ({"gamma": 2}, "config.gamma"),
    ({"frame": "sideways"}, "config.frame"),
    ({"bogus": 1}, "config"),
    ({"gamma": 0.5, "frame": "rotating"}, "config.frame"),
])
def test_schema_errors(tmp_path, capsys, cfg, path):
    assert _run(tmp_path, ["simulate"], cfg) == 2
    assert path in capsys.readouterr().err


def test_nonideal_probabilities_checked(tmp_path, capsys):
    assert _run(tmp_path, ["nonideal"], {"charger_p": [0.5, 0.6, 0, 0, 0]}) == 2
    assert "config.charger_p" in capsys.readouterr().err


def test_bad_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{not json")
    assert cli.main(["simulate", "--config", str(path)]) == 2


def test_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    from spinbattery.errors import KrylovConvergenceError

    def boom(*a, **k):
        raise KrylovConvergenceError("did not converge (dim=7)")

    monkeypatch.setitem(cli.RUNNERS, "simulate", boom)
    assert cli.main(["simulate"]) == 3
    assert "dim=7" in capsys.readouterr().err


def test_validate(tmp_path):
    out = tmp_path / "v.csv"
    assert cli.main(["validate", "--out", str(out)]) == 0
    meta, header, rows = _csv_body(out.read_text())
    assert meta["failed"] == "0"
    assert all(r[-1] == "true" for r in rows)


def test_validate_failure_exit(monkeypatch, capsys):
    monkeypatch.setattr(cli, "validation_checks", lambda g, w: [("always_off", 1.0, 0.0, 0.1)])
    assert cli.main(["validate"]) == 3
    assert "FAIL always_off" in capsys.readouterr().err


def test_nonideal_and_tc(tmp_path):
    out = tmp_path / "n.csv"
    assert cli.main(["nonideal", "--out", str(out)]) == 0
    _, header, rows = _csv_body(out.read_text())
    frac = {r[0]: float(r[header.index("E_fraction")]) for r in rows}
    assert frac["charger"] == pytest.approx(0.84, abs=0.02)
    assert frac["battery"] == pytest.approx(0.70, abs=0.02)
    assert _run(tmp_path, ["tc-benchmark", "--out", str(out)], {"Ms": [2]}) == 0
    _, header, rows = _csv_body(out.read_text())
    assert float(rows[0][header.index("E_max_over_omega0")]) == pytest.approx(16 / 9, rel=1e-6)


def test_scaling_and_landscape_small(tmp_path):
    out = tmp_path / "s.csv"
    assert _run(tmp_path, ["scaling", "--out", str(out), "--threads", "2"], {"M_max": 8}) == 0
    meta, header, rows = _csv_body(out.read_text())
    assert len(rows) == 8 and "beta_local" in meta and "tc_beta_local" in meta
    assert _run(tmp_path, ["landscape", "--out", str(out)], {"Ms": [1, 2, 3], "ratios": [1], "gammas": [0.0]}) == 0
    meta, _, rows = _csv_body(out.read_text())
    assert len(rows) == 3 and "slope_ratio_1_P_per_E" in meta


def test_full_tier_sizes():
    cfg = cli.resolve_config("scaling", {})
    assert max(cli.scaling_sizes(cfg, "ci")) == 100
    assert max(cli.scaling_sizes(cfg, "full")) == 1000
