import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from bouncelab import cli
from bouncelab.errors import ParameterError
from bouncelab.scans import DEFAULTS, Gate, RegressionReport, classify_time, make_config


def invoke(tmp_path, *args, config=None):
    argv = list(args) + ["--out", str(tmp_path / "rows.csv")]
    if config is not None:
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(config))
        argv += ["--config", str(path)]
    return cli.main(argv)


def test_show_defaults(capsys):
    assert cli.main(["vdc-table", "--show-defaults"]) == 0
    assert json.loads(capsys.readouterr().out) == DEFAULTS["vdc-table"]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "bouncelab", "build-cache", "--show-defaults"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["k_max"] == 5000


@pytest.mark.parametrize("command,config,field", [
    ("dispersion-scan", {"T_grid": []}, "T_grid"),
    ("dispersion-scan", {"h_ladder": [1e-3, 2.5e-4, 5e-4]}, "h_ladder"),
    ("dispersion-scan", {"h_ladder": [1e-3, 5e-4]}, "h_ladder"),
    ("strichartz-scan", {"a_height": 0.3}, "a_height"),
    ("expsum-verify", {"lambda_ladder": [1e3, 1e6]}, "lambda_ladder"),
    # gamma^(3/2)/h = 5 with h = a^(3/2)/100
    ("parametrix-compare", {"gamma": 0.25 * 0.05 ** (2 / 3)}, "gamma"),
])
def test_invalid_input_exits_two_and_writes_nothing(tmp_path, capsys, command, config, field):
    assert invoke(tmp_path, command, config=config) == 2
    assert field in capsys.readouterr().err
    assert not (tmp_path / "rows.csv").exists()
    assert not (tmp_path / "rows.json").exists()


def test_bad_json_and_threads(tmp_path):
    bad = tmp_path / "cfg.json"
    bad.write_text("[1, 2")
    assert cli.main(["vdc-table", "--config", str(bad), "--out", str(tmp_path / "x.csv")]) == 2
    assert cli.main(["vdc-table", "--threads", "0", "--out", str(tmp_path / "x.csv")]) == 2
    assert not (tmp_path / "x.csv").exists()


def test_build_cache_and_report(tmp_path):
    assert invoke(tmp_path, "build-cache", config={"k_max": 300, "check_k": 300}) == 0
    rows = list(csv.reader((tmp_path / "rows.csv").open()))
    assert rows[0] == ["k", "omega_k", "phase_slope"]
    assert len(rows) == 301
    assert float(rows[1][1]) == pytest.approx(2.338107410459767, abs=1e-12)
    rep = json.loads((tmp_path / "rows.json").read_text())
    assert set(rep) >= {"command", "config_echo", "gates", "runtime_seconds"}
    assert rep["command"] == "build-cache"
    assert rep["config_echo"]["k_max"] == 300 and rep["config_echo"]["seed"] == 0
    for g in rep["gates"]:
        assert set(g) == {"name", "target", "measured", "tolerance", "pass"}
        assert g["pass"] is True


def test_failing_gate_exits_one(tmp_path, capsys):
    assert invoke(tmp_path, "vdc-table", config={"c_fit_max": 1e-3}) == 1
    assert "FAIL  c_fit_vdc2" in capsys.readouterr().out
    rep = json.loads((tmp_path / "rows.json").read_text())
    assert not all(g["pass"] for g in rep["gates"])
    assert (tmp_path / "rows.csv").exists()


def test_vdc_table_rows(tmp_path):
    assert invoke(tmp_path, "vdc-table") == 0
    rows = list(csv.DictReader((tmp_path / "rows.csv").open()))
    opt = next(r for r in rows if r["variant"] == "vdc2_optimal_delta")
    assert float(opt["bound"]) == pytest.approx(2 * 1000**0.5, rel=1e-12)


def test_expsum_below_horizon_routing(tmp_path):
    assert invoke(tmp_path, "expsum-verify") == 0
    rows = list(csv.DictReader((tmp_path / "rows.csv").open()))
    short = [r for r in rows if float(r["T"]) == 2.0]
    assert len(short) == 2 and all(r["regime"] == "below-horizon" for r in short)
    seams = [r for r in rows if r["regime"] == "seam:R1|R2"]
    assert all(float(r["seam_gap"]) <= 1e-12 for r in seams)


def test_cache_coherence(tmp_path):
    cache = tmp_path / "zeros.csv"
    runs = []
    for i in range(3):
        if i == 2:
            cache.unlink()
        out = tmp_path / f"e{i}.csv"
        assert cli.main(["expsum-verify", "--cache", str(cache), "--out", str(out)]) == 0
        runs.append(list(csv.reader(out.open())))
    for a, b in zip(runs[0], runs[1]):
        assert a == b
    for a, b in zip(runs[0][1:], runs[2][1:]):
        for x, y in zip(a, b):
            try:
                fx, fy = float(x), float(y)
            except ValueError:
                assert x == y
                continue
            assert fx == pytest.approx(fy, rel=1e-12, nan_ok=True)


def test_threads_do_not_change_output(tmp_path):
    outs = []
    for n in (1, 2):
        out = tmp_path / f"t{n}.csv"
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"T_grid": [2.0, 3.0]}))
        assert cli.main(["parametrix-compare", "--config", str(cfg), "--threads", str(n),
                         "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_make_config_and_classify():
    cfg = make_config("dispersion-scan", {"a": 0.2})
    assert cfg["a"] == 0.2 and DEFAULTS["dispersion-scan"]["a"] == 0.3
    with pytest.raises(ParameterError, match="unknown command"):
        make_config("plot")
    assert classify_time(0.5, 164) == "pre-reflection"
    assert classify_time(2.0, 164) == "resonant"
    assert classify_time(2.7, 164) == "off-resonant"
    assert classify_time(6.0, 164) == "beyond-horizon"


def test_regression_report():
    hs = np.array([1e-3, 5e-4, 2.5e-4])
    r = RegressionReport.fit(hs, 3 * hs**0.25, 0.25, 0.05)
    assert r.passed and r.fitted_exponent == pytest.approx(0.25)
    assert not RegressionReport.fit(hs, hs**0.4, 0.25, 0.05).passed
    assert Gate("g", 1, 2, None, False).as_json()["pass"] is False
