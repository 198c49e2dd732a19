import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qcburk import cli, suites
from qcburk.fieldio import read_field


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_core_json(capsys):
    code, out, _ = run(["verify", "core", "--probes", "200"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["suite"] == "core" and doc["config"]["probes"] == 200
    assert all(r["verdict"] in ("pass", "equality") for r in doc["reports"])


def test_verify_csv_to_file(tmp_path, capsys):
    code, out, _ = run(["verify", "core", "--probes", "50", "--format", "csv", "--out", str(tmp_path)], capsys)
    assert code == 0 and out == ""
    lines = (tmp_path / "verify-core.csv").read_text().splitlines()
    assert lines[0] == "check,params,value,bound,slack,est_error,verdict"


def test_counterexample_family(capsys):
    code, out, _ = run(["verify", "interpolation", "--family", "counterexample"], capsys)
    assert code == 0
    (row,) = json.loads(out)["reports"]
    assert row["check"] == "counterexample" and row["value"] >= 10


def test_failing_row_gives_exit_2(monkeypatch, capsys):
    monkeypatch.setattr(cli, "run_suite", lambda name, cfg: [suites.Row("x", 2.0, 1.0, 0.0, {}, "fail")])
    code, out, _ = run(["verify", "core"], capsys)
    assert code == 2 and '"fail"' in out


@pytest.mark.parametrize("argv", [
    ["verify", "nope"],
    ["verify", "core", "--grid", "100"],
    ["solve"],
    ["solve", "--mu", "const:k=0.95"],
    ["solve", "--mu", "wobble:k=0.1"],
    ["verify", "core", "--config", "/nonexistent/cfg.json"],
])
def test_usage_errors_exit_1(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1 and "error" in err


def test_nonconvergence_exit_3(capsys):
    code, _, err = run(["solve", "--mu", "const:k=0.5", "--grid", "64", "--tol", "1e-30"], capsys)
    assert code == 3
    hist = json.loads(err.splitlines()[-1])["residual_history"]
    assert len(hist) > 3


def test_solve_writes_fields(tmp_path, capsys):
    code, _, _ = run(["solve", "--mu", "const:k=0.3", "--grid", "256", "--out", str(tmp_path)], capsys)
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["b1"]["re"] == pytest.approx(0.3, abs=0.01) and abs(summary["b1"]["im"]) < 1e-6
    assert summary["area_integral"] == pytest.approx(math.pi * (1 - 0.09), rel=1e-2)
    for name in ("omega", "s_omega", "absdf", "jacobian"):
        f = read_field(tmp_path / f"{name}.qcgf")
        assert f.spec.N == 256
    absdf = read_field(tmp_path / "absdf.qcgf")
    z = absdf.spec.z
    inner = np.abs(z) < 0.7
    assert np.max(np.abs(absdf.values[inner].real - 1.3)) < 0.03


def test_mu_phase_is_an_angle(capsys):
    _, out, _ = run(["solve", "--mu", "const:k=0.3,phase=0", "--grid", "128"], capsys)
    assert json.loads(out)["k"] == pytest.approx(0.3)


@pytest.mark.parametrize("which", cli.TABLES)
def test_tables(which, capsys):
    code, out, _ = run(["table", which], capsys)
    assert code == 0
    rows = json.loads(out)["reports"]
    assert rows and all(r["verdict"] in ("pass", "equality", "error") for r in rows)


def test_table_out_of_range_is_error_row(capsys):
    code, out, _ = run(["table", "lp-mean", "--K", "2", "--p", "3,4.5"], capsys)
    assert code == 0
    verdicts = [r["verdict"] for r in json.loads(out)["reports"]]
    assert verdicts == ["equality", "error"]


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"grid": 64, "seed": 3, "probes": 40, "p": 3.0}))
    code, out, _ = run(["verify", "core", "--config", str(cfg), "--seed", "11"], capsys)
    assert code == 0
    rec = json.loads(out)["config"]
    assert rec["N"] == 64 and rec["probes"] == 40 and rec["seed"] == 11 and rec["p"] == [3.0]


def test_config_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"gird": 64}))
    code, _, err = run(["verify", "core", "--config", str(cfg)], capsys)
    assert code == 1 and "gird" in err


def test_verify_deterministic(tmp_path, capsys):
    outs = []
    for d in ("a", "b"):
        assert run(["verify", "radial", "--seed", "5", "--out", str(tmp_path / d)], capsys)[0] == 0
        outs.append((tmp_path / d / "verify-radial.json").read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qcburk", "table", "loginv", "--format", "csv"],
                         capture_output=True, text=True, timeout=120)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0].startswith("check,params")
