import json
import math
import subprocess
import sys

import numpy as np
import pytest

from darwin.cli import main
from darwin.estimate import qmle_fit


def join(y):
    return ",".join(repr(float(v)) for v in y)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_fit_text_layout(capsys):
    code, out, _ = run(["fit", "--values", "1,2,1"], capsys)
    assert code == 0
    assert "phi_hat     1.2500 (0.5303)" in out
    assert "alpha_hat   0.5625 (0.0000)" in out


def test_fit_json_round_trip(capsys):
    y = np.exp(np.random.default_rng(3).normal(size=60)) * np.where(np.arange(60) % 3, 1, -1)
    code, out, _ = run(["fit", "--values=" + join(y), "--format", "json"], capsys)
    env = json.loads(out)
    assert set(env) == {"command", "config", "results", "seeds", "warnings"}
    res = env["results"]
    assert res["se_phi"] == math.sqrt(res["alpha_hat"] / res["n"])
    assert res["se_alpha"] == math.sqrt((res["kappa_hat"] - 1) * res["alpha_hat"] ** 2 / res["n"])
    assert res["phi_hat"] == qmle_fit(y).phi_hat


def test_calibrate(capsys):
    code, out, _ = run(["calibrate", "--phi", "0.5", "--dist", "laplace"], capsys)
    assert code == 0 and abs(float(out) - 5.1726) < 1e-3


def test_usage_error_exit_1(capsys):
    code, _, err = run(["fit", "--values", "1,2,1", "--format", "xml"], capsys)
    assert code == 1
    assert json.loads(err.strip().splitlines()[-1])["exit"] == 1
    assert run(["nosuch"], capsys)[0] == 1
    assert run([], capsys)[0] == 1


def test_data_error_exit_2(capsys, tmp_path):
    code, _, err = run(["fit", "--values", "1,0,2"], capsys)
    assert code == 2
    reason = json.loads(err.strip())
    assert reason["type"] == "DataError" and "index 1" in reason["error"]
    p = tmp_path / "z.csv"
    p.write_text("p\n1\n2\n2\n3\n")
    code, _, err = run(["stability", "--input", str(p), "--transform", "logret"], capsys)
    assert code == 2 and "row 4" in err
    assert run(["fit", "--input", str(tmp_path / "missing.csv")], capsys)[0] == 2


def test_help_exits_zero(capsys):
    assert run(["--help"], capsys)[0] == 0
    assert run(["fit", "--help"], capsys)[0] == 0


@pytest.mark.parametrize("fmt", ["text", "json", "csv"])
def test_simulate_reproducible(capsys, fmt):
    argv = ["simulate", "--alpha", "3.3058", "--n", "50", "--seed", "8", "--format", fmt]
    a = run(argv, capsys)[1]
    b = run(argv, capsys)[1]
    c = run(argv[:-3] + ["9", "--format", fmt], capsys)[1]
    assert a == b and a != c


def test_simulate_csv_feeds_fit(capsys, tmp_path):
    out = tmp_path / "path.csv"
    assert run(["simulate", "--alpha", "3.3058", "--n", "200", "--output", str(out)], capsys)[0] == 0
    code, text, _ = run(["fit", "--input", str(out), "--column", "level", "--format", "json"], capsys)
    assert code == 0
    assert json.loads(text)["results"]["n"] == 200
    assert json.loads(text)["config"]["transform"] == "none"


@pytest.mark.parametrize("cmd", [
    ["stability"], ["wald", "--gamma", "1,0;0,1", "--r", "0.5,3"], ["volatility", "--with-dar"], ["acf", "--lags", "5"],
    ["dar-fit"],
])
@pytest.mark.parametrize("fmt", ["text", "json", "csv"])
def test_data_commands(capsys, cmd, fmt):
    y = np.random.default_rng(1).standard_normal(80)
    code, out, err = run(cmd + ["--values", join(y), "--format", fmt], capsys)
    assert code == 0, err
    if fmt == "json":
        assert json.loads(out)["command"] == cmd[0]


@pytest.mark.parametrize("cmd", [
    ["theory", "--alpha", "3.1", "--n", "100"],
    ["clt-check", "--alpha", "3.3058", "--n", "500", "--reps", "100"],
    ["mc-table", "--ns", "50", "--reps", "20"],
    ["mc-power", "--ns", "50", "--reps", "20", "--alphas", "3.1,3.3058"],
    ["mc-hist", "--ns", "50", "--reps", "20", "--alphas", "3.3058", "--target", "phi_hat"],
])
@pytest.mark.parametrize("fmt", ["text", "json", "csv"])
def test_model_commands(capsys, cmd, fmt):
    code, out, err = run(cmd + ["--format", fmt], capsys)
    assert code == 0, err
    assert out


def test_theory_flags_reference(capsys):
    env = json.loads(run(["theory", "--alpha", "3.1", "--format", "json"], capsys)[1])
    assert env["warnings"] == []
    assert env["results"]["gamma0"] == pytest.approx(-0.0297, abs=5e-4)


def test_timing_goes_to_stderr(capsys):
    code, out, err = run(["calibrate", "--timing"], capsys)
    assert "wall time" in err and "wall time" not in out


def test_man_page(capsys):
    code, out, _ = run(["man"], capsys)
    assert code == 0 and out.startswith(".TH DARWIN 1")
    for flag in ("\\-\\-format", "\\-\\-seed", "DARWIN_WORKERS", "mc\\-power"):
        assert flag in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "darwin", "calibrate", "--dist", "gaussian"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "3.3058"
