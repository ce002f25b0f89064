import json
import math
import os
import subprocess
import sys

import pytest

from ksdminimax import __version__
from ksdminimax.cli import main, parse_config


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_oracle_example(capsys):
    code, out, _ = _run(capsys, "oracle", "--gamma", "1", "--dim", "1", "--mu", "1", "--sigma", "identity")
    rec = json.loads(out)
    assert code == 0
    assert rec["ksd"] == pytest.approx(0.6687403, abs=1e-7)
    assert rec["ksd_squared"] == pytest.approx(0.4472136, abs=1e-7)
    assert rec["spec_version"] == __version__
    assert rec["gamma"] == 1.0 and rec["dim"] == 1 and rec["mu"] == [1.0] and rec["sigma"] == "identity"


def test_oracle_with_quadrature(capsys):
    code, out, _ = _run(capsys, "oracle", "--gamma", "0.25", "--dim", "1", "--mu", "0", "--sigma", "2",
                        "--quadrature")
    rec = json.loads(out)
    assert code == 0
    assert rec["ksd"] == pytest.approx(0.3102015, abs=1e-6)
    assert abs(rec["quadrature_ksd_squared"] - rec["ksd_squared"]) <= rec["quadrature_error_bound"]


def test_lecam_example(capsys):
    code, out, _ = _run(capsys, "lecam", "--n", "100", "--gamma", "1", "--dim", "1")
    rec = json.loads(out)
    assert code == 0
    assert rec["s_n"] == pytest.approx(0.0334370, abs=1e-7)
    assert rec["n_times_kl"] == pytest.approx(0.5, abs=1e-14)
    assert rec["le_cam_prob"] == 0.25


def test_estimate_example(tmp_path, capsys):
    f = tmp_path / "samples.csv"
    f.write_text("0.0\n")
    code, out, _ = _run(capsys, "estimate", "--input", str(f), "--method", "v", "--gamma", "1")
    assert code == 0
    assert json.loads(out)["ksd"] == pytest.approx(math.sqrt(2), abs=1e-7)


def test_estimate_header_and_nystrom(tmp_path, capsys):
    f = tmp_path / "samples.csv"
    f.write_text("x1,x2\n0.1,0.2\n-0.3,1.0\n0.5,0.5\n2.0,-1.0\n")
    code, out, _ = _run(capsys, "estimate", "-i", str(f), "--method", "nystrom", "--gamma", "0.5",
                        "--landmarks", "4", "--seed", "9")
    rec = json.loads(out)
    assert code == 0 and rec["n"] == 4 and rec["dim"] == 2 and rec["seed"] == 9
    assert rec["ksd_squared"] >= 0


def test_exit_codes(tmp_path, capsys):
    assert _run(capsys, "oracle", "--gamma", "-1", "--dim", "1")[0] == 3
    code, _, err = _run(capsys, "oracle", "--gamma", "1", "--dim", "1", "--sigma", "-1")
    assert code == 4 and "positive definite" in err and len(err.strip().splitlines()) == 1
    assert _run(capsys, "estimate", "--input", str(tmp_path / "missing.csv"), "--gamma", "1")[0] == 8
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0,2.0\n3.0\n")
    assert _run(capsys, "estimate", "--input", str(bad), "--gamma", "1")[0] == 3
    model = tmp_path / "m.json"
    model.write_text(json.dumps({"K": 2, "D": 1, "p0": [0.5, 0.5], "psi": [1, -1], "phi": [5, 5]}))
    assert _run(capsys, "finite", "--model", str(model))[0] == 6
    with pytest.raises(SystemExit) as info:
        main(["oracle", "--gamma", "x"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["nope"])
    assert info.value.code == 2


def test_finite_table(tmp_path, capsys):
    model = tmp_path / "m.json"
    model.write_text(json.dumps({"K": 2, "D": 1, "p0": [0.5, 0.5], "psi": [1, -1], "phi": [2, 0]}))
    code, out, _ = _run(capsys, "finite", "--model", str(model), "--n-grid", "1,100")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0].startswith("n,epsilon,feasible,ksd,")
    row = dict(zip(lines[0].split(","), lines[2].split(",")))
    assert float(row["epsilon"]) == pytest.approx(0.0832555, abs=1e-7)
    assert float(row["ksd"]) == pytest.approx(float(row["epsilon"]), rel=1e-12)


def test_rate_sweep_byte_identical(tmp_path, capsys):
    outs = []
    for k in range(2):
        csv_path, fit_path = tmp_path / f"c{k}.csv", tmp_path / f"f{k}.json"
        code = main(["rate-sweep", "--n-grid", "4:6", "--reps", "8", "--method", "nystrom", "--seed", "5",
                     "-o", str(csv_path), "--fit-output", str(fit_path)])
        assert code == 0
        outs.append((csv_path.read_bytes(), fit_path.read_bytes()))
    assert outs[0] == outs[1]
    assert outs[0][0].decode().splitlines()[0] == "n,mean_abs_error,std_error,reps,method"
    assert [int(l.split(",")[0]) for l in outs[0][0].decode().splitlines()[1:]] == [16, 32, 64]
    fit = json.loads(outs[0][1])
    assert fit["spec_version"] == __version__ and fit["seed"] == 5


def test_seed_precedence(monkeypatch):
    monkeypatch.setenv("KSDMINIMAX_SEED", "17")
    from ksdminimax.cli import _seed
    import argparse
    assert _seed(argparse.Namespace(seed=None)) == 17
    assert _seed(argparse.Namespace(seed=3)) == 3
    monkeypatch.delenv("KSDMINIMAX_SEED")
    assert _seed(argparse.Namespace(seed=None)) == 0
    assert parse_config(["rate-sweep", "--n-grid", "7:9,1024"]).params["n_grid"] == [128, 256, 512, 1024]


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "ksdminimax", "lecam", "--n", "4", "--gamma", "1", "--dim", "2"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["rho"] == 0.5
    out = subprocess.run([sys.executable, "-m", "ksdminimax", "lecam", "--n", "0", "--gamma", "1", "--dim", "2"],
                         capture_output=True, text=True)
    assert out.returncode == 3 and out.stderr.count("\n") == 1
