import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from spinbath import cli
from spinbath.harness import read_trajectory_csv
from spinbath.projection import NumericalFailure

ROOT = Path(__file__).resolve().parents[1]
SMALL = {"n_spins": 4, "couplings": "uniform:1", "frequencies": "uniform:1", "beta": 1.0, "alpha": 1.0,
         "grid": {"min": 0.0, "max": 2.0, "count": 21, "scale": "lin"}, "initial_bloch": [0.7, 0.7, 0.0]}


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(SMALL))
    return path


def test_exact_verb(config, tmp_path):
    out = tmp_path / "o"
    assert cli.main(["exact", "--config", str(config), "--out", str(out)]) == 0
    t, method, points, flags = read_trajectory_csv(out / "exact.csv")
    assert method == "exact" and len(t) == 21


@pytest.mark.parametrize("args, label", [
    (["--method", "nz", "--order", "3"], "nz3"),
    (["--method", "tcl", "--order", "4"], "tcl4"),
    (["--method", "pm", "--kernel", "second_order"], "pm-second_order"),
    (["--method", "cg", "--tau", "0.2"], "cg"),
    (["--method", "cg"], "cg"),
    (["--method", "short_time"], "short_time"),
])
def test_approx_verb(config, tmp_path, args, label):
    out = tmp_path / "o"
    assert cli.main(["approx", "--config", str(config), "--out", str(out)] + args) == 0
    assert read_trajectory_csv(out / f"{label}.csv")[1] == label


def test_approx_needs_order(config, tmp_path):
    assert cli.main(["approx", "--config", str(config), "--out", str(tmp_path), "--method", "nz"]) == 2


def test_flags_override_config(config, tmp_path):
    out = tmp_path / "o"
    assert cli.main(["compare", "--config", str(config), "--out", str(out), "--beta", "inf",
                     "--grid-count", "11", "--methods", "exact,tcl2"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["metadata"]["config"]["beta"] == "inf"
    assert report["metadata"]["config"]["grid"]["count"] == 11
    assert sorted(report["summary"]) == ["exact", "tcl2"]
    assert "timestamp" in report["metadata"]


def test_empty_method_list_exits_2(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({**SMALL, "methods": []}))
    assert cli.main(["compare", "--config", str(path), "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("content", ["{not json", json.dumps({**SMALL, "couplings": [2, 0, 0, 0]}),
                                     json.dumps({k: v for k, v in SMALL.items() if k != "grid"})])
def test_bad_config_exits_2(tmp_path, content, capsys):
    path = tmp_path / "c.json"
    path.write_text(content)
    assert cli.main(["compare", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path):
    assert cli.main(["compare", "--config", str(tmp_path / "nope.json")]) == 2


def test_numerical_failure_exits_3(config, tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise NumericalFailure("nz4", "non-finite propagator")

    monkeypatch.setattr(cli, "run_method", boom)
    assert cli.main(["approx", "--config", str(config), "--out", str(tmp_path), "--method", "nz",
                     "--order", "4"]) == 3
    assert "nz4" in capsys.readouterr().err


def test_ensemble_requires_seed(config):
    with pytest.raises(SystemExit) as exc:
        cli.main(["ensemble", "--config", str(config)])
    assert exc.value.code == 2


def test_ensemble_verb(config, tmp_path):
    out = tmp_path / "e"
    assert cli.main(["ensemble", "--config", str(config), "--seed", "9", "--count", "3", "--out", str(out),
                     "--methods", "exact,tcl2"]) == 0
    summary = json.loads((out / "ensemble.json").read_text())
    assert summary["metadata"] == {"seed": 9, "member_count": 3, "n_spins": 4}


def test_sweep_and_cg_opt(config, tmp_path, capsys):
    out = tmp_path / "s"
    assert cli.main(["sweep-beta", "--config", str(config), "--alpha-t", "0.5", "--betas", "0.01,10",
                     "--methods", "exact,nz4,tcl4", "--out", str(out)]) == 0
    rows = (out / "sweep_beta.csv").read_text().splitlines()
    assert rows[0] == "beta,alpha_t,method,vx,flag" and len(rows) == 7
    assert cli.main(["cg-opt", "--config", str(config), "--out", str(out)]) == 0
    assert "tau* =" in capsys.readouterr().out


def test_random_bath_needs_seed(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({**SMALL, "couplings": "random"}))
    assert cli.main(["exact", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert cli.main(["exact", "--config", str(path), "--out", str(tmp_path), "--seed", "1"]) == 0


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "spinbath.cli", "compare", "--config",
                          str(ROOT / "configs" / "fig-N4.json"), "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "distances.csv").read_text().splitlines()[0].count(",") == 7
