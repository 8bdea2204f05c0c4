import pytest
import yaml

from splitkd.cli import main
from splitkd.scenario_io import default_scenario_text


def test_compare_writes_files(tmp_path, capsys):
    assert main(["compare", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "compare_rows.csv").exists()
    summary = (tmp_path / "compare_summary.txt").read_text()
    assert capsys.readouterr().out == summary


def test_run_single_regime(tmp_path):
    # device-only never fits the default budget, so the trial is infeasible everywhere
    assert main(["run", "--regime", "normal", "--method", "device-only", "--out", str(tmp_path)]) == 2
    text = (tmp_path / "run_rows.csv").read_text()
    assert "device_only,normal" in text


def test_run_rejects_all():
    assert main(["run", "--regime", "all"]) == 1


def test_plan(capsys):
    assert main(["plan", "--device", "2", "--time", "5"]) == 0
    out = capsys.readouterr().out
    assert "cut 1" in out and "88 candidates" in out


def test_plan_bad_device():
    assert main(["plan", "--device", "42"]) == 1


def test_kd_selftest(capsys):
    assert main(["kd-selftest"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_catalog(capsys):
    assert main(["catalog"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 7


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_bad_scenario(tmp_path):
    path = tmp_path / "s.yaml"
    path.write_text("regime: good\n")
    assert main(["run", "--scenario", str(path)]) == 1
    assert main(["run", "--scenario", str(tmp_path / "missing.yaml")]) == 1


def test_infeasible_exit_code(tmp_path):
    data = yaml.safe_load(default_scenario_text())
    data["delay_budget_s"] = 0.001
    path = tmp_path / "tight.yaml"
    path.write_text(yaml.safe_dump(data))
    assert main(["run", "--scenario", str(path)]) == 2
    assert main(["plan", "--scenario", str(path)]) == 2


def test_seed_override(capsys):
    assert main(["run", "--seed", "5"]) == 0
    assert "seed: 5" in capsys.readouterr().out
