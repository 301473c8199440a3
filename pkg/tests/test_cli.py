"""CLI tests via click's runner: all five commands, flag precedence,
config errors, and stage-named failures."""

import json

import pytest
from click.testing import CliRunner

from fairdyn.cli import main

SMOKE = """
seed = 11
questions = ["euthanasia"]
pipelines = ["topology"]
out_dir = "{out}"

[synthetic]
n_participants = 24
events_per_participant = 12.0

[ml]
cv_folds = 3
grid = "smoke"
"""


@pytest.fixture
def runner():
    return CliRunner()


def write_config(tmp_path, out_name="out"):
    path = tmp_path / "run.toml"
    path.write_text(SMOKE.format(out=tmp_path / out_name))
    return path


def test_generate_writes_dataset_and_meta(tmp_path, runner):
    cfg = write_config(tmp_path)
    result = runner.invoke(main, ["generate", "--config", str(cfg)])
    assert result.exit_code == 0, result.output
    out = tmp_path / "out"
    for name in ("participants.csv", "events.csv", "opinions.csv"):
        assert (out / name).exists()
    meta = json.loads((out / "dataset_meta.json").read_text())
    assert meta["participants"] == 24
    assert meta["seed"] == 11
    assert "config_hash" in meta


def test_audit_writes_report(tmp_path, runner):
    cfg = write_config(tmp_path)
    result = runner.invoke(main, ["audit", "--config", str(cfg)])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "out" / "audit_report.json").read_text())
    assert "euthanasia" in report["questions"]
    assert report["run"]["seed"] == 11
    assert (tmp_path / "out" / "audit_report_long.csv").exists()
    assert (tmp_path / "out" / "model_euthanasia_topology.json").exists()


def test_report_summarizes(tmp_path, runner):
    cfg = write_config(tmp_path)
    assert runner.invoke(main, ["audit", "--config", str(cfg)]).exit_code == 0
    path = tmp_path / "out" / "audit_report.json"
    result = runner.invoke(main, ["report", str(path)])
    assert result.exit_code == 0
    assert "euthanasia" in result.output
    assert "topology" in result.output
    assert "general" in result.output


def test_simulate_and_features(tmp_path, runner):
    cfg = write_config(tmp_path)
    result = runner.invoke(main, ["simulate", "--config", str(cfg)])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "out" / "trace_euthanasia.csv").exists()
    result = runner.invoke(main, ["features", "--config", str(cfg)])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "out" / "features_euthanasia_topology.csv").exists()
    assert (tmp_path / "out" / "snapshot_final.csv").exists()


def test_flag_overrides_config(tmp_path, runner):
    cfg = write_config(tmp_path)
    alt = tmp_path / "alt"
    result = runner.invoke(
        main, ["generate", "--config", str(cfg), "--out", str(alt), "--seed", "99"]
    )
    assert result.exit_code == 0, result.output
    meta = json.loads((alt / "dataset_meta.json").read_text())
    assert meta["seed"] == 99


def test_bad_config_exit_code_2(tmp_path, runner):
    path = tmp_path / "bad.toml"
    path.write_text("seed = 1\nquestions = [\"abortion\"]\n")
    result = runner.invoke(main, ["audit", "--config", str(path)])
    assert result.exit_code == 2
    assert "config error" in result.output


def test_missing_config_file_exit_code_2(tmp_path, runner):
    result = runner.invoke(main, ["audit", "--config", str(tmp_path / "nope.toml")])
    assert result.exit_code == 2


def test_stage_failure_named(tmp_path, runner):
    # dataset paths that do not exist -> the dataset stage is blamed
    path = tmp_path / "run.toml"
    path.write_text(
        f'out_dir = "{tmp_path / "out"}"\n'
        "[dataset_paths]\n"
        f'participants = "{tmp_path / "missing.csv"}"\n'
        f'events = "{tmp_path / "missing.csv"}"\n'
        f'opinions = "{tmp_path / "missing.csv"}"\n'
    )
    result = runner.invoke(main, ["audit", "--config", str(path)])
    assert result.exit_code == 3
    assert "dataset" in result.output


def test_unknown_question_flag_rejected(runner):
    result = runner.invoke(main, ["audit", "--questions", "abortion"])
    assert result.exit_code == 2


def test_repo_smoke_config_parses():
    from pathlib import Path

    from fairdyn.config import load_config

    path = Path(__file__).resolve().parents[1] / "configs" / "smoke.toml"
    cfg = load_config(path)
    assert cfg.synthetic.n_participants == 20
    assert cfg.ml.grid == "smoke"
