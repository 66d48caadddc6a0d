"""Command-line interface: exit codes and file outputs."""

import json

import pytest

from trajcorr.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main


@pytest.fixture
def tiny_config(tmp_path):
    cfg = {
        "scenario": "oracle-check",
        "seed": 3,
        "output_dir": str(tmp_path / "out"),
        "model": {"gamma_b": 1.0},
        "trajectory": {"dt": 0.002, "t_final": 0.5, "record_stride": 125,
                       "n_trajectories": 64},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_validate_good_config(tiny_config, capsys):
    assert main(["validate", "--config", str(tiny_config)]) == EXIT_OK
    assert "oracle-check" in capsys.readouterr().out


def test_validate_bad_config(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"scenario": "oracle-check", "model": {}}))
    assert main(["validate", "--config", str(path)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_validate_missing_file(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG


def test_run_writes_outputs(tiny_config, tmp_path):
    out = tmp_path / "results"
    assert main(["run", "--config", str(tiny_config), "--threads", "1",
                 "--out", str(out)]) == EXIT_OK
    assert (out / "oracle-check.csv").exists()
    assert (out / "oracle-check.json").exists()
    assert (out / "oracle-check.manifest.json").exists()


def test_run_bad_thread_count(tiny_config):
    assert main(["run", "--config", str(tiny_config), "--threads", "0"]) == EXIT_CONFIG


def test_run_numerical_failure_exit_code(tmp_path):
    # dt so coarse the per-step jump probability guard trips
    cfg = {
        "scenario": "oracle-check",
        "seed": 3,
        "output_dir": str(tmp_path / "out"),
        "model": {"gamma_b": 1.0},
        "trajectory": {"dt": 1.0, "t_final": 2.0, "record_stride": 1,
                       "n_trajectories": 4},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(path), "--threads", "1"]) == EXIT_NUMERICAL


def test_seed_override_recorded_in_manifest(tiny_config, tmp_path):
    out = tmp_path / "seeded"
    assert main(["run", "--config", str(tiny_config), "--threads", "1",
                 "--seed", "99", "--out", str(out)]) == EXIT_OK
    manifest = json.loads((out / "oracle-check.manifest.json").read_text())
    assert manifest["master_seed"] == 99
