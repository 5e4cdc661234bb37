# tests/test_config.py

import json
import math
from pathlib import Path

import pytest
import yaml
from pydantic import ValidationError

from app.core.config import Settings
from app.core.errors import ConfigurationError
from app.core.schemas import ExperimentConfig, load_experiment_config
from app.services.ensemble import PhaseMode, SingularityPolicy

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_reference_config_loads():
    experiment = load_experiment_config(CONFIGS / "reference.yaml")
    spec = experiment.to_run_spec()
    assert spec.noise.n_steps == 4750
    assert len(spec.echo.t_grid) == 81
    assert spec.echo.t_grid[40] == pytest.approx(5.0)
    assert spec.atom.tau_c == math.inf
    assert spec.phase_mode is PhaseMode.SHARED


def test_coherence_config_loads():
    spec = load_experiment_config(CONFIGS / "coherence.yaml").to_run_spec()
    assert spec.atom.tau_c == 10.0
    assert spec.singularity_policy is SingularityPolicy.FALLBACK
    assert spec.echo.t_grid == [5.0]


def test_unknown_key_is_rejected(write_experiment):
    with pytest.raises(ValidationError):
        load_experiment_config(write_experiment(noise={"colour": "pink"}))


def test_unknown_section_is_rejected(write_experiment, tmp_path):
    path = write_experiment()
    data = yaml.safe_load(path.read_text())
    data["plots"] = {"dpi": 300}
    path.write_text(yaml.safe_dump(data))
    with pytest.raises(ValidationError):
        load_experiment_config(path)


def test_incomplete_detection_grid(write_experiment):
    path = write_experiment()
    data = yaml.safe_load(path.read_text())
    del data["echo"]["t_points"]
    path.write_text(yaml.safe_dump(data))
    with pytest.raises(ValidationError):
        load_experiment_config(path)


def test_both_detection_grids_rejected(write_experiment):
    with pytest.raises(ValidationError):
        load_experiment_config(write_experiment(echo={"t_grid": [4.0, 5.0]}))


def test_misaligned_pulse_is_configuration_error(write_experiment):
    experiment = load_experiment_config(write_experiment(pulses={"duration1": 1.03}))
    with pytest.raises(ConfigurationError):
        experiment.to_run_spec()


def test_missing_file_and_non_mapping(tmp_path):
    with pytest.raises(ConfigurationError):
        load_experiment_config(tmp_path / "absent.yaml")
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigurationError):
        load_experiment_config(path)


def test_seed_override(write_experiment):
    experiment = load_experiment_config(write_experiment())
    assert experiment.with_seed(None) is experiment
    assert experiment.with_seed(99).to_run_spec().noise.seed == 99


def test_manifest_is_a_valid_experiment(write_experiment, tmp_path):
    experiment = load_experiment_config(write_experiment(atom={"tau_c": math.inf}))
    manifest = {"command": "simulate", "code_version": "x", "config": experiment.model_dump(), "seed": 3}
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest, allow_nan=True))

    reloaded = load_experiment_config(path)
    assert isinstance(reloaded, ExperimentConfig)
    assert reloaded == experiment


def test_settings_read_environment(monkeypatch):
    monkeypatch.setenv("ECHO_THREADS", "3")
    monkeypatch.setenv("ECHO_CHUNK_SIZE", "128")
    settings = Settings()
    assert settings.THREADS == 3
    assert settings.CHUNK_SIZE == 128
