# tests/conftest.py

from pathlib import Path

import numpy as np
import pytest
import yaml

from app.services.echo import AtomParams, EchoConfig
from app.services.ensemble import PhaseMode, RunSpec, SingularityPolicy
from app.services.noise import NoiseParams
from app.services.propagator import PulseParams, WavevectorTag

# Parâmetros de referência: pulsos iguais, ruído fraco e correlacionado
RABI = 1.0
DELTA_TAU = 4.75
GAMMA = 1.0 / 4.587
PHI = 0.08
TAU = 5.0

# Passo grosso para os testes de ensemble (4.75 = 95 passos)
COARSE_DT = 0.05


@pytest.fixture
def pulse() -> PulseParams:
    return PulseParams(rabi=RABI, duration=DELTA_TAU)


@pytest.fixture
def make_spec():
    """Fábrica de RunSpec pequenos; qualquer campo pode ser sobrescrito."""

    def _make(
        phi_amp: float = PHI,
        gamma: float = GAMMA,
        dt: float = COARSE_DT,
        n_repeats: int = 300,
        seed: int = 11,
        tau: float = TAU,
        tau_c: float = float("inf"),
        duration1: float = DELTA_TAU,
        duration2: float = DELTA_TAU,
        phase_mode: PhaseMode = PhaseMode.SHARED,
        policy: SingularityPolicy = SingularityPolicy.ABORT,
    ) -> RunSpec:
        n_steps = round(max(duration1, duration2) / dt)
        return RunSpec(
            echo=EchoConfig(
                tau=tau,
                t_grid=[float(t) for t in np.linspace(3.0, 7.0, 41)],
                pulse1=PulseParams(rabi=RABI, duration=duration1),
                pulse2=PulseParams(rabi=RABI, duration=duration2, wavevector_tag=WavevectorTag.K2),
            ),
            atom=AtomParams(tau_c=tau_c),
            noise=NoiseParams(phi_amp=phi_amp, gamma=gamma, dt=dt, seed=seed, n_steps=n_steps),
            n_repeats=n_repeats,
            phase_mode=phase_mode,
            singularity_policy=policy,
        )

    return _make


def experiment_dict(**overrides) -> dict:
    """Arquivo de experimento mínimo (dt grosso, poucas repetições)."""
    data = {
        "atom": {"eps0": 0.0, "sigma0": 1.0, "dipole_mag": 1.0},
        "pulses": {"rabi": RABI, "duration1": DELTA_TAU, "duration2": DELTA_TAU},
        "noise": {"phi_amp": PHI, "gamma": GAMMA, "dt": COARSE_DT, "seed": 3},
        "echo": {"tau": TAU, "t_start": 3.0, "t_stop": 7.0, "t_points": 41},
        "ensemble": {"n_repeats": 200, "distribution_bins": 20},
    }
    for section, values in overrides.items():
        data[section] = {**data.get(section, {}), **values}
    return data


@pytest.fixture
def write_experiment(tmp_path: Path):
    def _write(name: str = "experiment.yaml", **overrides) -> Path:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(experiment_dict(**overrides)), encoding="utf-8")
        return path

    return _write
