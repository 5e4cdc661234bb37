# app/core/schemas.py
"""
Esquema dos arquivos de experimento (YAML ou JSON).

Seções: atom, pulses, noise, echo, ensemble, output. Chaves desconhecidas são
rejeitadas antes de qualquer cálculo. O manifest.json gravado pelo CLI também
é um arquivo de experimento válido (a seção `config`).
"""

import json
import math
from pathlib import Path
from typing import List, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..services.echo import AtomParams, EchoConfig
from ..services.ensemble import PhaseMode, RunSpec, SingularityPolicy
from ..services.noise import NoiseParams
from ..services.propagator import PulseParams, WavevectorTag, grid_steps
from .config import settings
from .errors import ConfigurationError


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class AtomSection(_Section):
    eps0: float = 0.0
    sigma0: float = Field(default=1.0, ge=0.0)
    dipole_mag: float = Field(default=1.0, gt=0.0)
    tau_c: float = Field(default=math.inf, gt=0.0)


class PulsesSection(_Section):
    rabi: float = Field(gt=0.0)
    duration1: float = Field(ge=0.0)
    duration2: float = Field(ge=0.0)


class NoiseSection(_Section):
    phi_amp: float = Field(ge=0.0)
    gamma: float = Field(gt=0.0)
    dt: float = Field(gt=0.0)
    seed: int = Field(default=0, ge=0, lt=2**64)


class EchoSection(_Section):
    """Grade de detecção explícita (`t_grid`) ou uniforme (`t_start`, `t_stop`, `t_points`)."""
    tau: float = Field(gt=0.0)
    t_grid: Optional[List[float]] = None
    t_start: Optional[float] = None
    t_stop: Optional[float] = None
    t_points: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _one_grid(self) -> "EchoSection":
        uniform = (self.t_start, self.t_stop, self.t_points)
        if self.t_grid is not None and any(v is not None for v in uniform):
            raise ValueError("Informe t_grid OU (t_start, t_stop, t_points), não ambos.")
        if self.t_grid is None and any(v is None for v in uniform):
            raise ValueError("Grade de detecção incompleta: informe t_grid ou t_start, t_stop e t_points.")
        return self

    def resolved_grid(self) -> List[float]:
        if self.t_grid is not None:
            return list(self.t_grid)
        return [float(t) for t in np.linspace(self.t_start, self.t_stop, self.t_points)]


class EnsembleSection(_Section):
    n_repeats: int = Field(ge=1)
    phase_mode: PhaseMode = PhaseMode.SHARED
    singularity_policy: SingularityPolicy = SingularityPolicy.ABORT
    # None = largura de Freedman-Diaconis para o histograma de F
    n_bins: Optional[int] = Field(default=None, ge=2)
    # Caixas de amplitude do mapa P(A | T)
    distribution_bins: int = Field(default=50, ge=2)


class OutputSection(_Section):
    prefix: str = settings.OUTPUT_PREFIX


class ExperimentConfig(_Section):
    atom: AtomSection = AtomSection()
    pulses: PulsesSection
    noise: NoiseSection
    echo: EchoSection
    ensemble: EnsembleSection
    output: OutputSection = OutputSection()

    def with_seed(self, seed: Optional[int]) -> "ExperimentConfig":
        """Cópia com a semente sobrescrita (flag --seed); None mantém a do arquivo."""
        if seed is None:
            return self
        noise = NoiseSection(**{**self.noise.model_dump(), "seed": seed})
        return self.model_copy(update={"noise": noise})

    def to_run_spec(self) -> RunSpec:
        """Converte o arquivo validado no RunSpec do ensemble; o ruído cobre o pulso mais longo."""
        dt = self.noise.dt
        n_steps = max(grid_steps(self.pulses.duration1, dt), grid_steps(self.pulses.duration2, dt), 1)

        echo = EchoConfig(
            tau=self.echo.tau,
            t_grid=self.echo.resolved_grid(),
            pulse1=PulseParams(rabi=self.pulses.rabi, duration=self.pulses.duration1, wavevector_tag=WavevectorTag.K1),
            pulse2=PulseParams(rabi=self.pulses.rabi, duration=self.pulses.duration2, wavevector_tag=WavevectorTag.K2),
        )
        return RunSpec(
            echo=echo,
            atom=AtomParams(**self.atom.model_dump()),
            noise=NoiseParams(n_steps=n_steps, **self.noise.model_dump()),
            n_repeats=self.ensemble.n_repeats,
            phase_mode=self.ensemble.phase_mode,
            singularity_policy=self.ensemble.singularity_policy,
            n_bins=self.ensemble.n_bins,
        )


def load_experiment_config(path: Path) -> ExperimentConfig:
    """Lê e valida um arquivo de experimento; aceita também um manifest.json."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Arquivo de configuração não encontrado: {path}")

    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text) if path.suffix.lower() == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigurationError(f"Não foi possível ler {path}: {e}") from e

    if not isinstance(data, dict):
        raise ConfigurationError(f"O arquivo {path} deve conter um mapeamento de seções.")
    if "command" in data and "config" in data:
        data = data["config"]

    return ExperimentConfig.model_validate(data)
