# app/services/noise.py

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.signal import lfilter

from ..core.errors import DomainError

logger = logging.getLogger(__name__)

# Tolerância relativa para decidir se um atraso/duração cai na grade dt
GRID_TOLERANCE = 1e-9


# ----------------------------------------------------------------------
# 1. TIPOS DE DOMÍNIO
# ----------------------------------------------------------------------

class NoiseParams(BaseModel):
    """
    Parâmetros do processo de Ornstein-Uhlenbeck da fase aleatória.

    Correlação estacionária: <phi(t1) phi(t2)> = phi_amp² · exp(-gamma·|t1 - t2|).
    """
    model_config = ConfigDict(frozen=True)

    phi_amp: float = Field(ge=0.0, description="Amplitude Φ da flutuação (rad)")
    gamma: float = Field(gt=0.0, description="Força de correlação γ (1/tempo)")
    dt: float = Field(gt=0.0, description="Passo da grade de tempo")
    seed: int = Field(ge=0, lt=2**64)
    n_steps: int = Field(ge=1)

    @model_validator(mode="after")
    def _warn_unresolved_correlation(self) -> "NoiseParams":
        if self.dt * self.gamma >= 1.0:
            logger.warning(
                f"AVISO: dt·γ = {self.dt * self.gamma:.3g} >= 1; a correlação do ruído não é resolvida pela grade."
            )
        return self

    @property
    def decay(self) -> float:
        """Fator e^{-γ·dt} da atualização exata de um passo."""
        return math.exp(-self.gamma * self.dt)

    @property
    def diffusion(self) -> float:
        """Desvio padrão Φ·sqrt(1 - e^{-2γ·dt}) do termo aleatório de um passo."""
        return self.phi_amp * math.sqrt(-math.expm1(-2.0 * self.gamma * self.dt))


@dataclass(frozen=True)
class PhasePath:
    """Realização de phi(t) nos pontos t_n = n·dt (constante por partes em [t_n, t_{n+1}))."""
    values: np.ndarray
    dt: float

    @property
    def n_steps(self) -> int:
        return len(self.values) - 1

    @property
    def duration(self) -> float:
        return self.n_steps * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.values)) * self.dt


# ----------------------------------------------------------------------
# 2. GERADORES REPRODUTÍVEIS
# ----------------------------------------------------------------------

def stream_generator(seed: int, stream_index: int) -> np.random.Generator:
    """
    Subfluxo independente e reprodutível: (seed, stream_index) -> Generator.
    O mesmo par gera sempre a mesma sequência, não importa a ordem de execução.
    """
    if stream_index < 0:
        raise DomainError(f"stream_index deve ser >= 0, recebido {stream_index}")
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(stream_index,))
    return np.random.Generator(np.random.PCG64(sequence))


# ----------------------------------------------------------------------
# 3. AMOSTRAGEM EXATA DO PROCESSO DE OU
# ----------------------------------------------------------------------

def ou_transition(phi: np.ndarray | float, params: NoiseParams, xi: np.ndarray | float) -> np.ndarray | float:
    """Atualização exata: phi_{n+1} = phi_n·e^{-γdt} + Φ·sqrt(1 - e^{-2γdt})·xi."""
    return phi * params.decay + params.diffusion * xi


def sample_paths(params: NoiseParams, stream_indices: Sequence[int]) -> np.ndarray:
    """
    Amostra um caminho por índice de subfluxo. Retorna matriz (len(stream_indices), n_steps + 1);
    a linha i é idêntica a sample_path(params, stream_indices[i]).values.
    """
    n_points = params.n_steps + 1
    forcing = np.empty((len(stream_indices), n_points))

    for row, stream_index in enumerate(stream_indices):
        forcing[row] = stream_generator(params.seed, stream_index).standard_normal(n_points)

    # Primeiro ponto vem da lei estacionária N(0, Φ²); os demais da atualização exata.
    forcing[:, 0] *= params.phi_amp
    forcing[:, 1:] *= params.diffusion

    # phi_n = decay·phi_{n-1} + forcing_n, avaliado como filtro IIR de primeira ordem
    return lfilter([1.0], [1.0, -params.decay], forcing, axis=1)


def sample_path(params: NoiseParams, stream_index: int) -> PhasePath:
    """Caminho estacionário de OU para o subfluxo `stream_index`."""
    values = sample_paths(params, [stream_index])[0]
    return PhasePath(values=values, dt=params.dt)


# ----------------------------------------------------------------------
# 4. VERIFICAÇÃO ESTATÍSTICA
# ----------------------------------------------------------------------

def lag_in_steps(lag: float, dt: float) -> int:
    """Converte um atraso em número de passos; exige múltiplo inteiro de dt."""
    steps = round(lag / dt)
    if steps < 0 or abs(steps * dt - lag) > GRID_TOLERANCE * max(1.0, abs(lag)):
        raise DomainError(f"O atraso {lag} não é múltiplo inteiro não negativo de dt={dt}.")
    return steps


def autocorrelation_estimate(paths: Iterable[PhasePath], lag: float) -> Tuple[float, float]:
    """
    Estimativa empírica de <phi(t) phi(t+lag)> e seu erro padrão.

    Cada caminho contribui com a média temporal sobre todos os t admissíveis;
    o erro padrão vem da dispersão entre caminhos (que são independentes).
    """
    paths = list(paths)
    if len(paths) < 2:
        raise DomainError("São necessários pelo menos 2 caminhos para estimar o erro padrão.")

    dt = paths[0].dt
    steps = lag_in_steps(lag, dt)

    per_path = []
    for path in paths:
        if steps > path.n_steps:
            raise DomainError(f"O atraso {lag} excede a duração do caminho ({path.duration}).")
        values = path.values
        per_path.append(np.mean(values[: len(values) - steps] * values[steps:]))

    per_path = np.asarray(per_path)
    estimate = float(np.mean(per_path))
    standard_error = float(np.std(per_path, ddof=1) / math.sqrt(len(per_path)))
    return estimate, standard_error
