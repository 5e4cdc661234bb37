# app/services/ensemble.py

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import skew

from ..core.config import settings
from ..core.errors import ConfigurationError, SingularityError
from .echo import (
    AMPLITUDE_NORMALIZATION,
    AtomParams,
    EchoConfig,
    decoherence_factor,
    ideal_chi,
    ideal_strength_factor,
    inhomogeneous_envelope,
    strength_factor,
)
from .noise import NoiseParams, PhasePath, sample_paths
from .perturbation import PerturbationInputs, mean_strength_factor
from .propagator import ChiParams, PulseParams, decompose_unitary, direct_unitary, grid_steps, integrate_chi_batch

logger = logging.getLogger(__name__)


# ----------------------------------------------------------------------
# 1. TIPOS DE DOMÍNIO
# ----------------------------------------------------------------------

class PhaseMode(str, Enum):
    """SHARED: uma realização de phi para os dois pulsos. INDEPENDENT: uma por pulso."""
    SHARED = "shared"
    INDEPENDENT = "independent"


class SingularityPolicy(str, Enum):
    ABORT = "abort"
    SKIP = "skip"
    # Recalcula a realização pelo produto direto + decomposição (F só depende dos unitários)
    FALLBACK = "fallback"


class SweepParameter(str, Enum):
    PHI = "PHI"
    GAMMA = "GAMMA"
    TAU = "TAU"


class RunSpec(BaseModel):
    """Especificação completa de um ensemble de Monte Carlo."""
    model_config = ConfigDict(frozen=True)

    echo: EchoConfig
    atom: AtomParams = AtomParams()
    noise: NoiseParams
    n_repeats: int = Field(ge=1)
    phase_mode: PhaseMode = PhaseMode.SHARED
    singularity_policy: SingularityPolicy = SingularityPolicy.ABORT
    # None = largura de Freedman-Diaconis
    n_bins: Optional[int] = Field(default=None, ge=2)

    @model_validator(mode="after")
    def _consistent_pulses(self) -> "RunSpec":
        pulse1, pulse2 = self.echo.pulse1, self.echo.pulse2
        if pulse1.rabi != pulse2.rabi:
            raise ValueError("Os dois pulsos devem ter a mesma frequência de Rabi.")
        for pulse in (pulse1, pulse2):
            if grid_steps(pulse.duration, self.noise.dt) > self.noise.n_steps:
                raise ValueError(
                    f"noise.n_steps={self.noise.n_steps} não cobre o pulso de duração {pulse.duration}."
                )
        return self

    @property
    def rabi(self) -> float:
        return self.echo.pulse1.rabi

    @property
    def equal_pulses(self) -> bool:
        return self.echo.pulse1.duration == self.echo.pulse2.duration


@dataclass(frozen=True)
class EnsembleStats:
    f_values: np.ndarray
    mean_f: float
    se_f: float
    mode_f: float
    ideal_f: float
    skewness: float
    histogram_centers: np.ndarray
    histogram_probabilities: np.ndarray
    t_grid: np.ndarray
    signal_mean: np.ndarray
    signal_mode: np.ndarray
    signal_ideal: np.ndarray
    n_skipped: int = 0


@dataclass(frozen=True)
class SignalDistribution:
    """P(A | T): uma linha de probabilidades por tempo de detecção."""
    t_values: np.ndarray
    bin_edges: np.ndarray
    probabilities: np.ndarray

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


@dataclass(frozen=True)
class SweepRow:
    value: float
    mc: float
    se: float
    analytic: float


@dataclass(frozen=True)
class _ChunkResult:
    f_values: np.ndarray
    keep: np.ndarray


# ----------------------------------------------------------------------
# 2. EXECUÇÃO DE UM BLOCO DE REPETIÇÕES
# ----------------------------------------------------------------------

def _ideal_factor(spec: RunSpec) -> float:
    return float(strength_factor(ideal_chi(spec.echo.pulse1), ideal_chi(spec.echo.pulse2), spec.rabi))


def _direct_factor(spec: RunSpec, row1: np.ndarray, row2: np.ndarray) -> float:
    """F de uma realização via produto direto dos unitários (sem integrar chi)."""
    dt = spec.noise.dt
    chi = decompose_unitary(direct_unitary(spec.echo.pulse1, PhasePath(row1, dt)), spec.rabi)
    zeta = decompose_unitary(direct_unitary(spec.echo.pulse2, PhasePath(row2, dt)), spec.rabi)
    return float(strength_factor(chi, zeta, spec.rabi))


def _run_chunk(spec: RunSpec, start: int, stop: int) -> _ChunkResult:
    """Repetições [start, stop): cada uma depende apenas de (seed, índice da repetição)."""
    pulse1, pulse2 = spec.echo.pulse1, spec.echo.pulse2
    dt = spec.noise.dt
    repeats = range(start, stop)

    paths1 = sample_paths(spec.noise, [2 * r for r in repeats])
    if spec.phase_mode is PhaseMode.SHARED:
        paths2 = paths1
    else:
        paths2 = sample_paths(spec.noise, [2 * r + 1 for r in repeats])

    chi, singular1, step1 = integrate_chi_batch(pulse1, paths1, dt)
    if paths2 is paths1 and pulse2.duration == pulse1.duration:
        zeta, singular2, step2 = chi, singular1, step1
    else:
        zeta, singular2, step2 = integrate_chi_batch(pulse2, paths2, dt)

    with np.errstate(all="ignore"):
        f_values = np.asarray(strength_factor(chi, zeta, spec.rabi), dtype=float)

    # Realizações sem ruído recebem exatamente o valor ideal
    n1, n2 = grid_steps(pulse1.duration, dt), grid_steps(pulse2.duration, dt)
    quiet = ~paths1[:, :n1].any(axis=1) & ~paths2[:, :n2].any(axis=1)
    f_values[quiet] = _ideal_factor(spec)

    keep = np.ones(len(f_values), dtype=bool)
    for row in np.flatnonzero(singular1 | singular2):
        repeat_index = start + int(row)
        step = int(step1[row]) if singular1[row] else int(step2[row])

        if spec.singularity_policy is SingularityPolicy.ABORT:
            raise SingularityError(
                f"Singularidade de Wei-Norman no passo {step}", step=step, repeat_index=repeat_index
            )
        if spec.singularity_policy is SingularityPolicy.SKIP:
            keep[row] = False
        else:
            f_values[row] = _direct_factor(spec, paths1[row], paths2[row])

    return _ChunkResult(f_values=f_values, keep=keep)


# ----------------------------------------------------------------------
# 3. ESTATÍSTICAS
# ----------------------------------------------------------------------

def _sample_mean(values: np.ndarray) -> float:
    """Média na ordem dos índices; amostra constante devolve o próprio valor."""
    if np.ptp(values) == 0:
        return float(values[0])
    return math.fsum(values) / len(values)


def _histogram(values: np.ndarray, n_bins: Optional[int]):
    """Histograma normalizado (largura de Freedman-Diaconis por padrão)."""
    if np.ptp(values) == 0:
        return np.array([float(values[0])]), np.array([1.0])
    counts, edges = np.histogram(values, bins=n_bins if n_bins else "fd")
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers, counts / counts.sum()


def signal_weight(spec: RunSpec, t_detect) -> np.ndarray:
    """Parte determinística de A_open(T) = peso(T)·F."""
    atom = spec.atom
    return (
        atom.dipole_mag ** 2
        / AMPLITUDE_NORMALIZATION
        * np.asarray(inhomogeneous_envelope(atom, t_detect, spec.echo.tau))
        * np.asarray(decoherence_factor(atom, t_detect, spec.echo.tau))
    )


def _collect(spec: RunSpec, threads: int, chunk_size: int) -> _ChunkResult:
    n = spec.n_repeats
    bounds = [(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]

    if threads <= 1 or len(bounds) == 1:
        results = [_run_chunk(spec, start, stop) for start, stop in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            # map devolve na ordem dos blocos: a redução não depende do agendamento
            results = list(pool.map(lambda b: _run_chunk(spec, *b), bounds))

    return _ChunkResult(
        f_values=np.concatenate([r.f_values for r in results]),
        keep=np.concatenate([r.keep for r in results]),
    )


# ----------------------------------------------------------------------
# 4. OPERAÇÕES PÚBLICAS
# ----------------------------------------------------------------------

def run_ensemble(spec: RunSpec, threads: Optional[int] = None, chunk_size: Optional[int] = None) -> EnsembleStats:
    """
    Repete o experimento de dois pulsos sobre caminhos aleatórios de fase e agrega F e A(T).
    O resultado é idêntico bit a bit para qualquer número de threads.
    """
    threads = threads or settings.THREADS
    chunk_size = chunk_size or settings.CHUNK_SIZE
    logger.info(
        f"-> Ensemble: {spec.n_repeats} repetições, Φ={spec.noise.phi_amp:g}, γ={spec.noise.gamma:g}, "
        f"modo={spec.phase_mode.value}, threads={threads}"
    )

    collected = _collect(spec, threads, chunk_size)
    f_values = collected.f_values[collected.keep]
    n_skipped = int((~collected.keep).sum())
    if n_skipped:
        logger.warning(f"AVISO: {n_skipped} repetições descartadas por singularidade.")
    if f_values.size == 0:
        raise SingularityError("Todas as repetições foram descartadas por singularidade.")

    n = f_values.size
    mean_f = _sample_mean(f_values)
    se_f = float(np.std(f_values, ddof=1) / math.sqrt(n)) if n > 1 and np.ptp(f_values) > 0 else 0.0
    centers, probabilities = _histogram(f_values, spec.n_bins)
    mode_f = float(centers[int(np.argmax(probabilities))])
    ideal_f = _ideal_factor(spec)
    skewness = float(skew(f_values)) if np.ptp(f_values) > 0 else 0.0

    t_grid = np.asarray(spec.echo.t_grid, dtype=float)
    weight = signal_weight(spec, t_grid)

    logger.info(f"-> Ensemble concluído: <F>={mean_f:.6g} ± {se_f:.2g}, moda={mode_f:.6g}, F_ideal={ideal_f:.6g}")
    return EnsembleStats(
        f_values=f_values,
        mean_f=mean_f,
        se_f=se_f,
        mode_f=mode_f,
        ideal_f=ideal_f,
        skewness=skewness,
        histogram_centers=centers,
        histogram_probabilities=probabilities,
        t_grid=t_grid,
        signal_mean=weight * mean_f,
        signal_mode=weight * mode_f,
        signal_ideal=weight * ideal_f,
        n_skipped=n_skipped,
    )


def signal_distribution(
    spec: RunSpec,
    t_values: Sequence[float],
    n_bins: int,
    stats: Optional[EnsembleStats] = None,
    threads: Optional[int] = None,
) -> SignalDistribution:
    """Histogramas P(A | T) sobre as repetições, com as mesmas caixas para todo T."""
    if n_bins < 2:
        raise ConfigurationError("n_bins deve ser >= 2.")
    stats = stats or run_ensemble(spec, threads=threads)

    t_values = np.asarray(t_values, dtype=float)
    amplitudes = signal_weight(spec, t_values)[:, np.newaxis] * stats.f_values[np.newaxis, :]
    upper = float(amplitudes.max())
    edges = np.linspace(0.0, upper if upper > 0 else 1.0, n_bins + 1)

    probabilities = np.array([np.histogram(row, bins=edges)[0] for row in amplitudes], dtype=float)
    probabilities /= stats.f_values.size
    return SignalDistribution(t_values=t_values, bin_edges=edges, probabilities=probabilities)


def revival_signal(stats: EnsembleStats, spec: RunSpec) -> float:
    """<A_open> em T = τ: (|μ|²/64)·e^{-2τ/τc}·<F>."""
    return float(signal_weight(spec, spec.echo.tau) * stats.mean_f)


def _perturbation_inputs(spec: RunSpec) -> PerturbationInputs:
    return PerturbationInputs(
        rabi=spec.rabi,
        delta_tau=spec.echo.pulse1.duration,
        phi_amp=spec.noise.phi_amp,
        gamma=spec.noise.gamma,
    )


def _with_value(base: RunSpec, parameter: SweepParameter, value: float) -> RunSpec:
    if parameter is SweepParameter.PHI:
        noise = NoiseParams(**{**base.noise.model_dump(), "phi_amp": value})
        return base.model_copy(update={"noise": noise})
    if parameter is SweepParameter.GAMMA:
        noise = NoiseParams(**{**base.noise.model_dump(), "gamma": value})
        return base.model_copy(update={"noise": noise})
    echo = EchoConfig(**{**base.echo.model_dump(), "tau": value})
    return base.model_copy(update={"echo": echo})


def sweep_parameter(
    base: RunSpec,
    parameter: SweepParameter,
    values: Sequence[float],
    threads: Optional[int] = None,
) -> List[SweepRow]:
    """
    Um ensemble por valor. PHI/GAMMA: <F> - F_ideal contra a fórmula fechada.
    TAU: <A_open> em T = τ contra (|μ|²/64)·e^{-2τ/τc}·<F> analítico.
    """
    values = list(values)
    if not values:
        raise ConfigurationError("A varredura precisa de pelo menos um valor.")

    rows = []
    for value in values:
        spec = _with_value(base, parameter, float(value))
        stats = run_ensemble(spec, threads=threads)
        analytic = math.nan

        if parameter is SweepParameter.TAU:
            weight = float(signal_weight(spec, spec.echo.tau))
            if spec.equal_pulses:
                analytic = weight * mean_strength_factor(_perturbation_inputs(spec))
            rows.append(SweepRow(float(value), revival_signal(stats, spec), weight * stats.se_f, analytic))
            continue

        if spec.equal_pulses:
            inputs = _perturbation_inputs(spec)
            analytic = mean_strength_factor(inputs) - ideal_strength_factor(inputs.rabi, inputs.delta_tau)
        rows.append(SweepRow(float(value), stats.mean_f - stats.ideal_f, stats.se_f, analytic))

    return rows
