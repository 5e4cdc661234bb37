# app/services/perturbation.py

import logging
import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.signal import lfilter

from .echo import ideal_strength_factor
from .noise import NoiseParams, PhasePath, sample_paths
from .propagator import ChiParams, PulseParams, checked_steps, grid_steps

logger = logging.getLogger(__name__)


class PerturbationInputs(BaseModel):
    """Entradas das fórmulas fechadas de pequeno ruído (pulsos iguais de duração δτ)."""
    model_config = ConfigDict(frozen=True)

    rabi: float = Field(gt=0.0)
    delta_tau: float = Field(ge=0.0)
    phi_amp: float = Field(ge=0.0)
    gamma: float = Field(gt=0.0)


# ----------------------------------------------------------------------
# 1. DINÂMICA LINEARIZADA
# ----------------------------------------------------------------------

def linearized_chi_batch(pulse: PulseParams, values: np.ndarray, dt: float) -> ChiParams:
    """
    Solução linearizada para vários caminhos (phi constante por passo).

    (chi2, chi3) obedecem a uma equação linear; com w = chi2 + i·chi3,
    dw/dt = phi - 2iΩ·w, cuja propagação de um passo é exata:
        w_{n+1} = e^{-2iΩdt}·w_n + phi_n·(1 - e^{-2iΩdt})/(2iΩ).
    chi1 = -t + ∫ [phi²/2 + 2Ωχ3φ + 2Ω²χ3² - 2Ω²χ2²] é integrado por trapézios.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    steps = checked_steps(pulse, values.shape[1], dt)
    if steps == 0:
        zeros = np.zeros(values.shape[0])
        return ChiParams(zeros.copy(), zeros.copy(), zeros)

    phase = values[:, :steps]
    rotation_rate = 2.0 * pulse.rabi
    turn = np.exp(-1j * rotation_rate * dt)
    gain = (1.0 - turn) / (1j * rotation_rate)

    # w nos pontos t_1..t_N; w(t_0) = 0
    w = lfilter([gain], [1.0, -turn], phase.astype(complex), axis=1)
    w = np.concatenate([np.zeros((phase.shape[0], 1), dtype=complex), w], axis=1)
    chi2, chi3 = w.real, w.imag

    a = rotation_rate
    chi3_mid = 0.5 * (chi3[:, :-1] + chi3[:, 1:])
    squares = 0.5 * a ** 2 * (chi3 ** 2 - chi2 ** 2)
    squares_mid = 0.5 * (squares[:, :-1] + squares[:, 1:])
    integrand = 0.5 * phase ** 2 + a * chi3_mid * phase + squares_mid
    chi1 = -steps * dt + dt * integrand.sum(axis=1)

    return ChiParams(chi1, chi2[:, -1], chi3[:, -1])


def linearized_chi_path(pulse: PulseParams, phase: PhasePath) -> ChiParams:
    """(chi1, chi2, chi3) da teoria linearizada em t = duration."""
    chi = linearized_chi_batch(pulse, phase.values[np.newaxis, :], phase.dt)
    return ChiParams(float(chi.chi1[0]), float(chi.chi2[0]), float(chi.chi3[0]))


# ----------------------------------------------------------------------
# 2. MOMENTOS EM FORMA FECHADA
# ----------------------------------------------------------------------

def chi2sq_mean(p: PerturbationInputs) -> float:
    """<(chi2⁽¹⁾)²> para ruído de OU."""
    g, w, L = p.gamma, p.rabi, p.delta_tau
    d = g ** 2 + 4.0 * w ** 2
    return p.phi_amp ** 2 * (
        g * L / d
        + 2.0 * g * math.exp(-g * L) * (g * math.cos(2.0 * L * w) - 2.0 * w * math.sin(2.0 * L * w)) / d ** 2
        + (g * math.sin(4.0 * L * w) - 2.0 * w * math.cos(4.0 * L * w)) / (4.0 * w * d)
        + (8.0 * w ** 2 - 6.0 * g ** 2) / (4.0 * d ** 2)
    )


def chi1_mean(p: PerturbationInputs) -> float:
    """<chi1⁽¹⁾>: média da parte induzida pelo ruído (o deslocamento -δτ fica de fora)."""
    g, w, L = p.gamma, p.rabi, p.delta_tau
    d = g ** 2 + 4.0 * w ** 2
    return p.phi_amp ** 2 * (
        g ** 2 * L / (2.0 * g ** 2 + 8.0 * w ** 2)
        - 2.0 * g * w * math.exp(-g * L) * (g * math.sin(2.0 * L * w) + 2.0 * w * math.cos(2.0 * L * w)) / d ** 2
        + (w * math.sin(4.0 * L * w) - g * math.sin(2.0 * L * w) ** 2) / (2.0 * d)
        + 4.0 * g * w ** 2 / d ** 2
    )


def chi1_sensitivity(p: PerturbationInputs) -> float:
    """Coeficiente de chi1⁽¹⁾ em F: -128Ω sin⁵(δτΩ)(2cos(δτΩ) + cos(3δτΩ))."""
    x = p.delta_tau * p.rabi
    return -128.0 * p.rabi * math.sin(x) ** 5 * (2.0 * math.cos(x) + math.cos(3.0 * x))


def chi2_curvature(p: PerturbationInputs) -> float:
    """Coeficiente de (chi2⁽¹⁾)² em F: 64Ω² sin⁴(δτΩ) cos(2δτΩ)(2cos(2δτΩ) + 1)."""
    x = p.delta_tau * p.rabi
    return 64.0 * p.rabi ** 2 * math.sin(x) ** 4 * math.cos(2.0 * x) * (2.0 * math.cos(2.0 * x) + 1.0)


def perturbed_factor(chi1_fluct, chi2_fluct, p: PerturbationInputs):
    """F de uma realização até segunda ordem nas flutuações (chi = zeta, mesma realização)."""
    value = (
        ideal_strength_factor(p.rabi, p.delta_tau)
        + chi1_sensitivity(p) * np.asarray(chi1_fluct)
        + chi2_curvature(p) * np.asarray(chi2_fluct) ** 2
    )
    return value if value.ndim else float(value)


def mean_strength_factor(p: PerturbationInputs) -> float:
    """<F> para pulsos iguais: F_ideal + coef2·<(chi2⁽¹⁾)²> + coef1·<chi1⁽¹⁾>."""
    return (
        ideal_strength_factor(p.rabi, p.delta_tau)
        + chi2_curvature(p) * chi2sq_mean(p)
        + chi1_sensitivity(p) * chi1_mean(p)
    )


# ----------------------------------------------------------------------
# 3. MONTE CARLO DA TEORIA LINEARIZADA
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class LinearizedMoments:
    chi1_mean: float
    chi1_se: float
    chi2sq_mean: float
    chi2sq_se: float
    n_paths: int


def linearized_moments_monte_carlo(p: PerturbationInputs, n_paths: int, dt: float, seed: int) -> LinearizedMoments:
    """Médias amostrais de chi1⁽¹⁾ = chi1 + δτ e de chi2² sobre caminhos de OU."""
    pulse = PulseParams(rabi=p.rabi, duration=p.delta_tau)
    steps = max(grid_steps(p.delta_tau, dt), 1)
    noise = NoiseParams(phi_amp=p.phi_amp, gamma=p.gamma, dt=dt, seed=seed, n_steps=steps)

    logger.info(f"-> Monte Carlo linearizado: {n_paths} caminhos, δτ={p.delta_tau:g}, Φ={p.phi_amp:g}, γ={p.gamma:g}")
    chi = linearized_chi_batch(pulse, sample_paths(noise, range(n_paths)), dt)

    chi1_fluct = chi.chi1 + p.delta_tau
    chi2_sq = chi.chi2 ** 2
    root_n = math.sqrt(n_paths)
    return LinearizedMoments(
        chi1_mean=float(np.mean(chi1_fluct)),
        chi1_se=float(np.std(chi1_fluct, ddof=1) / root_n),
        chi2sq_mean=float(np.mean(chi2_sq)),
        chi2sq_se=float(np.std(chi2_sq, ddof=1) / root_n),
        n_paths=n_paths,
    )
