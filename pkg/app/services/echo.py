# app/services/echo.py
"""
Observável do eco de fótons selecionado pela condição de casamento de fase 2k2 - k1.

O fator espacial e^{i(2k2-k1)·r} é tratado simbolicamente: todas as funções
abaixo trabalham com k·r = 0, pois ele não altera nenhuma amplitude.
"""

import math
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .propagator import ChiParams, PulseParams

# Normalização do termo de campo: 64·|termo|²/|μ|² = F
AMPLITUDE_NORMALIZATION = 64.0


# ----------------------------------------------------------------------
# 1. TIPOS DE DOMÍNIO
# ----------------------------------------------------------------------

class AtomParams(BaseModel):
    """Ensemble de átomos de dois níveis com alargamento inomogêneo gaussiano."""
    model_config = ConfigDict(frozen=True)

    eps0: float = 0.0
    sigma0: float = Field(default=1.0, ge=0.0)
    dipole_mag: float = Field(default=1.0, gt=0.0)
    tau_c: float = Field(default=math.inf, gt=0.0, description="Tempo de coerência; inf = sistema fechado")


class EchoConfig(BaseModel):
    """Sequência de dois pulsos separados por `tau`, detectada nos tempos `t_grid`."""
    model_config = ConfigDict(frozen=True)

    tau: float = Field(gt=0.0)
    t_grid: List[float]
    pulse1: PulseParams
    pulse2: PulseParams

    @field_validator("t_grid")
    @classmethod
    def _strictly_increasing(cls, grid: List[float]) -> List[float]:
        if not grid:
            raise ValueError("t_grid não pode ser vazio")
        if any(t < 0 for t in grid):
            raise ValueError("t_grid deve conter apenas tempos >= 0")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("t_grid deve ser estritamente crescente")
        return grid


def _as_output(value):
    value = np.asarray(value)
    return value if value.ndim else value.item()


# ----------------------------------------------------------------------
# 2. FATOR DE INTENSIDADE F
# ----------------------------------------------------------------------

def strength_factor(chi: ChiParams, zeta: ChiParams, rabi: float):
    """
    F = {sin²[(ζ2+ζ1)Ω] + sin²[(ζ2-ζ1)Ω]}² · {[sin 2(χ2-χ1)Ω + sin 2(χ2+χ1)Ω]² + 4 sin² 2χ1Ω}.
    chi vem do primeiro pulso, zeta do segundo. Aceita escalares ou arrays.
    """
    z1, z2 = np.asarray(zeta.chi1) * rabi, np.asarray(zeta.chi2) * rabi
    c1, c2 = np.asarray(chi.chi1) * rabi, np.asarray(chi.chi2) * rabi

    second_pulse = (np.sin(z2 + z1) ** 2 + np.sin(z2 - z1) ** 2) ** 2
    first_pulse = (np.sin(2.0 * (c2 - c1)) + np.sin(2.0 * (c2 + c1))) ** 2 + 4.0 * np.sin(2.0 * c1) ** 2
    return _as_output(second_pulse * first_pulse)


def ideal_strength_factor(rabi: float, delta_tau: float) -> float:
    """F sem ruído para pulsos iguais: 16 sin⁴(Ωδτ) sin²(2Ωδτ)."""
    angle = rabi * delta_tau
    return 16.0 * math.sin(angle) ** 4 * math.sin(2.0 * angle) ** 2


def ideal_chi(pulse: PulseParams) -> ChiParams:
    """Parâmetros de Wei-Norman sem ruído: (-δτ, 0, 0)."""
    return ChiParams(-pulse.duration, 0.0, 0.0)


# ----------------------------------------------------------------------
# 3. ENVELOPES (ALARGAMENTO INOMOGÊNEO E DECOERÊNCIA)
# ----------------------------------------------------------------------

def inhomogeneous_envelope(atom: AtomParams, t_detect, tau: float):
    """Envelope de amplitude e^{-σ0²(T-τ)²}; vale 1 no tempo de revival T = τ."""
    offset = np.asarray(t_detect, dtype=float) - tau
    return _as_output(np.exp(-(atom.sigma0 ** 2) * offset ** 2))


def dephasing_factor(atom: AtomParams, t_detect, tau: float):
    """Soma sobre as energias de transição gaussianas: e^{-σ0²(T-τ)²/2 - i(T-τ)ε0}."""
    offset = np.asarray(t_detect, dtype=float) - tau
    return _as_output(np.exp(-0.5 * atom.sigma0 ** 2 * offset ** 2 - 1j * offset * atom.eps0))


def decoherence_factor(atom: AtomParams, t_detect, tau: float):
    """Decaimento do sistema aberto e^{-(T+τ)/τc}; exatamente 1 quando τc é infinito."""
    total = np.asarray(t_detect, dtype=float) + tau
    return _as_output(np.exp(-total / atom.tau_c))


# ----------------------------------------------------------------------
# 4. AMPLITUDES E TERMO DE CAMPO
# ----------------------------------------------------------------------

def echo_amplitude(chi: ChiParams, zeta: ChiParams, atom: AtomParams, t_detect, tau: float, rabi: float):
    """A = (|μ|²/64)·e^{-σ0²(T-τ)²}·F."""
    prefactor = atom.dipole_mag ** 2 / AMPLITUDE_NORMALIZATION
    return _as_output(
        prefactor * np.asarray(inhomogeneous_envelope(atom, t_detect, tau)) * strength_factor(chi, zeta, rabi)
    )


def open_amplitude(chi: ChiParams, zeta: ChiParams, atom: AtomParams, t_detect, tau: float, rabi: float):
    """A_open = A·e^{-(T+τ)/τc}; em T = τ o fator é e^{-2τ/τc}."""
    closed = np.asarray(echo_amplitude(chi, zeta, atom, t_detect, tau, rabi))
    return _as_output(closed * np.asarray(decoherence_factor(atom, t_detect, tau)))


def ideal_amplitude(atom: AtomParams, t_detect, tau: float, rabi: float, delta_tau1: float, delta_tau2: float):
    """Sinal ideal (fase constante): (|μ|²/4)·e^{-σ0²(T-τ)²}·sin⁴(Ωδτ2)·sin²(2Ωδτ1)."""
    envelope = np.asarray(inhomogeneous_envelope(atom, t_detect, tau))
    shape = math.sin(rabi * delta_tau2) ** 4 * math.sin(2.0 * rabi * delta_tau1) ** 2
    return _as_output(atom.dipole_mag ** 2 / 4.0 * envelope * shape)


def echo_field_term(
    chi: ChiParams,
    zeta: ChiParams,
    atom: AtomParams,
    t_detect: float,
    tau: float,
    rabi: float,
    ensemble_averaged: bool = False,
) -> complex:
    """
    Termo complexo do campo de eco com fator espacial omitido.

    Com ensemble_averaged=False usa ε_e -> ε0 (64·|termo|²/|μ|² = F).
    Com ensemble_averaged=True aplica a soma sobre ε_e, e |termo|² passa a
    carregar o envelope e^{-σ0²(T-τ)²}.
    """
    c1, c2, c3 = chi.chi1 * rabi, chi.chi2 * rabi, chi.chi3 * rabi
    z1, z2, z3 = zeta.chi1 * rabi, zeta.chi2 * rabi, zeta.chi3 * rabi

    if ensemble_averaged:
        energy_phase = complex(dephasing_factor(atom, t_detect, tau))
    else:
        energy_phase = np.exp(-1j * (t_detect - tau) * atom.eps0)

    second_pulse = (math.sin(z2 + z1) + 1j * math.sin(z2 - z1)) ** 2
    first_pulse = math.sin(2.0 * (c2 - c1)) + 2j * math.sin(2.0 * c1) + math.sin(2.0 * (c2 + c1))
    rotation = np.exp(2j * (z3 - c3)) / 8.0

    return complex(1j * atom.dipole_mag * energy_phase * rotation * second_pulse * first_pulse)
