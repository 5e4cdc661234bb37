# app/services/propagator.py

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial.transform import Rotation

from ..core.errors import ConfigurationError, DomainError, SingularityError
from .noise import GRID_TOLERANCE, PhasePath

logger = logging.getLogger(__name__)

# Margem até a singularidade de coordenadas |2·chi2·Omega| = pi/2
SINGULARITY_MARGIN = 0.1
SINGULARITY_LIMIT = math.pi / 2 - SINGULARITY_MARGIN

# Tolerância de unitariedade aceita por decompose_unitary
UNITARITY_TOLERANCE = 1e-8

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

Unitary2 = np.ndarray


# ----------------------------------------------------------------------
# 1. TIPOS DE DOMÍNIO
# ----------------------------------------------------------------------

class WavevectorTag(str, Enum):
    """Rótulo simbólico do vetor de onda; k·r nunca entra como número."""
    K1 = "K1"
    K2 = "K2"


class PulseParams(BaseModel):
    """Pulso quadrado ressonante: frequência de Rabi constante durante `duration`."""
    model_config = ConfigDict(frozen=True)

    rabi: float = Field(gt=0.0, description="Frequência de Rabi Ω (ħ = 1)")
    duration: float = Field(ge=0.0, description="Duração δτ do pulso")
    wavevector_tag: WavevectorTag = WavevectorTag.K1


@dataclass(frozen=True)
class ChiParams:
    """
    Parâmetros de Wei-Norman (chi1, chi2, chi3) ao fim de um pulso.
    Os campos podem ser escalares ou arrays (um valor por realização).
    """
    chi1: float | np.ndarray
    chi2: float | np.ndarray
    chi3: float | np.ndarray

    def as_array(self) -> np.ndarray:
        return np.array([self.chi1, self.chi2, self.chi3], dtype=float)


def grid_steps(duration: float, dt: float) -> int:
    """Número de passos dt que cobrem `duration`; erro se não for múltiplo inteiro."""
    steps = round(duration / dt)
    if abs(steps * dt - duration) > GRID_TOLERANCE * max(1.0, duration):
        raise ConfigurationError(f"A duração {duration} não é múltiplo inteiro de dt={dt}.")
    return steps


def checked_steps(pulse: PulseParams, n_points: int, dt: float) -> int:
    """Passos do pulso na grade; erro se o caminho de fase (n_points pontos) não cobre o pulso."""
    steps = grid_steps(pulse.duration, dt)
    if steps > n_points - 1:
        raise ConfigurationError(
            f"O caminho de fase cobre {(n_points - 1) * dt:g}, menor que a duração do pulso {pulse.duration:g}."
        )
    return steps


# ----------------------------------------------------------------------
# 2. GERADORES E EQUAÇÕES DE WEI-NORMAN
# ----------------------------------------------------------------------

def generators(rabi: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """H1, H2, H3 com k·r = 0: Ω·σx, Ω·σy, Ω·σz."""
    return rabi * PAULI_X, rabi * PAULI_Y, rabi * PAULI_Z


def wei_norman_rhs(phi, chi2, chi3, rabi: float):
    """
    Lado direito simplificado das equações de Wei-Norman.
    Retorna (d chi1/dt, d chi2/dt, d chi3/dt).
    """
    drive = phi + 2.0 * rabi * chi3
    tilt = 2.0 * rabi * chi2
    cos_drive = np.cos(drive)
    return (
        -cos_drive / np.cos(tilt),
        np.sin(drive),
        -cos_drive * np.tan(tilt),
    )


def wei_norman_rhs_unsimplified(phi, chi2, chi3, rabi: float):
    """Mesma dinâmica, na forma obtida diretamente pela inversão da matriz de coeficientes."""
    a = 2.0 * rabi * chi3
    b = 2.0 * rabi * chi2
    cos_phi, sin_phi = np.cos(phi), np.sin(phi)
    sec_b = 1.0 / np.cos(b)
    return (
        -cos_phi * np.cos(a) * sec_b + sin_phi * sec_b * np.sin(a),
        np.cos(a) * sin_phi + cos_phi * np.sin(a),
        -cos_phi * np.cos(a) * np.tan(b) + sin_phi * np.sin(a) * np.tan(b),
    )


# ----------------------------------------------------------------------
# 3. INTEGRAÇÃO RK4 (LOTE DE CAMINHOS)
# ----------------------------------------------------------------------

def integrate_chi_batch(pulse: PulseParams, values: np.ndarray, dt: float):
    """
    Integra as equações de Wei-Norman com RK4 de passo fixo para vários caminhos.

    Args:
        pulse: Parâmetros do pulso.
        values: Matriz (n_caminhos, n_pontos) com phi na grade; phi é mantido constante em cada passo.
        dt: Passo da grade (o mesmo do integrador).

    Returns:
        (ChiParams com arrays, máscara de linhas singulares, primeiro passo singular por linha ou -1).
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    n_paths, n_points = values.shape
    steps = checked_steps(pulse, n_points, dt)
    rabi = pulse.rabi

    chi1 = np.zeros(n_paths)
    chi2 = np.zeros(n_paths)
    chi3 = np.zeros(n_paths)
    first_singular = np.full(n_paths, -1)

    half = 0.5 * dt
    # Linhas nas quais o ruído é nulo já têm a solução fechada (-t, 0, 0)
    noisy = values[:, :steps].any(axis=1) if steps else np.zeros(n_paths, dtype=bool)
    rows = np.flatnonzero(noisy)

    if rows.size:
        phase = values[rows]
        c1, c2, c3 = chi1[rows], chi2[rows], chi3[rows]
        flagged = np.full(rows.size, -1)

        with np.errstate(all="ignore"):
            for n in range(steps):
                phi = phase[:, n]
                k1 = wei_norman_rhs(phi, c2, c3, rabi)
                k2 = wei_norman_rhs(phi, c2 + half * k1[1], c3 + half * k1[2], rabi)
                k3 = wei_norman_rhs(phi, c2 + half * k2[1], c3 + half * k2[2], rabi)
                k4 = wei_norman_rhs(phi, c2 + dt * k3[1], c3 + dt * k3[2], rabi)

                c1 = c1 + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
                c2 = c2 + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
                c3 = c3 + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])

                # NaN também conta como singular (np.abs(nan) >= x é False)
                hit = ~(np.abs(2.0 * rabi * c2) < SINGULARITY_LIMIT) & (flagged < 0)
                flagged[hit] = n

        chi1[rows], chi2[rows], chi3[rows] = c1, c2, c3
        first_singular[rows] = flagged

    chi1[~noisy] = -pulse.duration
    singular = first_singular >= 0
    return ChiParams(chi1, chi2, chi3), singular, first_singular


def integrate_chi(pulse: PulseParams, phase: PhasePath) -> ChiParams:
    """(chi1, chi2, chi3) em t = duration para uma realização de phi."""
    chi, singular, first_singular = integrate_chi_batch(pulse, phase.values[np.newaxis, :], phase.dt)
    if singular[0]:
        step = int(first_singular[0])
        raise SingularityError(
            f"|2·chi2·Ω| atingiu pi/2 - {SINGULARITY_MARGIN} no passo {step} (t = {(step + 1) * phase.dt:g}).",
            step=step,
        )
    return ChiParams(float(chi.chi1[0]), float(chi.chi2[0]), float(chi.chi3[0]))


# ----------------------------------------------------------------------
# 4. OPERADORES DE EVOLUÇÃO
# ----------------------------------------------------------------------

def _axis_rotation(pauli: np.ndarray, angle: float) -> np.ndarray:
    """exp(-i·angle/2·σ) em forma fechada."""
    return math.cos(angle / 2.0) * IDENTITY - 1j * math.sin(angle / 2.0) * pauli


def step_unitary(phi: float, rabi: float, dt: float) -> Unitary2:
    """exp(-i·H_I(phi)·dt) com H_I = Ω·(-cos phi·σx + sin phi·σy)."""
    generator = -math.cos(phi) * PAULI_X + math.sin(phi) * PAULI_Y
    return math.cos(rabi * dt) * IDENTITY - 1j * math.sin(rabi * dt) * generator


def direct_unitary(pulse: PulseParams, phase: PhasePath) -> Unitary2:
    """Produto ordenado no tempo das exponenciais exatas de cada passo (sem fatoração)."""
    steps = checked_steps(pulse, len(phase.values), phase.dt)
    unitary = IDENTITY.copy()
    for phi in phase.values[:steps]:
        unitary = step_unitary(float(phi), pulse.rabi, phase.dt) @ unitary
    return unitary


def factorized_unitary(chi: ChiParams, rabi: float) -> Unitary2:
    """e^{-i chi3 H3}·e^{-i chi2 H2}·e^{-i chi1 H1}: rotações em z, y, x por 2Ω·chi."""
    return (
        _axis_rotation(PAULI_Z, 2.0 * rabi * float(chi.chi3))
        @ _axis_rotation(PAULI_Y, 2.0 * rabi * float(chi.chi2))
        @ _axis_rotation(PAULI_X, 2.0 * rabi * float(chi.chi1))
    )


def unitarity_defect(u: Unitary2) -> float:
    """Maior entrada de |U·U† - I|."""
    return float(np.max(np.abs(u @ u.conj().T - IDENTITY)))


def phase_aligned_distance(u: Unitary2, v: Unitary2) -> float:
    """Distância de Frobenius entre U e V depois de remover uma fase global."""
    overlap = np.trace(v.conj().T @ u)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(u - phase * v))


def decompose_unitary(u: Unitary2, rabi: float) -> ChiParams:
    """
    Ângulos principais (chi1, chi2, chi3) tais que factorized_unitary reproduz U
    a menos de fase global, com 2Ω·chi2 em [-pi/2, pi/2].
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or unitarity_defect(u) > UNITARITY_TOLERANCE:
        raise DomainError("A matriz fornecida não é unitária 2x2.")

    # Matriz de rotação SO(3) associada: R_ij = Tr(σ_i U σ_j U†) / 2
    paulis = (PAULI_X, PAULI_Y, PAULI_Z)
    rotation = np.array(
        [[0.5 * np.trace(si @ u @ sj @ u.conj().T).real for sj in paulis] for si in paulis]
    )
    # Intrínseco ZYX: R = Rz(a)·Ry(b)·Rx(c)
    angle_z, angle_y, angle_x = Rotation.from_matrix(rotation).as_euler("ZYX")
    if abs(abs(angle_y) - math.pi / 2) < 1e-6:
        logger.debug("decompose_unitary: gimbal lock em y; ramo escolhido pelo scipy.")
    return ChiParams(angle_x / (2.0 * rabi), angle_y / (2.0 * rabi), angle_z / (2.0 * rabi))
