# app/services/fitting.py

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from ..core.errors import DomainError

logger = logging.getLogger(__name__)

# Inclinação com |slope| < NO_DECAY_SIGMAS·erro padrão não é considerada decaimento
NO_DECAY_SIGMAS = 3.0


class DecayCurve(BaseModel):
    """Sinal médio no revival em função do atraso τ: pontos (tau, sinal médio, erro padrão)."""
    model_config = ConfigDict(frozen=True)

    points: Tuple[Tuple[float, float, float], ...]

    @field_validator("points")
    @classmethod
    def _ordered_non_negative(cls, points):
        taus = [p[0] for p in points]
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ValueError("Os atrasos τ da curva devem ser estritamente crescentes.")
        if any(p[1] < 0 for p in points):
            raise ValueError("O sinal médio não pode ser negativo.")
        return points

    @property
    def taus(self) -> np.ndarray:
        return np.array([p[0] for p in self.points], dtype=float)

    @property
    def signals(self) -> np.ndarray:
        return np.array([p[1] for p in self.points], dtype=float)

    @property
    def errors(self) -> np.ndarray:
        return np.array([p[2] for p in self.points], dtype=float)


@dataclass(frozen=True)
class FitResult:
    """
    Resultado de ln S(τ) = ln A - 2τ/τc.

    `amplitude` é o intercepto A = S(τ = 0) na mesma unidade do sinal ajustado;
    para a curva de `fit` (sinal no revival) vale |μ|²·<F>/64.
    `tau_c` é inf e `tau_c_se` é NaN quando `no_decay` é verdadeiro.
    """
    tau_c: float
    amplitude: float
    residual: float
    slope: float
    slope_se: float
    tau_c_se: float
    no_decay: bool


def decay_curve_from_sweep(rows: Iterable) -> DecayCurve:
    """Converte as linhas de uma varredura TAU (value, mc, se) em DecayCurve."""
    return DecayCurve(points=tuple((row.value, row.mc, row.se) for row in rows))


def _weighted_line(x: np.ndarray, y: np.ndarray, sigma: np.ndarray | None):
    """Mínimos quadrados ponderados de y = intercept + slope·x; devolve coeficientes, covariância e resíduo."""
    design = np.column_stack([np.ones_like(x), x])
    weights = np.ones_like(x) if sigma is None else 1.0 / sigma
    coefficients, *_ = np.linalg.lstsq(design * weights[:, None], y * weights, rcond=None)

    residuals = (y - design @ coefficients) * weights
    residual_norm = float(np.linalg.norm(residuals))
    covariance = np.linalg.inv((design * weights[:, None]).T @ (design * weights[:, None]))
    if sigma is None:
        # Sem incertezas informadas, escala pela variância residual
        dof = len(x) - 2
        covariance = covariance * (residual_norm ** 2 / dof if dof > 0 else math.nan)
    return coefficients, covariance, residual_norm


def fit_coherence_time(curve: DecayCurve) -> FitResult:
    """
    Ajuste log-linear: ln S(τ) = ln A - 2τ/τc, com pesos 1/se² propagados pelo log
    (σ_ln = se/S). Sem erros informados (se = 0) o ajuste não é ponderado.
    """
    if len(curve.points) < 3:
        raise DomainError("O ajuste precisa de pelo menos 3 pontos.")
    taus, signals, errors = curve.taus, curve.signals, curve.errors
    if np.any(signals <= 0):
        raise DomainError("Sinais não positivos: o logaritmo não está definido.")

    log_signal = np.log(signals)
    sigma = errors / signals if np.all(errors > 0) else None
    if sigma is None:
        logger.info("-> Ajuste sem pesos: a curva não informa erros padrão positivos.")

    if np.ptp(log_signal) == 0:
        logger.info("-> Curva constante: nenhuma decoerência detectada.")
        return FitResult(
            tau_c=math.inf,
            amplitude=float(signals[0]),
            residual=0.0,
            slope=0.0,
            slope_se=0.0,
            tau_c_se=math.nan,
            no_decay=True,
        )

    (intercept, slope), covariance, residual = _weighted_line(taus, log_signal, sigma)
    slope_se = float(math.sqrt(covariance[1, 1])) if np.isfinite(covariance[1, 1]) else math.nan
    significant = slope < 0 and not (np.isfinite(slope_se) and abs(slope) < NO_DECAY_SIGMAS * slope_se)

    if not significant:
        logger.info(f"-> Inclinação {slope:.3g} ± {slope_se:.2g} sem decaimento significativo.")
        tau_c, tau_c_se = math.inf, math.nan
    else:
        tau_c = -2.0 / slope
        tau_c_se = 2.0 * slope_se / slope ** 2

    return FitResult(
        tau_c=tau_c,
        amplitude=float(math.exp(intercept)),
        residual=residual,
        slope=float(slope),
        slope_se=slope_se,
        tau_c_se=tau_c_se,
        no_decay=not significant,
    )
