# app/services/oracles.py
"""
Oráculos independentes das fórmulas fechadas e a suite do comando `validate`.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from scipy.integrate import dblquad, solve_ivp

from ..core.config import Settings
from .echo import AtomParams, EchoConfig, echo_field_term, strength_factor
from .ensemble import RunSpec, run_ensemble
from .noise import NoiseParams, PhasePath, autocorrelation_estimate, sample_path, sample_paths
from .perturbation import (
    PerturbationInputs,
    chi1_mean,
    chi2sq_mean,
    linearized_moments_monte_carlo,
    mean_strength_factor,
)
from .propagator import (
    ChiParams,
    PulseParams,
    WavevectorTag,
    direct_unitary,
    factorized_unitary,
    generators,
    integrate_chi_batch,
    wei_norman_rhs,
    wei_norman_rhs_unsimplified,
)

logger = logging.getLogger(__name__)

# Parâmetros de referência: pulsos iguais, ruído fraco e correlacionado
REFERENCE_RABI = 1.0
REFERENCE_DELTA_TAU = 4.75
REFERENCE_GAMMA = 1.0 / 4.587
REFERENCE_PHI = 0.08
REFERENCE_TAU = 5.0


# ----------------------------------------------------------------------
# 1. ORÁCULOS DOS MOMENTOS
# ----------------------------------------------------------------------

def chi2sq_mean_quadrature(p: PerturbationInputs) -> float:
    """
    <(chi2⁽¹⁾)²> por quadratura 2-D adaptativa de
    Φ²·∫∫ cos 2Ω(δτ-t1)·cos 2Ω(δτ-t2)·e^{-γ|t1-t2|}, usando a simetria t2 <= t1.
    """
    L, a, g = p.delta_tau, 2.0 * p.rabi, p.gamma
    if L == 0:
        return 0.0

    def integrand(t2: float, t1: float) -> float:
        return math.cos(a * (L - t1)) * math.cos(a * (L - t2)) * math.exp(-g * (t1 - t2))

    value, _ = dblquad(integrand, 0.0, L, 0.0, lambda t1: t1, epsabs=1e-12, epsrel=1e-12)
    return 2.0 * p.phi_amp ** 2 * value


def moment_ode_solution(p: PerturbationInputs) -> Tuple[float, float]:
    """
    (<chi1⁽¹⁾>, <(chi2⁽¹⁾)²>) pelos segundos momentos exatos do sistema linear
    x = (phi, chi2, chi3): dM/dt = A·M + M·Aᵀ + Q, com phi estacionário de OU.
    O acumulador integra <phi²/2 + 2Ωχ3φ + 2Ω²χ3² - 2Ω²χ2²>.
    """
    L, a, g = p.delta_tau, 2.0 * p.rabi, p.gamma
    if L == 0:
        return 0.0, 0.0

    drift = np.array([[-g, 0.0, 0.0], [1.0, 0.0, a], [0.0, -a, 0.0]])
    diffusion = np.diag([2.0 * g * p.phi_amp ** 2, 0.0, 0.0])

    def rhs(_t: float, state: np.ndarray) -> np.ndarray:
        moments = state[:9].reshape(3, 3)
        d_moments = drift @ moments + moments @ drift.T + diffusion
        d_accumulator = 0.5 * moments[0, 0] + a * moments[0, 2] + 0.5 * a ** 2 * (moments[2, 2] - moments[1, 1])
        return np.append(d_moments.ravel(), d_accumulator)

    initial = np.append(np.diag([p.phi_amp ** 2, 0.0, 0.0]).ravel(), 0.0)
    solution = solve_ivp(rhs, (0.0, L), initial, method="DOP853", rtol=1e-12, atol=1e-16)
    final = solution.y[:, -1]
    return float(final[9]), float(final[4])


def finite_difference_mean_factor(p: PerturbationInputs, chi1_moment: float, chi2sq_moment: float) -> float:
    """<F> pela expansão de segunda ordem de F calculada numericamente (chi = zeta)."""
    rabi, base = p.rabi, -p.delta_tau

    def factor(chi1: float, chi2: float) -> float:
        chi = ChiParams(chi1, chi2, 0.0)
        return float(strength_factor(chi, chi, rabi))

    h1, h2 = 1e-5, 1e-3
    first = (factor(base + h1, 0.0) - factor(base - h1, 0.0)) / (2.0 * h1)
    second = (factor(base, h2) - 2.0 * factor(base, 0.0) + factor(base, -h2)) / h2 ** 2
    return factor(base, 0.0) + first * chi1_moment + 0.5 * second * chi2sq_moment


# ----------------------------------------------------------------------
# 2. SUITE DE VALIDAÇÃO
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class OracleResult:
    name: str
    value: float
    threshold: float
    passed: bool
    unit: str = "abs"


def _check(name: str, value: float, threshold: float, unit: str = "abs") -> OracleResult:
    passed = bool(np.isfinite(value) and value <= threshold)
    logger.info(f"-> {name}: {value:.3g} (limite {threshold:.3g}) {'OK' if passed else 'FALHA'}")
    return OracleResult(name=name, value=float(value), threshold=threshold, passed=passed, unit=unit)


def _reference_noise(dt: float, duration: float, seed: int, phi_amp: float = REFERENCE_PHI) -> NoiseParams:
    return NoiseParams(phi_amp=phi_amp, gamma=REFERENCE_GAMMA, dt=dt, seed=seed, n_steps=round(duration / dt))


def check_propagator(n_paths: int, seed: int) -> OracleResult:
    pulse = PulseParams(rabi=REFERENCE_RABI, duration=REFERENCE_DELTA_TAU)
    noise = _reference_noise(1e-3, REFERENCE_DELTA_TAU, seed)
    values = sample_paths(noise, range(n_paths))
    chi, singular, _ = integrate_chi_batch(pulse, values, noise.dt)
    if singular.any():
        return _check("Wei-Norman vs produto direto (Frobenius)", math.inf, 1e-8)

    worst = 0.0
    for row in range(n_paths):
        path_chi = ChiParams(chi.chi1[row], chi.chi2[row], chi.chi3[row])
        direct = direct_unitary(pulse, PhasePath(values[row], noise.dt))
        worst = max(worst, float(np.linalg.norm(factorized_unitary(path_chi, pulse.rabi) - direct)))
    return _check("Wei-Norman vs produto direto (Frobenius)", worst, 1e-8)


def check_rhs_forms(seed: int) -> OracleResult:
    rng = np.random.default_rng(seed)
    n, rabi = 10_000, REFERENCE_RABI
    phi = rng.uniform(-math.pi, math.pi, n)
    chi2 = rng.uniform(-0.6, 0.6, n) / rabi
    chi3 = rng.uniform(-5.0, 5.0, n)
    simplified = np.array(wei_norman_rhs(phi, chi2, chi3, rabi))
    unsimplified = np.array(wei_norman_rhs_unsimplified(phi, chi2, chi3, rabi))
    return _check("EDOs simplificadas vs inversão da matriz", float(np.max(np.abs(simplified - unsimplified))), 1e-12)


def check_generator_algebra() -> OracleResult:
    rabi = 1.7
    h = generators(rabi)
    worst = 0.0
    for i, j, l in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        commutator = h[i] @ h[j] - h[j] @ h[i]
        worst = max(worst, float(np.max(np.abs(commutator - 2j * rabi * h[l]))))
    return _check("Álgebra [Hi, Hj] = 2iΩ εijl Hl", worst, 1e-12)


def check_field_term(seed: int) -> OracleResult:
    rng = np.random.default_rng(seed)
    atom = AtomParams(eps0=0.3, sigma0=1.0, dipole_mag=1.3)
    worst = 0.0
    for _ in range(100):
        chi = ChiParams(*rng.uniform(-5.0, 5.0, 3))
        zeta = ChiParams(*rng.uniform(-5.0, 5.0, 3))
        term = echo_field_term(chi, zeta, atom, 6.0, REFERENCE_TAU, REFERENCE_RABI)
        reconstructed = 64.0 * abs(term) ** 2 / atom.dipole_mag ** 2
        worst = max(worst, abs(reconstructed - float(strength_factor(chi, zeta, REFERENCE_RABI))))
    return _check("64|termo de campo|²/|μ|² vs F", worst, 1e-12)


def _moment_grid(grid_size: int, phi_amp: float) -> List[PerturbationInputs]:
    gammas = np.linspace(0.05, 5.0, grid_size)
    delta_taus = np.linspace(0.5, REFERENCE_DELTA_TAU, grid_size)
    return [
        PerturbationInputs(rabi=REFERENCE_RABI, delta_tau=float(L), phi_amp=phi_amp, gamma=float(g))
        for g in gammas
        for L in delta_taus
    ]


def check_chi2sq_quadrature(grid_size: int) -> OracleResult:
    worst = max(abs(chi2sq_mean(p) - chi2sq_mean_quadrature(p)) for p in _moment_grid(grid_size, 0.05))
    return _check("<χ2²> fechado vs quadratura 2-D", worst, 1e-8)


def check_chi1_moments(grid_size: int) -> OracleResult:
    worst = max(abs(chi1_mean(p) - moment_ode_solution(p)[0]) for p in _moment_grid(grid_size, 0.05))
    return _check("<χ1> fechado vs EDO de momentos", worst, 1e-8)


def check_mean_factor_expansion() -> OracleResult:
    worst = 0.0
    for phi_amp in (0.02, 0.05, 0.1):
        p = PerturbationInputs(
            rabi=REFERENCE_RABI, delta_tau=REFERENCE_DELTA_TAU, phi_amp=phi_amp, gamma=REFERENCE_GAMMA
        )
        chi1_moment, chi2sq_moment = moment_ode_solution(p)
        expected = finite_difference_mean_factor(p, chi1_moment, chi2sq_moment)
        ideal = finite_difference_mean_factor(p, 0.0, 0.0)
        worst = max(worst, abs(mean_strength_factor(p) - expected) / abs(expected - ideal))
    return _check("<F> fechado vs expansão numérica de F (relativo)", worst, 1e-4, unit="rel")


def check_ou_autocorrelation(n_paths: int, seed: int) -> List[OracleResult]:
    dt = 1e-3
    lag_steps = 4587
    noise = _reference_noise(dt, 2 * lag_steps * dt, seed)
    paths = [sample_path(noise, index) for index in range(n_paths)]

    results = []
    for label, lag, expected in (
        ("lag 0", 0.0, REFERENCE_PHI ** 2),
        ("lag 1/γ", lag_steps * dt, REFERENCE_PHI ** 2 * math.exp(-1.0)),
    ):
        estimate, standard_error = autocorrelation_estimate(paths, lag)
        results.append(_check(f"Autocorrelação de OU, {label} (em erros padrão)", abs(estimate - expected) / standard_error, 3.0, unit="SE"))
    return results


def check_linearized_monte_carlo(n_paths: int, dt: float, seed: int) -> List[OracleResult]:
    results = []
    for delta_tau in (1.0, 2.5, REFERENCE_DELTA_TAU):
        p = PerturbationInputs(rabi=REFERENCE_RABI, delta_tau=delta_tau, phi_amp=0.05, gamma=REFERENCE_GAMMA)
        moments = linearized_moments_monte_carlo(p, n_paths, dt, seed)
        results.append(_check(f"<χ1> Monte Carlo, δτ={delta_tau:g} (em erros padrão)", abs(moments.chi1_mean - chi1_mean(p)) / moments.chi1_se, 3.0, unit="SE"))
        results.append(_check(f"<χ2²> Monte Carlo, δτ={delta_tau:g} (em erros padrão)", abs(moments.chi2sq_mean - chi2sq_mean(p)) / moments.chi2sq_se, 3.0, unit="SE"))
    return results


def check_mean_factor_monte_carlo(n_repeats: int, dt: float, seed: int) -> OracleResult:
    phi_amp = 0.05
    pulse = PulseParams(rabi=REFERENCE_RABI, duration=REFERENCE_DELTA_TAU)
    spec = RunSpec(
        echo=EchoConfig(
            tau=REFERENCE_TAU,
            t_grid=[REFERENCE_TAU],
            pulse1=pulse,
            pulse2=pulse.model_copy(update={"wavevector_tag": WavevectorTag.K2}),
        ),
        noise=_reference_noise(dt, REFERENCE_DELTA_TAU, seed, phi_amp=phi_amp),
        n_repeats=n_repeats,
    )
    stats = run_ensemble(spec)
    p = PerturbationInputs(rabi=REFERENCE_RABI, delta_tau=REFERENCE_DELTA_TAU, phi_amp=phi_amp, gamma=REFERENCE_GAMMA)
    deviation = abs(stats.mean_f - mean_strength_factor(p)) / stats.se_f
    return _check("<F> Monte Carlo vs fórmula fechada (em erros padrão)", deviation, 3.0, unit="SE")


def run_oracle_suite(config: Settings, quick: bool = False) -> List[OracleResult]:
    """Executa todos os oráculos; `quick` reduz o tamanho dos testes estatísticos."""
    seed = config.VALIDATE_SEED
    repeats = config.VALIDATE_REPEATS // 4 if quick else config.VALIDATE_REPEATS
    steps: List[Callable[[], OracleResult | List[OracleResult]]] = [
        lambda: check_propagator(20 if quick else 100, seed),
        lambda: check_rhs_forms(seed),
        check_generator_algebra,
        lambda: check_field_term(seed),
        lambda: check_chi2sq_quadrature(3 if quick else 5),
        lambda: check_chi1_moments(3 if quick else 5),
        check_mean_factor_expansion,
        lambda: check_ou_autocorrelation(200 if quick else 1000, seed),
        lambda: check_linearized_monte_carlo(repeats, config.VALIDATE_DT, seed),
        lambda: check_mean_factor_monte_carlo(repeats, config.VALIDATE_DT, seed),
    ]

    results: List[OracleResult] = []
    for step in steps:
        outcome = step()
        results.extend(outcome if isinstance(outcome, list) else [outcome])
    return results
