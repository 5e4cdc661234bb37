# tests/test_oracles.py

import pytest

from app.core.config import Settings
from app.services import oracles
from app.services.echo import ideal_strength_factor
from app.services.perturbation import (
    PerturbationInputs,
    chi1_mean,
    chi1_sensitivity,
    chi2_curvature,
    chi2sq_mean,
)

from conftest import DELTA_TAU, GAMMA, RABI

GRID = [(gamma, delta_tau) for gamma in (0.05, GAMMA, 1.0, 5.0) for delta_tau in (0.5, 2.0, DELTA_TAU)]


@pytest.mark.parametrize("gamma, delta_tau", GRID)
def test_closed_moments_match_independent_oracles(gamma, delta_tau):
    p = PerturbationInputs(rabi=RABI, delta_tau=delta_tau, phi_amp=0.05, gamma=gamma)
    chi1_ode, chi2sq_ode = oracles.moment_ode_solution(p)

    assert chi2sq_mean(p) == pytest.approx(oracles.chi2sq_mean_quadrature(p), abs=1e-8)
    assert chi2sq_mean(p) == pytest.approx(chi2sq_ode, abs=1e-8)
    assert chi1_mean(p) == pytest.approx(chi1_ode, abs=1e-8)


def test_oracles_at_zero_duration():
    p = PerturbationInputs(rabi=RABI, delta_tau=0.0, phi_amp=0.05, gamma=GAMMA)
    assert oracles.moment_ode_solution(p) == (0.0, 0.0)
    assert oracles.chi2sq_mean_quadrature(p) == 0.0


def test_deterministic_checks_pass():
    for result in (
        oracles.check_rhs_forms(seed=1),
        oracles.check_generator_algebra(),
        oracles.check_field_term(seed=1),
        oracles.check_propagator(n_paths=2, seed=1),
        oracles.check_chi2sq_quadrature(grid_size=2),
        oracles.check_chi1_moments(grid_size=2),
        oracles.check_mean_factor_expansion(),
    ):
        assert result.passed, result


def test_tampered_coefficient_is_detected(monkeypatch):
    def tampered(p: PerturbationInputs) -> float:
        return (
            ideal_strength_factor(p.rabi, p.delta_tau)
            + 1.1 * chi2_curvature(p) * chi2sq_mean(p)
            + chi1_sensitivity(p) * chi1_mean(p)
        )

    monkeypatch.setattr(oracles, "mean_strength_factor", tampered)
    assert not oracles.check_mean_factor_expansion().passed


@pytest.mark.slow
def test_full_suite_passes():
    results = oracles.run_oracle_suite(Settings(), quick=True)
    failed = [r for r in results if not r.passed]
    assert not failed, failed
