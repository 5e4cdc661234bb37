# tests/test_noise.py

import logging
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from pydantic import ValidationError

from app.core.errors import DomainError
from app.services.noise import (
    NoiseParams,
    PhasePath,
    autocorrelation_estimate,
    lag_in_steps,
    ou_transition,
    sample_path,
    sample_paths,
    stream_generator,
)


def _params(**overrides) -> NoiseParams:
    base = {"phi_amp": 0.08, "gamma": 0.5, "dt": 0.01, "seed": 42, "n_steps": 1000}
    return NoiseParams(**{**base, **overrides})


# ----------------------------------------------------------------------
# 1. PARÂMETROS
# ----------------------------------------------------------------------

@pytest.mark.parametrize("field, value", [("phi_amp", -0.1), ("gamma", 0.0), ("dt", 0.0), ("n_steps", 0), ("seed", -1)])
def test_invalid_parameters_rejected(field, value):
    with pytest.raises(ValidationError):
        _params(**{field: value})


def test_coarse_grid_logs_warning(caplog):
    with caplog.at_level(logging.WARNING):
        _params(gamma=200.0, dt=0.01)
    assert "AVISO" in caplog.text


def test_resolved_grid_does_not_warn(caplog):
    with caplog.at_level(logging.WARNING):
        _params()
    assert "AVISO" not in caplog.text


# ----------------------------------------------------------------------
# 2. SUBFLUXOS E AMOSTRAGEM
# ----------------------------------------------------------------------

def test_stream_generator_is_reproducible():
    first = stream_generator(7, 3).standard_normal(5)
    second = stream_generator(7, 3).standard_normal(5)
    other = stream_generator(7, 4).standard_normal(5)
    assert_array_equal(first, second)
    assert not np.array_equal(first, other)


def test_stream_generator_rejects_negative_index():
    with pytest.raises(DomainError):
        stream_generator(7, -1)


def test_batch_rows_match_single_paths():
    params = _params()
    batch = sample_paths(params, [5, 2, 9])
    assert batch.shape == (3, params.n_steps + 1)
    for row, index in enumerate([5, 2, 9]):
        assert_array_equal(batch[row], sample_path(params, index).values)


def test_zero_amplitude_gives_zero_path():
    path = sample_path(_params(phi_amp=0.0), 0)
    assert np.all(path.values == 0.0)


def test_paths_follow_exact_one_step_update():
    params = _params()
    values = sample_path(params, 4).values
    xi = stream_generator(params.seed, 4).standard_normal(params.n_steps + 1)

    assert values[0] == pytest.approx(params.phi_amp * xi[0], rel=1e-15)
    expected = ou_transition(values[:-1], params, xi[1:])
    assert_allclose(values[1:], expected, rtol=1e-12, atol=1e-15)


def test_path_grid_properties():
    path = PhasePath(values=np.zeros(11), dt=0.1)
    assert path.n_steps == 10
    assert path.duration == pytest.approx(1.0)
    assert_allclose(path.times, np.arange(11) * 0.1)


# ----------------------------------------------------------------------
# 3. AUTOCORRELAÇÃO
# ----------------------------------------------------------------------

def test_lag_must_be_on_grid():
    assert lag_in_steps(0.5, 0.01) == 50
    with pytest.raises(DomainError):
        lag_in_steps(0.005, 0.01)


def test_autocorrelation_input_errors():
    params = _params(n_steps=10)
    paths = [sample_path(params, i) for i in range(3)]
    with pytest.raises(DomainError):
        autocorrelation_estimate(paths[:1], 0.0)
    with pytest.raises(DomainError):
        autocorrelation_estimate(paths, 0.5)


def test_autocorrelation_matches_ou_law():
    phi_amp, gamma = 0.08, 0.5
    params = _params(phi_amp=phi_amp, gamma=gamma)
    paths = [sample_path(params, i) for i in range(400)]

    for lag, expected in ((0.0, phi_amp ** 2), (1.0 / gamma, phi_amp ** 2 * math.exp(-1.0))):
        estimate, standard_error = autocorrelation_estimate(paths, lag)
        assert abs(estimate - expected) < 4.0 * standard_error


# ----------------------------------------------------------------------
# 4. LEI ESTATÍSTICA DOS CAMINHOS
# ----------------------------------------------------------------------

def test_one_step_transition_law():
    # Resíduos phi_{n+1} - e^{-γdt}·phi_n de 10⁴ transições: média 0, variância Φ²(1 - e^{-2γdt})
    params = _params(n_steps=1000)
    values = sample_paths(params, range(10))
    residuals = (values[:, 1:] - params.decay * values[:, :-1]).ravel()
    n = residuals.size
    expected_variance = params.diffusion ** 2

    assert abs(np.mean(residuals)) < 4.0 * params.diffusion / math.sqrt(n)
    assert abs(np.var(residuals, ddof=1) - expected_variance) < 4.0 * expected_variance * math.sqrt(2.0 / (n - 1))


def test_conditional_moments_from_fixed_point():
    params = _params()
    phi_n = 0.15
    xi = stream_generator(params.seed, 99).standard_normal(10_000)
    following = ou_transition(phi_n, params, xi)
    n = following.size

    assert abs(np.mean(following) - phi_n * params.decay) < 4.0 * params.diffusion / math.sqrt(n)
    variance = params.diffusion ** 2
    assert abs(np.var(following, ddof=1) - variance) < 4.0 * variance * math.sqrt(2.0 / (n - 1))


def test_paths_are_stationary():
    params = _params(n_steps=1000)
    values = sample_paths(params, range(2000))
    stationary = params.phi_amp ** 2
    se = stationary * math.sqrt(2.0 / (values.shape[0] - 1))

    start, end = np.var(values[:, 0], ddof=1), np.var(values[:, -1], ddof=1)
    assert abs(start - stationary) < 4.0 * se
    assert abs(end - stationary) < 4.0 * se
    assert abs(start - end) < 4.0 * math.sqrt(2.0) * se


def test_pooled_mean_is_zero():
    params = _params()
    per_path = sample_paths(params, range(400)).mean(axis=1)
    standard_error = np.std(per_path, ddof=1) / math.sqrt(per_path.size)
    assert abs(np.mean(per_path)) < 4.0 * standard_error
