# tests/test_fitting.py

import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.errors import DomainError
from app.services.ensemble import SweepRow
from app.services.fitting import DecayCurve, decay_curve_from_sweep, fit_coherence_time

TAUS = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]


def _curve(signals, errors=None) -> DecayCurve:
    errors = errors if errors is not None else [0.0] * len(signals)
    return DecayCurve(points=tuple(zip(TAUS[: len(signals)], signals, errors)))


def _exponential(tau_c: float, amplitude: float = 0.01):
    return [amplitude * math.exp(-2.0 * tau / tau_c) for tau in TAUS]


def test_exact_exponential_weighted():
    signals = _exponential(10.0)
    result = fit_coherence_time(_curve(signals, [0.01 * s for s in signals]))
    assert not result.no_decay
    assert result.tau_c == pytest.approx(10.0, rel=1e-9)
    assert result.amplitude == pytest.approx(0.01, rel=1e-9)
    assert result.slope == pytest.approx(-0.2, rel=1e-9)
    assert result.tau_c_se > 0.0


def test_exact_exponential_unweighted():
    result = fit_coherence_time(_curve(_exponential(4.0)))
    assert result.tau_c == pytest.approx(4.0, rel=1e-9)
    assert result.residual == pytest.approx(0.0, abs=1e-9)


def test_noisy_curve_within_five_percent():
    rng = np.random.default_rng(0)
    clean = np.array(_exponential(10.0))
    noisy = clean * (1.0 + 0.01 * rng.standard_normal(clean.size))
    result = fit_coherence_time(_curve(list(noisy), list(0.01 * clean)))
    assert result.tau_c == pytest.approx(10.0, rel=0.05)


def test_constant_curve_reports_no_decay():
    result = fit_coherence_time(_curve([0.02] * 5, [0.001] * 5))
    assert result.no_decay
    assert result.tau_c == math.inf


def test_growing_curve_reports_no_decay():
    signals = [0.01 * math.exp(0.1 * tau) for tau in TAUS]
    result = fit_coherence_time(_curve(signals, [0.0001] * len(signals)))
    assert result.no_decay
    assert result.tau_c == math.inf


def test_insignificant_slope_reports_no_decay():
    # Queda de 0.1% com erros de 10%: compatível com sinal constante
    signals = [0.010, 0.00999, 0.00998]
    result = fit_coherence_time(_curve(signals, [0.001] * 3))
    assert result.no_decay


def test_domain_errors():
    with pytest.raises(DomainError):
        fit_coherence_time(_curve([0.01, 0.005]))
    with pytest.raises(DomainError):
        fit_coherence_time(_curve([0.01, 0.0, 0.002]))
    with pytest.raises(ValidationError):
        DecayCurve(points=((2.0, 0.01, 0.0), (2.0, 0.009, 0.0), (3.0, 0.008, 0.0)))
    with pytest.raises(ValidationError):
        DecayCurve(points=((2.0, -0.01, 0.0),))


def test_curve_from_sweep_rows():
    rows = [SweepRow(value=t, mc=s, se=0.1 * s, analytic=s) for t, s in zip(TAUS, _exponential(8.0))]
    curve = decay_curve_from_sweep(rows)
    assert curve.taus.tolist() == TAUS
    assert fit_coherence_time(curve).tau_c == pytest.approx(8.0, rel=1e-9)
