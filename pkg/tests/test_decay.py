import numpy as np
import pytest

from kerrchaos.analysis import DecayFit, TimeSeries, auto_decay_window, fit_decay, linear_fit
from kerrchaos.errors import DomainError, InsufficientDataError, InvalidParameterError


def test_linear_fit_exact():
    x = np.arange(10.0)
    slope, intercept, r2 = linear_fit(x, 3 - 2 * x)
    assert slope == pytest.approx(-2, abs=1e-14)
    assert intercept == pytest.approx(3, abs=1e-13)
    assert r2 == pytest.approx(1, abs=1e-14)
    with pytest.raises(InsufficientDataError):
        linear_fit(np.ones(5), np.arange(5.0))


def test_gaussian_recovery():
    t = np.arange(400.0)
    fit = fit_decay(np.exp(-1e-5 * t**2), "gaussian", window=(0, 400))
    assert isinstance(fit, DecayFit)
    assert abs(fit.rate - 1e-5) < 1e-8
    assert fit.r_squared > 0.999999
    assert abs(fit.intercept) < 1e-10


def test_exponential_recovery():
    t = np.arange(300.0)
    fit = fit_decay(np.exp(-0.01 * t), "exponential", window=(0, 300))
    assert abs(fit.rate - 0.01) < 1e-7
    assert fit.r_squared > 0.999999


def test_uses_sample_times():
    # with stride 5 sample j sits at kick 5j
    t = 5 * np.arange(100.0)
    fit = fit_decay(TimeSeries(np.exp(-0.002 * t), stride=5), "exponential", window=(0, 100))
    assert abs(fit.rate - 0.002) < 1e-10


def test_noisy_recovery(rng):
    t = np.arange(200.0)
    f = np.exp(-0.01 * t) * (1 + 1e-3 * rng.normal(size=t.size))
    fit = fit_decay(f, "exponential", window=(10, 150))
    assert abs(fit.rate / 0.01 - 1) < 0.02
    g = np.exp(-1e-4 * t**2) * (1 + 1e-3 * rng.normal(size=t.size))
    fit = fit_decay(g, "gaussian", window=(10, 150))
    assert abs(fit.rate / 1e-4 - 1) < 0.02


def test_auto_window():
    t = np.arange(300.0)
    f = np.exp(-0.02 * t)
    start, stop = auto_decay_window(f)
    assert f[start] < 0.9 <= f[start - 1]
    assert f[stop - 1] >= 0.1 > f[stop]
    fit = fit_decay(f, "exponential")
    assert fit.fit_window == (start, stop)
    assert abs(fit.rate - 0.02) < 1e-12


def test_auto_window_stops_at_rise():
    f = np.concatenate([np.linspace(1, 0.5, 20), [0.6], np.linspace(0.5, 0.05, 20)])
    start, stop = auto_decay_window(f)
    assert stop == 20


def test_auto_window_failures():
    with pytest.raises(InsufficientDataError):
        auto_decay_window(np.ones(50))
    with pytest.raises(InsufficientDataError):
        auto_decay_window([1.0, 0.85, 0.8, 0.9, 0.5])
    with pytest.raises(InsufficientDataError):
        auto_decay_window([1.0, 0.01, 0.001])


def test_fit_errors():
    f = np.exp(-0.01 * np.arange(50.0))
    with pytest.raises(InvalidParameterError):
        fit_decay(f, "linear", window=(0, 10))
    with pytest.raises(InvalidParameterError):
        fit_decay(f, "gaussian", window=(10, 5))
    with pytest.raises(InvalidParameterError):
        fit_decay(f, "gaussian", window=(0, 60))
    with pytest.raises(InsufficientDataError):
        fit_decay(f, "gaussian", window=(0, 3))
    g = f.copy()
    g[5] = 0
    with pytest.raises(DomainError):
        fit_decay(g, "exponential", window=(0, 10))
