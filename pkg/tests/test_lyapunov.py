import math

import numpy as np
import pytest

from kerrchaos.analysis import (
    LyapunovEstimate,
    autocorrelation_delay,
    classify_dynamics,
    delay_embed,
    estimate_lyapunov,
    lyapunov_trend,
)
from kerrchaos.analysis.lyapunov import autocorrelation, post_decay_start
from kerrchaos.errors import (
    IndeterminateError,
    InsufficientDataError,
    InvalidParameterError,
    RadiusTooSmallError,
)


def logistic(n, x0=0.3):
    x = np.empty(n)
    x[0] = x0
    for i in range(1, n):
        x[i] = 4 * x[i - 1] * (1 - x[i - 1])
    return x


def test_delay_embed():
    e = delay_embed(np.arange(10.0), 3, 2)
    assert e.shape == (6, 3)
    assert np.array_equal(e[0], [0, 2, 4])
    assert np.array_equal(e[-1], [5, 7, 9])
    with pytest.raises(InsufficientDataError):
        delay_embed(np.arange(4.0), 3, 2)


def test_autocorrelation():
    x = np.random.default_rng(3).normal(size=1000)
    c = autocorrelation(x)
    assert c[0] == pytest.approx(1.0)
    assert abs(c[5]) < 0.15


def test_delay_of_sine():
    t = np.arange(4000)
    period = 40
    x = np.sin(2 * np.pi * t / period)
    assert abs(autocorrelation_delay(x, "first_zero") - period / 4) <= 1
    assert abs(autocorrelation_delay(x, "first_min") - period / 2) <= 1
    with pytest.raises(InvalidParameterError):
        autocorrelation_delay(x, "mutual_information")


def test_post_decay_start():
    x = np.concatenate([np.linspace(1, 0.2, 50), 0.2 + 0.01 * np.sin(np.arange(500))])
    start = post_decay_start(x)
    # first sample at or below the plateau median
    assert 45 <= start <= 60


@pytest.mark.parametrize("m,fit", [(2, (1, 4)), (2, (0, 5)), (3, (1, 5))])
def test_logistic_map(backend, m, fit):
    est = estimate_lyapunov(logistic(5000), embedding_dim=m, delay=1, theiler=10,
                            fit_range=fit, radius=0.01 if fit != (1, 4) else None, backend=backend)
    assert abs(est.lambda_max / math.log(2) - 1) < 0.1
    assert not est.low_confidence
    assert classify_dynamics(est) == "chaotic"


def test_sinusoid_is_regular(backend):
    t = np.arange(20000)
    est = estimate_lyapunov(np.sin(2 * np.pi * t / 37.3), backend=backend)
    assert est.lambda_max <= 0.001
    assert classify_dynamics(est) == "regular"


def test_backends_agree():
    x = logistic(3000, 0.41)
    a = estimate_lyapunov(x, embedding_dim=3, delay=1, theiler=5, fit_range=(1, 6), backend="python")
    b = estimate_lyapunov(x, embedding_dim=3, delay=1, theiler=5, fit_range=(1, 6))
    assert np.max(np.abs(a.divergence_curve - b.divergence_curve)) < 1e-10
    assert a.references == b.references


def test_radius_too_small():
    x = logistic(2000)
    with pytest.raises(RadiusTooSmallError):
        estimate_lyapunov(x, embedding_dim=4, delay=1, theiler=5, fit_range=(1, 5), radius=1e-12)
    with pytest.raises(RadiusTooSmallError):
        estimate_lyapunov(np.ones(500), delay=1)


def test_argument_errors():
    x = logistic(500)
    with pytest.raises(InsufficientDataError):
        estimate_lyapunov(x[:50], delay=1)
    with pytest.raises(InvalidParameterError):
        estimate_lyapunov(x, embedding_dim=1, delay=1)
    with pytest.raises(InvalidParameterError):
        estimate_lyapunov(x, delay=1, fit_range=(5, 5))
    with pytest.raises(InvalidParameterError):
        estimate_lyapunov(x, delay=0)


def test_trend_lengths():
    ests = lyapunov_trend(logistic(4000), embedding_dim=2, delay=1, theiler=10, fit_range=(1, 4))
    assert [e.length for e in ests] == [1000, 2000, 4000]


def fake(lam, r2=0.99, low=False):
    return LyapunovEstimate(lam, 4, 1, 50, (1, 30), np.zeros(31), 0.1, 100, r2, low, 1000)


def test_classify_dynamics_rules():
    assert classify_dynamics(fake(0.01)) == "chaotic"
    assert classify_dynamics(fake(-1e-4)) == "regular"
    assert classify_dynamics(fake(5e-4, r2=0.1)) == "regular"
    assert classify_dynamics(fake(5e-4)) == "quasi_periodic"
    assert classify_dynamics([fake(2e-4), fake(5e-4)]) == "quasi_periodic"
    assert classify_dynamics([fake(-2e-4), fake(5e-4)]) == "regular"
    with pytest.raises(IndeterminateError):
        classify_dynamics(fake(0.01, r2=0.3, low=True))
    with pytest.raises(InvalidParameterError):
        classify_dynamics([])


def test_csv(tmp_path):
    est = estimate_lyapunov(logistic(2000), embedding_dim=2, delay=1, theiler=10, fit_range=(1, 4))
    path = tmp_path / "l.csv"
    est.to_csv(path, {"epsilon": 0.8})
    text = path.read_text()
    assert "epsilon" in text and "lambda_max" in text
    assert "s,S" in text.splitlines()
