"""Time-series diagnostics: spectra, entropy, decay fits and Lyapunov exponents."""

from .decay import DecayFit, auto_decay_window, fit_decay, linear_fit
from .lyapunov import (
    LyapunovEstimate,
    autocorrelation_delay,
    classify_dynamics,
    delay_embed,
    estimate_lyapunov,
    lyapunov_trend,
    post_decay_start,
)
from .spectrum import (
    EntropyResult,
    PowerSpectrum,
    TimeSeries,
    default_window,
    entropy_vs_epsilon,
    fidelity_entropy,
    power_spectrum,
    spectral_entropy,
)

__all__ = [
    "DecayFit",
    "EntropyResult",
    "LyapunovEstimate",
    "PowerSpectrum",
    "TimeSeries",
    "auto_decay_window",
    "autocorrelation_delay",
    "classify_dynamics",
    "default_window",
    "delay_embed",
    "entropy_vs_epsilon",
    "estimate_lyapunov",
    "fidelity_entropy",
    "fit_decay",
    "linear_fit",
    "lyapunov_trend",
    "post_decay_start",
    "power_spectrum",
    "spectral_entropy",
]
