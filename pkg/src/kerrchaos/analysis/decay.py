"""Least-squares fits of the fidelity decay.

``gaussian``: ln F = intercept + slope * t**2
``exponential``: ln F = intercept + slope * t
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, InsufficientDataError, InvalidParameterError
from .spectrum import as_series

REGIMES = ("gaussian", "exponential")
MIN_POINTS = 4


@dataclass(frozen=True)
class DecayFit:
    regime: str
    slope: float
    intercept: float
    r_squared: float
    fit_window: tuple

    @property
    def rate(self):
        return -self.slope


def linear_fit(x, y):
    """Ordinary least squares ``y = slope*x + intercept``; returns (slope, intercept, r^2)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xm = x.mean()
    ym = y.mean()
    dx = x - xm
    sxx = np.dot(dx, dx)
    if sxx == 0:
        raise InsufficientDataError("fit abscissae are all equal")
    slope = np.dot(dx, y - ym) / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    ss_tot = np.dot(y - ym, y - ym)
    r2 = 1.0 - np.dot(resid, resid) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(min(max(r2, 0.0), 1.0))


def auto_decay_window(values, upper=0.9, lower=0.1, min_points=8):
    """Sample range ``(start, stop)`` of the first monotone descent from ``upper`` to ``lower``.

    Starts at the first sample below ``upper`` and extends while the series
    keeps decreasing and stays at or above ``lower``.
    """
    v = np.asarray(values, dtype=np.float64)
    below = np.nonzero(v < upper)[0]
    if below.size == 0:
        raise InsufficientDataError(f"series never drops below {upper}")
    start = int(below[0])
    if v[start] < lower:
        raise InsufficientDataError("series jumps past the fit window in one sample")
    stop = start + 1
    while stop < v.size and v[stop] <= v[stop - 1] and v[stop] >= lower:
        stop += 1
    if stop - start < min_points:
        raise InsufficientDataError(
            f"monotone decay window [{start}, {stop}) has fewer than {min_points} points"
        )
    return start, stop


def fit_decay(series, regime, window=None, **window_kwargs):
    """Fit ln F against t^2 (gaussian) or t (exponential) over ``window`` (sample indices)."""
    if regime not in REGIMES:
        raise InvalidParameterError(f"regime must be one of {REGIMES}")
    ts = as_series(series)
    if window is None:
        window = auto_decay_window(ts.values, **window_kwargs)
    start, stop = int(window[0]), int(window[1])
    if not (0 <= start < stop <= len(ts)):
        raise InvalidParameterError(f"window {window} outside series of length {len(ts)}")
    if stop - start < MIN_POINTS:
        raise InsufficientDataError(f"fit window needs at least {MIN_POINTS} points")
    f = ts.values[start:stop]
    if np.any(f <= 0) or not np.all(np.isfinite(f)):
        raise DomainError("fidelity must be positive and finite inside the fit window")
    t = ts.times[start:stop].astype(np.float64)
    x = t * t if regime == "gaussian" else t
    slope, intercept, r2 = linear_fit(x, np.log(f))
    return DecayFit(regime, slope, intercept, r2, (start, stop))
