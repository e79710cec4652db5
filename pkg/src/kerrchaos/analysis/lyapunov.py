"""Maximal Lyapunov exponent of a scalar series by delay embedding.

Kantz's method: for every reference vector collect the neighbours inside a
max-norm ball of radius r (excluding a Theiler window around the reference),
follow the scalar separation of each neighbour for s steps and average

    S(s) = < ln < |x_{i+s} - x_{j+s}| >_neighbours >_references

The exponent is the slope of S over ``fit_range``.
"""

from dataclasses import dataclass

import numpy as np

from .. import _ext
from ..errors import (
    IndeterminateError,
    InsufficientDataError,
    InvalidParameterError,
    RadiusTooSmallError,
)
from .decay import linear_fit
from .spectrum import as_series

DELAY_RULES = ("first_zero", "first_min")


def delay_embed(values, embedding_dim, delay):
    """Rows ``(x_i, x_{i+delay}, ..., x_{i+(m-1) delay})``."""
    x = np.asarray(values, dtype=np.float64)
    if embedding_dim < 1 or delay < 1:
        raise InvalidParameterError("embedding_dim and delay must be >= 1")
    count = x.size - (embedding_dim - 1) * delay
    if count <= 0:
        raise InsufficientDataError("series too short for the requested embedding")
    return np.stack([x[i * delay : i * delay + count] for i in range(embedding_dim)], axis=1)


def autocorrelation(values):
    """Normalised autocorrelation at lags 0..N-1 (FFT, zero padded)."""
    x = np.asarray(values, dtype=np.float64)
    x = x - x.mean()
    n = x.size
    spec = np.fft.rfft(x, 2 * n)
    ac = np.fft.irfft(spec.real**2 + spec.imag**2, 2 * n)[:n]
    if ac[0] <= 0:
        raise InsufficientDataError("constant series has no autocorrelation structure")
    return ac / ac[0]


def autocorrelation_delay(values, rule="first_zero"):
    """Embedding lag from the autocorrelation.

    ``first_zero`` is the first lag where it crosses zero; ``first_min`` the
    first local minimum.  Falls back to the other rule, then to 1.
    """
    if rule not in DELAY_RULES:
        raise InvalidParameterError(f"delay rule must be one of {DELAY_RULES}")
    ac = autocorrelation(values)

    def first_zero():
        z = np.nonzero(ac <= 0)[0]
        return int(z[0]) if z.size else None

    def first_min():
        d = np.diff(ac)
        m = np.nonzero((d[:-1] < 0) & (d[1:] >= 0))[0]
        return int(m[0] + 1) if m.size else None

    order = (first_zero, first_min) if rule == "first_zero" else (first_min, first_zero)
    for f in order:
        lag = f()
        if lag:
            return lag
    return 1


def post_decay_start(values):
    """Index at which the series first reaches the median of its second half.

    Used to drop the initial fidelity decay before estimating exponents.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size < 4:
        raise InsufficientDataError("series too short")
    med = np.median(v[v.size // 2 :])
    return int(np.argmax(v <= med))


@dataclass(frozen=True)
class LyapunovEstimate:
    lambda_max: float
    embedding_dim: int
    delay: int
    theiler: int
    fit_range: tuple
    divergence_curve: np.ndarray
    radius: float
    references: int
    r_squared: float
    low_confidence: bool
    length: int

    def to_csv(self, path, metadata=None):
        from ..io import write_csv_table

        meta = {
            "lambda_max": self.lambda_max,
            "embedding_dim": self.embedding_dim,
            "delay": self.delay,
            "theiler": self.theiler,
            "fit_start": self.fit_range[0],
            "fit_end": self.fit_range[1],
            "radius": self.radius,
            "references": self.references,
            "r_squared": self.r_squared,
            "low_confidence": self.low_confidence,
            "length": self.length,
        }
        meta.update(metadata or {})
        s = np.arange(self.divergence_curve.size)
        write_csv_table(path, {"s": s, "S": self.divergence_curve}, meta)


def estimate_lyapunov(
    series,
    embedding_dim=4,
    delay=None,
    theiler=50,
    fit_range=(1, 30),
    radius=None,
    radius_factor=0.1,
    delay_rule="first_zero",
    min_r_squared=0.8,
    tol=0.001,
    backend=None,
):
    """Slope of Kantz's S(s) over ``fit_range`` (inclusive).

    ``radius`` defaults to ``radius_factor`` times the standard deviation.
    The estimate is flagged low-confidence when it claims a positive
    exponent above ``tol`` but S(s) is not close to linear (r^2 below
    ``min_r_squared``); for flat curves r^2 carries no information.
    """
    x = as_series(series).check(2).values
    if embedding_dim < 2:
        raise InvalidParameterError("embedding_dim must be >= 2")
    s0, s1 = int(fit_range[0]), int(fit_range[1])
    if not 0 <= s0 < s1:
        raise InvalidParameterError(f"invalid fit_range {fit_range}")
    if theiler < 0:
        raise InvalidParameterError("theiler must be >= 0")
    if delay is None:
        delay = autocorrelation_delay(x, delay_rule)
    delay = int(delay)
    if delay < 1:
        raise InvalidParameterError("delay must be >= 1")
    need = (embedding_dim - 1) * delay + s1 + theiler + 2
    if x.size < need:
        raise InsufficientDataError(f"series of length {x.size} shorter than required {need}")
    if radius is None:
        radius = radius_factor * float(np.std(x))
    if not radius > 0:
        raise RadiusTooSmallError("neighbour radius must be positive (constant series?)")

    kern = _ext.get_kernels(backend)
    curve, used = kern.kantz_curve(x, int(embedding_dim), delay, int(theiler), float(radius), s1)
    if used == 0:
        raise RadiusTooSmallError(f"no neighbours within radius {radius:.3g}; enlarge it")
    curve = np.asarray(curve)
    steps = np.arange(s0, s1 + 1, dtype=np.float64)
    slope, _, r2 = linear_fit(steps, curve[s0 : s1 + 1])
    return LyapunovEstimate(
        lambda_max=slope,
        embedding_dim=int(embedding_dim),
        delay=delay,
        theiler=int(theiler),
        fit_range=(s0, s1),
        divergence_curve=curve,
        radius=float(radius),
        references=int(used),
        r_squared=r2,
        low_confidence=bool(slope > tol and r2 < min_r_squared),
        length=int(x.size),
    )


def lyapunov_trend(series, fractions=(0.25, 0.5, 1.0), **kwargs):
    """Estimates on leading fractions of the series (length doubling by default)."""
    x = as_series(series).values
    out = []
    for f in fractions:
        n = int(round(f * x.size))
        out.append(estimate_lyapunov(x[:n], **kwargs))
    return out


def classify_dynamics(lyapunov, tol=0.001, min_r_squared=0.8):
    """'regular', 'quasi_periodic' or 'chaotic'.

    ``lyapunov`` is one estimate or a sequence of estimates on increasing
    series lengths (see :func:`lyapunov_trend`); the last one decides.

    A small positive exponent (0 < lambda <= tol) counts as quasi-periodic
    when S(s) actually grows linearly (r^2 >= min_r_squared) and every
    shorter estimate is positive too.  A flat, noisy S(s) or a sign change
    along the trend is read as zero, i.e. regular.  Heuristic.
    """
    ests = list(lyapunov) if isinstance(lyapunov, (list, tuple)) else [lyapunov]
    if not ests:
        raise InvalidParameterError("need at least one estimate")
    final = ests[-1]
    if final.low_confidence:
        raise IndeterminateError("low-confidence estimate (poor linear fit of S(s))")
    lam = final.lambda_max
    if lam > tol:
        return "chaotic"
    if lam <= 0 or final.r_squared < min_r_squared:
        return "regular"
    if any(e.lambda_max <= 0 for e in ests[:-1]):
        return "regular"
    return "quasi_periodic"
