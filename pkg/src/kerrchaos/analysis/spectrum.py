"""Power spectrum of a sampled series and its Shannon entropy."""

from dataclasses import dataclass
import math

import numpy as np

from ..errors import DomainError, InsufficientDataError


@dataclass(frozen=True)
class TimeSeries:
    """Real samples taken at kicks ``t0, t0 + stride, t0 + 2*stride, ...``."""

    values: np.ndarray
    t0: int = 0
    stride: int = 1

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.stride < 1:
            raise ValueError("stride must be >= 1")

    def __len__(self):
        return self.values.shape[0]

    @property
    def times(self):
        return self.t0 + self.stride * np.arange(len(self))

    def window(self, start=None, stop=None):
        """Sub-series by sample index (``stop`` exclusive)."""
        start = 0 if start is None else int(start)
        stop = len(self) if stop is None else int(stop)
        return TimeSeries(self.values[start:stop], self.t0 + start * self.stride, self.stride)

    def check(self, minimum=2):
        if len(self) < minimum:
            raise InsufficientDataError(f"series has {len(self)} samples, need at least {minimum}")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("series contains non-finite values")
        return self


def as_series(series):
    return series if isinstance(series, TimeSeries) else TimeSeries(np.asarray(series, dtype=float))


@dataclass(frozen=True)
class PowerSpectrum:
    """``power[j] = |sum_t F(t) exp(-i omega_j t)|^2`` at ``omega_j = 2 pi j / (N stride)``."""

    frequencies: np.ndarray
    power: np.ndarray
    normalized: np.ndarray

    def __len__(self):
        return self.power.shape[0]

    def peaks(self, count=2, min_separation=1, include_dc=False, one_sided=True):
        """Indices of the ``count`` largest local maxima, separated by ``min_separation`` bins."""
        p = self.power
        n = p.shape[0]
        top = n // 2 + 1 if one_sided else n
        lo = 0 if include_dc else 1
        cand = [
            j
            for j in range(lo, top)
            if (j == 0 or p[j] >= p[j - 1]) and (j + 1 >= n or p[j] >= p[j + 1])
        ]
        cand.sort(key=lambda j: (-p[j], j))
        chosen = []
        for j in cand:
            if all(abs(j - c) > min_separation for c in chosen):
                chosen.append(j)
            if len(chosen) == count:
                break
        return chosen


def power_spectrum(series):
    """Discrete Fourier power of a real series over its full length."""
    ts = as_series(series).check(2)
    x = ts.values
    n = x.shape[0]
    power = np.abs(np.fft.fft(x)) ** 2
    total = power.sum()
    if not total > 0:
        raise DomainError("all-zero series has no normalisable spectrum")
    freqs = 2.0 * np.pi * np.arange(n) / (n * ts.stride)
    return PowerSpectrum(freqs, power, power / total)


@dataclass(frozen=True)
class EntropyResult:
    entropy: float
    bins_used: int
    base: float = math.e


def spectral_entropy(spectrum, base=math.e, include_dc=True):
    """Shannon entropy of the normalised power, with 0 log 0 = 0.

    With ``include_dc=False`` the zero-frequency bin is dropped and the rest
    renormalised.
    """
    p = np.asarray(spectrum.normalized if isinstance(spectrum, PowerSpectrum) else spectrum, float)
    if not include_dc:
        p = p[1:]
        s = p.sum()
        if not s > 0:
            raise DomainError("no power outside the DC bin")
        p = p / s
    nz = p[p > 0]
    h = float(-np.sum(nz * np.log(nz)))
    if base != math.e:
        h /= math.log(base)
    return EntropyResult(max(h, 0.0), int(nz.size), base)


def default_window(values, cap_fraction=0.1):
    """``(t_min, t_max)`` sample indices: skip to the first local minimum of the
    series after index 0, but never past ``cap_fraction`` of the length."""
    v = np.asarray(values)
    n = v.shape[0]
    cap = int(cap_fraction * n)
    t_min = cap
    for i in range(1, n - 1):
        if v[i] <= v[i - 1] and v[i] < v[i + 1]:
            t_min = min(i, cap)
            break
    return t_min, n


def fidelity_entropy(series, t_min=None, t_max=None, base=math.e, include_dc=True):
    """Spectral entropy of ``series`` restricted to samples ``[t_min, t_max)``."""
    ts = as_series(series)
    if t_min is None or t_max is None:
        d_min, d_max = default_window(ts.values)
        t_min = d_min if t_min is None else t_min
        t_max = d_max if t_max is None else t_max
    return spectral_entropy(power_spectrum(ts.window(t_min, t_max)), base, include_dc)


def entropy_vs_epsilon(results, t_min, t_max, base=math.e, include_dc=True):
    """Entropy of each ``(epsilon, series)`` pair over the same sample window.

    A common window keeps the entries comparable, so both bounds are required.
    """
    out = []
    for eps, series in sorted(results, key=lambda r: r[0]):
        ts = as_series(series)
        if t_max > len(ts):
            raise InsufficientDataError(f"series for epsilon={eps} shorter than t_max={t_max}")
        out.append((float(eps), fidelity_entropy(ts, t_min, t_max, base, include_dc).entropy))
    return out
