"""Classical kicked-Kerr map and bifurcation scans.

The c-number recurrence is

    alpha' = exp(-i chi T |alpha - i eps|^2) (alpha - i eps)

i.e. a kick shifts alpha by -i eps and the free evolution rotates it by an
intensity-dependent angle.  The map is area preserving, so regular motion
shows up as periodic points or invariant curves rather than attractors.
"""

from dataclasses import dataclass, field
import cmath

import numpy as np

from . import _ext
from .errors import IndeterminateError, InvalidParameterError
from .io import write_csv_table

BLOWUP = 1e6


def classical_step(alpha, chi, period, epsilon):
    """One kick plus free evolution; |result| == |alpha - i epsilon|."""
    b = complex(alpha) - 1j * epsilon
    return cmath.exp(-1j * chi * period * (b.real * b.real + b.imag * b.imag)) * b


def classical_orbit(chi, period, epsilon, steps, alpha0=0j):
    """Return alpha_0 .. alpha_steps; stops early (NaN-padded) past the blow-up radius."""
    out = np.full(steps + 1, np.nan + 1j * np.nan)
    a = complex(alpha0)
    out[0] = a
    for k in range(1, steps + 1):
        a = classical_step(a, chi, period, epsilon)
        if not cmath.isfinite(a) or abs(a) > BLOWUP:
            break
        out[k] = a
    return out


@dataclass
class BifurcationScan:
    """Post-transient samples of |alpha|^2 for each kick strength.

    ``energies[i]`` holds the samples for ``epsilons[i]`` (NaN when that
    trajectory diverged).  ``divergence`` is the finite-time growth rate per
    kick of an infinitesimally displaced shadow orbit.
    """

    epsilons: np.ndarray
    energies: np.ndarray
    diverged: np.ndarray
    divergence: np.ndarray
    chi: float
    period: float
    transient: int
    samples: int
    meta: dict = field(default_factory=dict)

    def index_of(self, epsilon):
        i = int(np.argmin(np.abs(self.epsilons - epsilon)))
        return i

    def to_csv(self, path):
        eps = np.repeat(self.epsilons, self.samples)
        energy = self.energies.reshape(-1)
        keep = np.isfinite(energy)
        meta = {
            "chi": self.chi,
            "period": self.period,
            "transient": self.transient,
            "samples": self.samples,
            "diverged": int(self.diverged.sum()),
        }
        meta.update(self.meta)
        write_csv_table(path, {"epsilon": eps[keep], "energy": energy[keep]}, meta)


def bifurcation_scan(
    chi,
    period,
    eps_range,
    eps_steps,
    transient=2000,
    samples=500,
    alpha0=0j,
    divergence_steps=2000,
    backend=None,
    epsilons=None,
):
    """Iterate from ``alpha0`` for each of ``eps_steps`` values spanning ``eps_range``.

    An explicit grid ``epsilons`` overrides ``eps_range``/``eps_steps``.
    """
    if transient < 0 or samples < 1:
        raise InvalidParameterError("need transient >= 0 and samples >= 1")
    if epsilons is not None:
        eps = np.array(epsilons, dtype=np.float64).reshape(-1)
        if eps.size == 0:
            raise InvalidParameterError("empty epsilon grid")
    else:
        if eps_steps < 1:
            raise InvalidParameterError("eps_steps must be >= 1")
        start, stop = eps_range
        eps = np.linspace(start, stop, int(eps_steps)) if eps_steps > 1 else np.array([float(start)])
    kern = _ext.get_kernels(backend)
    chi_t = chi * period
    energies, diverged = kern.classical_energies(eps, chi_t, alpha0, transient, samples, BLOWUP)
    if divergence_steps > 0:
        rate = kern.classical_divergence(eps, chi_t, alpha0, transient, divergence_steps, 1e-9)
    else:
        rate = np.full(eps.shape, np.nan)
    return BifurcationScan(
        epsilons=eps,
        energies=np.asarray(energies),
        diverged=np.asarray(diverged, dtype=bool),
        divergence=np.asarray(rate),
        chi=float(chi),
        period=float(period),
        transient=int(transient),
        samples=int(samples),
    )


def count_distinct(values, tol):
    v = np.sort(np.asarray(values))
    if v.size == 0:
        return 0
    return int(1 + np.count_nonzero(np.diff(v) > tol))


def classify_window(scan, epsilon, distinct_tol=1e-6, max_period=16, divergence_tol=0.02):
    """'regular' or 'chaotic' for the scan column nearest ``epsilon``.

    Periodic orbits (at most ``max_period`` distinct energies) are regular.
    Otherwise the shadow-orbit growth rate decides: invariant curves separate
    only linearly (rate -> 0), chaotic orbits exponentially.
    """
    i = scan.index_of(epsilon)
    if scan.diverged[i]:
        return "chaotic"
    samples = scan.energies[i]
    if samples.size < 2:
        raise IndeterminateError("need at least two samples to classify")
    if count_distinct(samples, distinct_tol) <= max_period:
        return "regular"
    rate = scan.divergence[i]
    if not np.isfinite(rate):
        raise IndeterminateError("scan has no divergence rates; rerun with divergence_steps > 0")
    return "regular" if rate <= divergence_tol else "chaotic"


def window_labels(scan, **kwargs):
    return [classify_window(scan, e, **kwargs) for e in scan.epsilons]


def window_boundaries(scan, **kwargs):
    """Midpoints between neighbouring scan columns whose classification differs.

    Returns a list of ``(epsilon, from_label, to_label)``.
    """
    labels = window_labels(scan, **kwargs)
    out = []
    for i in range(1, len(labels)):
        if labels[i] != labels[i - 1]:
            mid = 0.5 * (scan.epsilons[i] + scan.epsilons[i - 1])
            out.append((float(mid), labels[i - 1], labels[i]))
    return out
