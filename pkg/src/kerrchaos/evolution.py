"""Stroboscopic propagation of the unperturbed and perturbed states.

One map period is a kick followed by free Kerr evolution,
``psi <- U_NL @ U_K @ psi``.  Observables are sampled right after each full
period, so index k holds the state after k kicks (k = 0 is the vacuum).
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _ext
from .errors import DimensionMismatchError, InvalidParameterError, TruncationError
from .fock import (
    apply_kerr,
    apply_matrix,
    make_kerr_diagonal,
    make_kick_matrix,
    make_vacuum,
    photon_numbers,
    tail_population,
)
from .io import read_csv_table, write_csv_table
from .params import SystemParams

LEAK_TOLERANCE = 1e-10
_CHUNK = 8192


def mean_photon_number(psi):
    """<n> = sum n |psi_n|^2."""
    psi = np.asarray(psi)
    pop = psi.real**2 + psi.imag**2
    return float(np.dot(np.arange(psi.shape[0]), pop))


def overlap_fidelity(psi_u, psi_p):
    """|<psi_p|psi_u>|."""
    return float(abs(np.vdot(psi_p, psi_u)))


def photon_weighted_overlap(psi_u, psi_p):
    """|<psi_p| n |psi_u>| = |sum_n n conj(p_n) u_n|."""
    psi_u = np.asarray(psi_u)
    return float(abs(np.vdot(psi_p, np.arange(psi_u.shape[0]) * psi_u)))


def leak_width(params):
    return max(1, params.buffer // 2)


class EvolutionEngine:
    """Pair of states evolved with the nominal and the perturbed kick.

    The operators are built once; :meth:`step` advances both states by one
    period.  The engine is not thread safe; use one per worker.
    """

    def __init__(self, params):
        self.params = params
        self.kerr = make_kerr_diagonal(params.kerr_factor * params.chi, params.period, params.dim)
        self.kick_u = make_kick_matrix(params.epsilon, params.dim, params.buffer, params.kick_method)
        self.kick_p = make_kick_matrix(
            params.epsilon + params.delta_epsilon, params.dim, params.buffer, params.kick_method
        )
        self.psi_u = make_vacuum(params.dim)
        self.psi_p = make_vacuum(params.dim)
        self.k = 0
        self.leak_max = 0.0

    @property
    def step_matrices(self):
        """Full one-period matrices ``diag(kerr) @ kick`` for both branches."""
        return (
            self.kerr[:, None] * self.kick_u.elements,
            self.kerr[:, None] * self.kick_p.elements,
        )

    def step(self):
        self.psi_u = apply_kerr(self.kerr, apply_matrix(self.kick_u, self.psi_u))
        self.psi_p = apply_kerr(self.kerr, apply_matrix(self.kick_p, self.psi_p))
        self.k += 1
        self.leak_max = max(self.leak_max, self.leak())
        return self

    def step_back(self):
        """Undo one period of the unperturbed branch: ``psi <- U_K+ U_NL+ psi``."""
        self.psi_u = self.kick_u.elements.conj().T @ (self.kerr.conj() * self.psi_u)
        self.psi_p = self.kick_p.elements.conj().T @ (self.kerr.conj() * self.psi_p)
        self.k -= 1
        return self

    def leak(self):
        w = leak_width(self.params)
        return max(tail_population(self.psi_u, w), tail_population(self.psi_p, w))

    def fidelity(self):
        return overlap_fidelity(self.psi_u, self.psi_p)

    def fidelity_n(self):
        return photon_weighted_overlap(self.psi_u, self.psi_p)

    def mean_photons(self):
        return mean_photon_number(self.psi_u)


@dataclass
class TrajectoryRecord:
    """Sampled observables of one run; all series share the index ``k``."""

    params: SystemParams
    k: np.ndarray
    fidelity: np.ndarray
    f_n: np.ndarray
    mean_photons_u: np.ndarray
    leak: np.ndarray
    leak_max: float
    stride: int = 1
    truncation_unsafe: bool = False
    first_unsafe_kick: int | None = None
    completed: bool = True
    backend: str = field(default="", compare=False)

    def __len__(self):
        return len(self.k)

    def series(self, name="fidelity"):
        from .analysis.spectrum import TimeSeries

        values = {"fidelity": self.fidelity, "f_n": self.f_n, "mean_n": self.mean_photons_u}[name]
        return TimeSeries(values, t0=int(self.k[0]), stride=self.stride)

    def metadata(self):
        meta = dict(self.params.as_dict())
        meta.update(
            stride=self.stride,
            leak_max=self.leak_max,
            truncation_unsafe=self.truncation_unsafe,
            first_unsafe_kick=self.first_unsafe_kick,
            completed=self.completed,
        )
        return meta

    def to_csv(self, path):
        cols = {
            "k": self.k,
            "F": self.fidelity,
            "F_N": self.f_n,
            "mean_n": self.mean_photons_u,
        }
        write_csv_table(path, cols, self.metadata())

    @classmethod
    def from_csv(cls, path):
        meta, cols = read_csv_table(path)
        pnames = SystemParams.field_names()
        params = SystemParams(**{k: meta[k] for k in pnames if k in meta})
        unsafe = meta.get("first_unsafe_kick")
        return cls(
            params=params,
            k=cols["k"].astype(np.int64),
            fidelity=cols["F"],
            f_n=cols["F_N"],
            mean_photons_u=cols["mean_n"],
            leak=np.full(len(cols["k"]), np.nan),
            leak_max=float(meta.get("leak_max", math.nan)),
            stride=int(meta.get("stride", 1)),
            truncation_unsafe=bool(meta.get("truncation_unsafe", False)),
            first_unsafe_kick=None if unsafe in (None, "None") else int(unsafe),
            completed=bool(meta.get("completed", True)),
        )


def run_trajectory(params, stride=1, backend=None, leak_policy="flag", leak_tol=LEAK_TOLERANCE):
    """Iterate the map ``params.kicks`` times from the vacuum.

    leak_policy
        ``"flag"`` keeps going and marks the record truncation-unsafe,
        ``"stop"`` returns the samples up to the first unsafe kick,
        ``"raise"`` raises :class:`TruncationError`.
    """
    if stride < 1 or int(stride) != stride:
        raise InvalidParameterError("stride must be a positive integer")
    if leak_policy not in ("flag", "stop", "raise"):
        raise InvalidParameterError(f"unknown leak_policy {leak_policy!r}")
    kern = _ext.get_kernels(backend)
    engine = EvolutionEngine(params)
    step_u, step_p = engine.step_matrices
    photon = photon_numbers(params.dim)
    leak_start = params.dim - leak_width(params)

    chunk = max(stride, (_CHUNK // stride) * stride)
    psi_u, psi_p = engine.psi_u, engine.psi_p
    parts = {"F": [], "FN": [], "N": [], "L": []}
    leak_max = 0.0
    done = 0
    first_unsafe = None
    completed = True
    while True:
        n = min(chunk, params.kicks - done)
        fid, fidn, mean_n, leak, lmax, psi_u, psi_p = kern.propagate(
            step_u, step_p, psi_u, psi_p, photon, n, stride, leak_start
        )
        sl = slice(0 if done == 0 else 1, None)
        for key, arr in zip("F FN N L".split(), (fid, fidn, mean_n, leak)):
            parts[key].append(arr[sl])
        leak_max = max(leak_max, lmax)
        if first_unsafe is None and lmax > leak_tol:
            # locate to sample resolution within this chunk
            hit = np.nonzero(leak > leak_tol)[0]
            first_unsafe = done + (int(hit[0]) * stride if hit.size else n)
            if leak_policy == "raise":
                raise TruncationError(
                    f"population {lmax:.3g} in the top {leak_width(params)} Fock states "
                    f"by kick {first_unsafe}; increase dim"
                )
            if leak_policy == "stop":
                completed = False
                done += n
                break
        done += n
        if done >= params.kicks:
            break

    cols = {key: np.concatenate(v) for key, v in parts.items()}
    k = np.arange(cols["F"].size, dtype=np.int64) * stride
    if not completed:
        keep = k <= first_unsafe
        cols = {key: v[keep] for key, v in cols.items()}
        k = k[keep]
    return TrajectoryRecord(
        params=params,
        k=k,
        fidelity=cols["F"],
        f_n=cols["FN"],
        mean_photons_u=cols["N"],
        leak=cols["L"],
        leak_max=float(leak_max),
        stride=int(stride),
        truncation_unsafe=first_unsafe is not None,
        first_unsafe_kick=first_unsafe,
        completed=completed,
        backend=getattr(kern, "__name__", ""),
    )


def first_return(fidelity, threshold=0.99, drop=0.5, stride=1):
    """Kick index at which F first comes back to ``threshold`` after falling below ``drop``.

    Returns None when the series never leaves and comes back.
    """
    f = np.asarray(fidelity)
    below = np.nonzero(f < drop)[0]
    if below.size == 0:
        return None
    after = np.nonzero(f[below[0] :] >= threshold)[0]
    if after.size == 0:
        return None
    return int((below[0] + after[0]) * stride)


def recurrence_peak(fidelity, threshold=0.99, drop=0.5, stride=1):
    """Kick index of the maximum of the first recurrence excursion above ``threshold``."""
    f = np.asarray(fidelity)
    start = first_return(f, threshold, drop)
    if start is None:
        return None
    end = start
    while end + 1 < f.size and f[end + 1] >= threshold:
        end += 1
    return int((start + int(np.argmax(f[start : end + 1]))) * stride)


def states_match(a, b):
    if a.shape != b.shape:
        raise DimensionMismatchError("state dimensions differ")
    return float(abs(np.vdot(a, b)))
