"""Pure numpy implementations of the hot loops.

Same call signatures as the compiled ``_core`` module; selected automatically
when the extension is not built or ``KERRCHAOS_PURE=1`` is set.
"""

import numpy as np
from scipy.spatial import cKDTree


def propagate(step_u, step_p, psi_u, psi_p, photon, kicks, stride, leak_start):
    """Iterate two states under their one-period matrices and record overlaps.

    Returns ``(fidelity, fidelity_n, mean_n, leak, leak_max, psi_u, psi_p)``
    where the series are sampled at k = 0, stride, 2*stride, ...
    """
    u = np.array(psi_u, dtype=np.complex128)
    p = np.array(psi_p, dtype=np.complex128)
    nrec = kicks // stride + 1
    fid = np.empty(nrec)
    fidn = np.empty(nrec)
    mean_n = np.empty(nrec)
    leak = np.empty(nrec)

    def observe(idx):
        pu = u.real * u.real + u.imag * u.imag
        pp = p.real * p.real + p.imag * p.imag
        fid[idx] = abs(np.vdot(p, u))
        fidn[idx] = abs(np.vdot(p, photon * u))
        mean_n[idx] = np.dot(photon, pu)
        leak[idx] = max(pu[leak_start:].sum(), pp[leak_start:].sum())

    observe(0)
    leak_max = leak[0]
    rec = 1
    for k in range(1, kicks + 1):
        u = step_u @ u
        p = step_p @ p
        if leak_start < u.shape[0]:
            lk = max(np.sum(np.abs(u[leak_start:]) ** 2), np.sum(np.abs(p[leak_start:]) ** 2))
            if lk > leak_max:
                leak_max = lk
        if k % stride == 0:
            observe(rec)
            rec += 1
    return fid, fidn, mean_n, leak, float(leak_max), u, p


def classical_energies(eps, chi_t, alpha0, transient, samples, blowup):
    """Iterate the classical kicked-Kerr recurrence for every kick strength.

    Returns ``(energies, diverged)`` with ``energies`` of shape
    ``(len(eps), samples)``; rows of diverged trajectories are NaN.
    """
    eps = np.asarray(eps, dtype=np.float64)
    a = np.full(eps.shape, complex(alpha0), dtype=np.complex128)
    diverged = np.zeros(eps.shape, dtype=bool)
    out = np.empty((eps.size, samples))
    for k in range(transient + samples):
        b = a - 1j * eps
        r2 = b.real * b.real + b.imag * b.imag
        a = np.exp(-1j * chi_t * r2) * b
        bad = ~np.isfinite(a) | (np.abs(a) > blowup)
        if bad.any():
            diverged |= bad
            a[bad] = 0.0
        if k >= transient:
            out[:, k - transient] = a.real * a.real + a.imag * a.imag
    out[diverged] = np.nan
    return out, diverged


def classical_divergence(eps, chi_t, alpha0, transient, steps, d0):
    """Mean log growth per kick of a renormalised shadow orbit offset by ``d0``."""
    eps = np.asarray(eps, dtype=np.float64)
    a = np.full(eps.shape, complex(alpha0), dtype=np.complex128)

    def step(z):
        b = z - 1j * eps
        return np.exp(-1j * chi_t * (b.real * b.real + b.imag * b.imag)) * b

    for _ in range(transient):
        a = step(a)
    b = a + d0
    acc = np.zeros(eps.shape)
    for _ in range(steps):
        a = step(a)
        b = step(b)
        d = np.abs(b - a)
        d = np.where(d > 0, d, d0 * 1e-300)
        acc += np.log(d / d0)
        b = a + (b - a) * (d0 / d)
    return acc / steps


def _embed(x, m, tau, count):
    return np.stack([x[i * tau : i * tau + count] for i in range(m)], axis=1)


def kantz_curve(x, m, tau, theiler, radius, smax, chunk=2048):
    """Averaged log divergence S(s), s = 0..smax, and the number of references used.

    Neighbours are taken in the max norm of the delay vectors; pairs closer
    than ``theiler`` in time are excluded.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    count = x.size - (m - 1) * tau - smax
    if count <= 0:
        return np.zeros(smax + 1), 0
    emb = _embed(x, m, tau, count)
    tree = cKDTree(emb)
    last = (m - 1) * tau
    offsets = np.arange(smax + 1)
    total = np.zeros(smax + 1)
    used = 0
    for lo in range(0, count, chunk):
        hi = min(lo + chunk, count)
        lists = tree.query_ball_point(emb[lo:hi], radius, p=np.inf)
        for i, nb in zip(range(lo, hi), lists):
            if not nb:
                continue
            nb = np.asarray(nb)
            nb = nb[np.abs(nb - i) > theiler]
            if nb.size == 0:
                continue
            ref = x[i + last + offsets]
            fut = x[nb[:, None] + last + offsets[None, :]]
            dist = np.abs(fut - ref[None, :]).mean(axis=0)
            total += np.log(np.maximum(dist, 1e-300))
            used += 1
    if used:
        total /= used
    return total, used
