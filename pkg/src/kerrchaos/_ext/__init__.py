"""Kernel backend selection.

The compiled ``_core`` extension is used when it was built; otherwise, or
when ``KERRCHAOS_PURE=1`` is set in the environment, the numpy versions in
:mod:`kerrchaos._ext.fallback` are used.  Both expose the same functions:

``propagate``
    stroboscopic iteration of the unperturbed/perturbed pair with per-kick
    fidelity, photon-weighted overlap, mean photon number and leak tracking
``classical_energies``, ``classical_divergence``
    batched iteration of the classical recurrence over kick strengths
``kantz_curve``
    neighbour-averaged log divergence of a delay-embedded series
"""

import os

from . import fallback

BACKEND = "python"
kernels = fallback

if not os.environ.get("KERRCHAOS_PURE"):
    try:
        from . import _core as kernels  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        pass


def get_kernels(backend=None):
    """Return the kernel module for ``backend`` ('cython', 'python' or None for the default)."""
    if backend is None:
        return kernels
    if backend == "python":
        return fallback
    if backend == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown kernel backend {backend!r}")


__all__ = ["BACKEND", "kernels", "get_kernels", "fallback"]
