"""Truncated Fock-space states and operators.

States are plain complex numpy vectors indexed by photon number.  The Kerr
propagator is diagonal and stored as its vector of phases; the kick
(displacement) operator ``exp(-i g (a + a+))`` is a dense matrix.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal, expm
from scipy.special import eval_genlaguerre, gammaln

from .errors import DimensionMismatchError, InvalidDimensionError
from .params import KICK_METHODS


def _check_dim(dim, minimum=1):
    if int(dim) != dim or dim < minimum:
        raise InvalidDimensionError(f"dimension must be an integer >= {minimum}, got {dim!r}")
    return int(dim)


def make_vacuum(dim):
    """Return |0> in a ``dim``-dimensional Fock space."""
    dim = _check_dim(dim)
    psi = np.zeros(dim, dtype=np.complex128)
    psi[0] = 1.0
    return psi


def fock_state(n, dim):
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise InvalidDimensionError(f"photon number {n} outside 0..{dim - 1}")
    psi = np.zeros(dim, dtype=np.complex128)
    psi[n] = 1.0
    return psi


def coherent_state(alpha, dim):
    """Amplitudes ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)`` for n < dim (not renormalised)."""
    dim = _check_dim(dim)
    alpha = complex(alpha)
    n = np.arange(dim)
    if alpha == 0:
        return make_vacuum(dim)
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * np.angle(alpha) * n)


def norm(psi):
    return float(np.sqrt(np.vdot(psi, psi).real))


def photon_numbers(dim):
    return np.arange(_check_dim(dim), dtype=np.float64)


def make_kerr_diagonal(chi, period, dim):
    """Phases ``exp(-i chi T n(n-1))`` of the free Kerr evolution, n = 0..dim-1.

    n(n-1) is formed in integer arithmetic; entries 0 and 1 are set to
    exactly 1.
    """
    dim = _check_dim(dim)
    n = np.arange(dim, dtype=np.int64)
    phase = chi * period * (n * (n - 1)).astype(np.float64)
    out = np.exp(-1j * phase)
    out[: min(dim, 2)] = 1.0
    return out


def annihilation(dim):
    dim = _check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=np.float64)), 1)


def quadrature_generator(dim):
    """Dense truncated ``a + a+`` (real symmetric tridiagonal)."""
    a = annihilation(dim)
    return a + a.T


@dataclass(frozen=True)
class KickMatrix:
    elements: np.ndarray
    strength: float
    method: str

    @property
    def dim(self):
        return self.elements.shape[0]

    def adjoint(self):
        return KickMatrix(self.elements.conj().T, -self.strength, self.method)


def _kick_laguerre(g, dim):
    # D(alpha) with alpha = -i g; the matrix is complex symmetric
    if g == 0:
        return np.eye(dim, dtype=np.complex128)
    x = g * g
    m, n = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    hi = np.maximum(m, n)
    lo = np.minimum(m, n)
    k = hi - lo
    log_pref = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) + k * np.log(abs(g)) - 0.5 * x
    lag = eval_genlaguerre(lo, k, x)
    phase = (-1j * np.sign(g)) ** (k % 4)
    return np.exp(log_pref) * lag * phase


def _kick_expm(g, dim, buffer):
    work = dim + buffer
    return expm(-1j * g * quadrature_generator(work))[:dim, :dim]


def _kick_spectral(g, dim):
    if g == 0 or dim == 1:
        return np.eye(dim, dtype=np.complex128)
    nodes, vecs = eigh_tridiagonal(np.zeros(dim), np.sqrt(np.arange(1, dim, dtype=np.float64)))
    # re-orthogonalise: eigenvectors come back orthogonal only to ~1e-13 at dim 128
    q, r = np.linalg.qr(vecs)
    vecs = q * np.sign(np.diag(r))
    return (vecs * np.exp(-1j * g * nodes)) @ vecs.T


def make_kick_matrix(strength, dim, buffer=0, method="spectral"):
    """Kick operator ``exp(-i g (a + a+))`` restricted to ``dim`` Fock states.

    method
        ``"laguerre"``: closed-form matrix elements of the untruncated
        displacement operator (exact entries; ``buffer`` is not needed).
        ``"expm"``: Pade scaling-and-squaring exponential of the generator
        truncated at ``dim + buffer``, cropped to ``dim``.  Test oracle.
        ``"spectral"``: exact exponential of the generator truncated at
        ``dim`` via its tridiagonal eigendecomposition.  Unitary to machine
        precision, agrees with the other two away from the boundary.

    The first two are blocks of an (approximately) infinite unitary, so
    columns near ``dim`` leak and the block is not unitary there.
    """
    dim = _check_dim(dim)
    if int(buffer) != buffer or buffer < 0:
        raise InvalidDimensionError(f"buffer must be an integer >= 0, got {buffer!r}")
    g = float(strength)
    if method == "laguerre":
        elements = _kick_laguerre(g, dim)
    elif method == "expm":
        elements = _kick_expm(g, dim, int(buffer))
    elif method == "spectral":
        elements = _kick_spectral(g, dim)
    else:
        raise ValueError(f"method must be one of {KICK_METHODS}, got {method!r}")
    return KickMatrix(np.ascontiguousarray(elements, dtype=np.complex128), g, method)


def unitarity_error(matrix):
    """Operator 2-norm of ``M+ M - I``."""
    m = matrix.elements if isinstance(matrix, KickMatrix) else np.asarray(matrix)
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0]), 2))


def _check_match(n, psi):
    if psi.ndim != 1 or psi.shape[0] != n:
        raise DimensionMismatchError(f"operator dimension {n} does not match state shape {psi.shape}")


def apply_kerr(diag, psi):
    """Multiply amplitude n by ``diag[n]``."""
    diag = np.asarray(diag)
    psi = np.asarray(psi)
    _check_match(diag.shape[0], psi)
    return diag * psi


def apply_matrix(matrix, psi):
    m = matrix.elements if isinstance(matrix, KickMatrix) else np.asarray(matrix)
    psi = np.asarray(psi)
    _check_match(m.shape[1], psi)
    return m @ psi


def tail_population(psi, width):
    """Total probability in the top ``width`` basis states."""
    if width <= 0:
        return 0.0
    tail = np.asarray(psi)[-width:]
    return float(np.sum(tail.real**2 + tail.imag**2))
