import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from kerrchaos import (
    InvalidDimensionError,
    DimensionMismatchError,
    apply_kerr,
    apply_matrix,
    coherent_state,
    make_kerr_diagonal,
    make_kick_matrix,
    make_vacuum,
    unitarity_error,
)
from kerrchaos.fock import fock_state, norm, quadrature_generator, tail_population

# frozen at 30 digits from an independent mpmath evaluation
COH_035_3 = 0.0164637199790535563071206480188j
COH_01_2 = -0.00703580071402384184091706569232
KICK_08 = {
    (5, 2): 0.336214037080208457065744423174j,
    (2, 5): 0.336214037080208457065744423174j,
    (0, 7): 0.00214506475181343229563639962407j,
    (10, 10): -0.120055988392422109406513962312,
}


def test_vacuum():
    assert np.array_equal(make_vacuum(4), [1, 0, 0, 0])
    assert np.array_equal(make_vacuum(1), [1])
    assert norm(make_vacuum(128)) == 1.0


@pytest.mark.parametrize("dim", [0, -3, 2.5])
def test_vacuum_bad_dim(dim):
    with pytest.raises(InvalidDimensionError):
        make_vacuum(dim)


def test_kerr_examples():
    d = make_kerr_diagonal(1.0, math.pi, 8)
    assert d[0] == 1 and d[1] == 1
    assert abs(d[2] - 1) < 1e-14
    assert abs(d[3] - 1) < 1e-14
    assert abs(make_kerr_diagonal(0.5, math.pi, 4)[3] + 1) < 1e-14


def test_kerr_identity_at_pi():
    # n(n-1) is always even, so chi T = pi gives all phases exactly 1 in exact arithmetic
    d = make_kerr_diagonal(1.0, math.pi, 512)
    assert np.max(np.abs(d - 1)) < 1e-9
    assert np.max(np.abs(np.abs(d) - 1)) < 1e-14


def test_kerr_half_period_pattern():
    # exp(-i pi/2 n(n-1)) = (+1, +1, -1, -1, +1, +1, ...)
    d = make_kerr_diagonal(0.5, math.pi, 64)
    expected = np.array([1, 1, -1, -1] * 16)
    assert np.max(np.abs(d - expected)) < 1e-11


def test_apply_kerr():
    d = make_kerr_diagonal(1.0, math.pi, 4)
    assert np.allclose(apply_kerr(d, make_vacuum(4)), make_vacuum(4), atol=0, rtol=0)
    psi = np.array([0, 0, 1, 0], dtype=complex)
    assert np.max(np.abs(apply_kerr(d, psi) - psi)) < 1e-14
    with pytest.raises(DimensionMismatchError):
        apply_kerr(d, make_vacuum(5))


@pytest.mark.parametrize("method", ["spectral", "laguerre", "expm"])
def test_zero_kick_is_identity(method):
    k = make_kick_matrix(0.0, 16, 8, method)
    assert np.max(np.abs(k.elements - np.eye(16))) < 1e-15


@pytest.mark.parametrize("method", ["spectral", "laguerre", "expm"])
def test_vacuum_overlap(method):
    k = make_kick_matrix(0.1, 32, 32, method)
    assert abs(k.elements[0, 0] - 0.995012479192682313352564246232) < 1e-14


@pytest.mark.parametrize("method", ["spectral", "laguerre", "expm"])
@pytest.mark.parametrize("g", [0.1, 0.35, 0.8])
def test_coherent_column(method, g):
    dim, buffer = 64, 32
    col = make_kick_matrix(g, dim, buffer, method).elements[:, 0]
    n = np.arange(dim - buffer + 1)
    ref = coherent_state(-1j * g, dim)[n]
    assert np.max(np.abs(col[n] - ref)) < 1e-10


def test_coherent_frozen_values():
    assert abs(coherent_state(-0.35j, 8)[3] - COH_035_3) < 1e-15
    assert abs(coherent_state(-0.1j, 8)[2] - COH_01_2) < 1e-15


@pytest.mark.parametrize("method", ["laguerre", "expm"])
def test_kick_frozen_elements(method):
    k = make_kick_matrix(0.8, 32, 64, method).elements
    for (m, n), v in KICK_08.items():
        assert abs(k[m, n] - v) < 1e-13


def test_laguerre_matches_expm_oracle():
    for dim in (1, 3, 16, 40, 64):
        for g in (0.1, 0.35, 0.8, 1.0, -0.6):
            a = make_kick_matrix(g, dim, method="laguerre").elements
            b = expm(-1j * g * quadrature_generator(dim + 64))[:dim, :dim]
            assert np.max(np.abs(a - b)) < 1e-10


def test_laguerre_large_dim_is_finite():
    # log-space factorials: n beyond 170 must not overflow
    k = make_kick_matrix(0.5, 260, method="laguerre").elements
    assert np.all(np.isfinite(k))
    assert abs(k[200, 199]) < 1


def test_spectral_is_unitary():
    assert unitarity_error(make_kick_matrix(0.5, 32, 32)) < 1e-10
    assert unitarity_error(make_kick_matrix(0.8, 128, 64)) < 1e-13


def test_exact_block_is_not_unitary_at_the_edge():
    # the dim x dim block of the untruncated displacement leaks through the top rows
    assert unitarity_error(make_kick_matrix(0.5, 32, 32, "laguerre")) > 1e-3


def test_spectral_agrees_away_from_edge():
    a = make_kick_matrix(0.35, 128, method="spectral").elements
    b = make_kick_matrix(0.35, 128, method="laguerre").elements
    assert np.max(np.abs(a[:64, :64] - b[:64, :64])) < 1e-10


def test_kick_symmetry():
    # (-i g)^(m-n) phases make D(-i g) complex symmetric
    k = make_kick_matrix(0.7, 48, method="laguerre").elements
    assert np.max(np.abs(k - k.T)) < 1e-15


def test_apply_matrix_checks():
    k = make_kick_matrix(0.5, 64)
    psi = coherent_state(0.3 + 0.2j, 64)
    psi /= norm(psi)
    assert abs(norm(apply_matrix(k, psi)) - 1) < 1e-10
    assert np.allclose(apply_matrix(make_kick_matrix(0, 8), fock_state(3, 8)), fock_state(3, 8))
    with pytest.raises(DimensionMismatchError):
        apply_matrix(k, make_vacuum(63))


def test_kick_bad_args():
    with pytest.raises(InvalidDimensionError):
        make_kick_matrix(0.1, 0)
    with pytest.raises(InvalidDimensionError):
        make_kick_matrix(0.1, 8, -1)
    with pytest.raises(ValueError):
        make_kick_matrix(0.1, 8, 0, "pade")


def test_tail_population():
    psi = np.zeros(10, complex)
    psi[8] = 0.6
    psi[2] = 0.8
    assert tail_population(psi, 2) == pytest.approx(0.36)
    assert tail_population(psi, 0) == 0.0


@settings(max_examples=40, deadline=None)
@given(
    g=st.floats(-1.0, 1.0),
    dim=st.integers(2, 96),
    seed=st.integers(0, 2**32 - 1),
)
def test_norm_preserved(g, dim, seed):
    r = np.random.default_rng(seed)
    psi = r.normal(size=dim) + 1j * r.normal(size=dim)
    psi /= np.linalg.norm(psi)
    kerr = make_kerr_diagonal(0.5, math.pi, dim)
    out = apply_kerr(kerr, apply_matrix(make_kick_matrix(g, dim), psi))
    assert abs(np.linalg.norm(out) - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(chi=st.floats(0.01, 3.0), period=st.floats(0.01, 7.0), dim=st.integers(1, 300))
def test_kerr_unit_modulus(chi, period, dim):
    d = make_kerr_diagonal(chi, period, dim)
    assert np.max(np.abs(np.abs(d) - 1)) < 1e-14
    assert np.all(d[: min(dim, 2)] == 1)
