import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from kerrchaos import (
    EvolutionEngine,
    SystemParams,
    TrajectoryRecord,
    TruncationError,
    first_return,
    mean_photon_number,
    recurrence_peak,
    run_trajectory,
)
from kerrchaos.errors import InvalidParameterError
from kerrchaos.evolution import overlap_fidelity, photon_weighted_overlap
from kerrchaos.fock import coherent_state, fock_state, make_vacuum


def brute_force(eps, de, kicks, dim=200, kerr_factor=0.5):
    """Dense expm propagation in a larger space, written independently of the package."""
    n = np.arange(dim)
    gen = np.diag(np.sqrt(n[1:]), 1) + np.diag(np.sqrt(n[1:]), -1)
    kerr = np.exp(-1j * kerr_factor * math.pi * n * (n - 1))
    su = kerr[:, None] * expm(-1j * eps * gen)
    sp = kerr[:, None] * expm(-1j * (eps + de) * gen)
    u = np.zeros(dim, complex)
    u[0] = 1
    p = u.copy()
    F, FN, N = [1.0], [0.0], [0.0]
    for _ in range(kicks):
        u = su @ u
        p = sp @ p
        F.append(abs(np.vdot(p, u)))
        FN.append(abs(np.vdot(p, n * u)))
        N.append(float(np.dot(n, abs(u) ** 2)))
    return np.array(F), np.array(FN), np.array(N)


def test_mean_photon_number():
    assert mean_photon_number(make_vacuum(8)) == 0
    assert mean_photon_number(fock_state(1, 8)) == 1
    assert abs(mean_photon_number(coherent_state(0.3, 64)) - 0.09) < 1e-10


def test_overlap_helpers():
    u = fock_state(2, 6)
    assert overlap_fidelity(u, u) == 1
    assert photon_weighted_overlap(u, u) == 2
    assert overlap_fidelity(u, fock_state(3, 6)) == 0


def test_initial_state():
    eng = EvolutionEngine(SystemParams(dim=16, buffer=4))
    assert eng.k == 0
    assert eng.fidelity() == 1
    assert eng.fidelity_n() == 0


def test_zero_kick_keeps_vacuum():
    eng = EvolutionEngine(SystemParams(epsilon=0.0, delta_epsilon=0.0, dim=16, buffer=4))
    for _ in range(10):
        eng.step()
    assert np.array_equal(eng.psi_u, make_vacuum(16))


def test_one_step_photon_number():
    eng = EvolutionEngine(SystemParams(epsilon=0.1, dim=64))
    eng.step()
    assert abs(eng.mean_photons() - 0.01) < 1e-10


def test_one_step_closed_forms():
    # after one kick both states are coherent with alpha = -i eps, -i (eps + de);
    # the common Kerr phase cancels in the overlaps
    rec = run_trajectory(SystemParams(epsilon=0.1, delta_epsilon=0.05, kicks=1))
    assert abs(rec.fidelity[1] - 0.998750780924580866501065473856) < 1e-13
    assert abs(rec.f_n[1] - 0.0149812617138687129975159821078) < 1e-13


def test_zero_perturbation_identity():
    rec = run_trajectory(SystemParams(epsilon=0.3, delta_epsilon=0.0, kicks=500))
    assert np.max(np.abs(rec.fidelity - 1)) < 1e-12
    assert np.max(np.abs(rec.f_n - rec.mean_photons_u)) < 1e-12


def test_kicks_zero():
    rec = run_trajectory(SystemParams(kicks=0))
    assert len(rec) == 1
    assert rec.fidelity[0] == 1 and rec.f_n[0] == 0


@pytest.mark.parametrize("eps", [0.1, 0.5, 0.8])
def test_matches_dense_oracle(eps, backend):
    # same truncation as the engine, so the two must agree to round-off for any kick count
    kicks = 60
    F, FN, N = brute_force(eps, 0.01, kicks, dim=128)
    p = SystemParams(epsilon=eps, delta_epsilon=0.01, kicks=kicks, dim=128)
    rec = run_trajectory(p, backend=backend, leak_policy="flag")
    assert np.max(np.abs(rec.fidelity - F)) < 1e-10
    assert np.max(np.abs(rec.f_n - FN)) < 1e-9
    assert np.max(np.abs(rec.mean_photons_u - N)) < 1e-9


def test_converged_in_dimension():
    # a weak kick stays far from the cut-off: a much larger space changes nothing
    F, FN, N = brute_force(0.1, 0.01, 200, dim=300)
    rec = run_trajectory(SystemParams(epsilon=0.1, delta_epsilon=0.01, kicks=200))
    assert np.max(np.abs(rec.fidelity - F)) < 1e-12
    assert np.max(np.abs(rec.mean_photons_u - N)) < 1e-12


def test_literal_kerr_factor_is_pure_displacement():
    # with the bare chi T n(n-1) exponent at chi=1, T=pi the free evolution is the identity
    p = SystemParams(epsilon=0.1, delta_epsilon=0.0, kerr_factor=1.0, kicks=20, dim=64)
    rec = run_trajectory(p)
    k = np.arange(21)
    assert np.max(np.abs(rec.mean_photons_u - (0.1 * k) ** 2)) < 1e-9


def test_backends_agree():
    p = SystemParams(epsilon=0.5, delta_epsilon=0.001, kicks=2000)
    a = run_trajectory(p, backend="python")
    b = run_trajectory(p, backend="cython") if "cython" in pytest.importorskip("kerrchaos._ext").BACKEND else a
    assert np.max(np.abs(a.fidelity - b.fidelity)) < 1e-9
    assert a.first_unsafe_kick == b.first_unsafe_kick


def test_determinism(backend):
    p = SystemParams(epsilon=0.6, delta_epsilon=0.002, kicks=3000)
    a = run_trajectory(p, backend=backend)
    b = run_trajectory(p, backend=backend)
    assert np.array_equal(a.fidelity, b.fidelity)
    assert np.array_equal(a.f_n, b.f_n)
    assert np.array_equal(a.mean_photons_u, b.mean_photons_u)


def test_chunk_boundaries_are_seamless():
    # longer than one internal chunk: must equal a single engine stepped by hand
    p = SystemParams(epsilon=0.2, delta_epsilon=0.01, kicks=8200, dim=32, buffer=8)
    rec = run_trajectory(p, leak_policy="flag")
    eng = EvolutionEngine(p)
    for _ in range(8200):
        eng.step()
    assert len(rec) == 8201
    assert abs(rec.fidelity[-1] - eng.fidelity()) < 1e-9


def test_stride(backend):
    p = SystemParams(epsilon=0.4, delta_epsilon=0.01, kicks=100)
    full = run_trajectory(p, backend=backend)
    sub = run_trajectory(p, stride=10, backend=backend)
    assert np.array_equal(sub.k, np.arange(0, 101, 10))
    assert np.max(np.abs(sub.fidelity - full.fidelity[::10])) < 1e-13
    with pytest.raises(InvalidParameterError):
        run_trajectory(p, stride=0)


def test_reversibility():
    eng = EvolutionEngine(SystemParams(epsilon=0.8, delta_epsilon=0.001))
    for _ in range(300):
        eng.step()
    for _ in range(300):
        eng.step_back()
    assert eng.k == 0
    assert abs(eng.psi_u[0]) > 1 - 1e-7


def test_leak_policies():
    p = SystemParams(epsilon=0.8, delta_epsilon=0.001, dim=16, buffer=4, kicks=200)
    flagged = run_trajectory(p, leak_policy="flag")
    assert flagged.truncation_unsafe and flagged.completed
    assert len(flagged) == 201
    stopped = run_trajectory(p, leak_policy="stop")
    assert not stopped.completed
    assert stopped.k[-1] <= stopped.first_unsafe_kick
    assert stopped.first_unsafe_kick == flagged.first_unsafe_kick
    with pytest.raises(TruncationError):
        run_trajectory(p, leak_policy="raise")


def test_weak_kick_is_safe():
    rec = run_trajectory(SystemParams(epsilon=0.1, delta_epsilon=0.001, kicks=2000))
    assert not rec.truncation_unsafe
    assert rec.leak_max < 1e-20


def test_recurrence_helpers():
    f = np.array([1, 0.9, 0.4, 0.2, 0.6, 0.995, 0.999, 0.992, 0.5])
    assert first_return(f) == 5
    assert recurrence_peak(f) == 6
    assert first_return(f, stride=10) == 50
    assert first_return(np.ones(5)) is None


def test_recurrence_fast_perturbation():
    rec = run_trajectory(SystemParams(epsilon=0.1, delta_epsilon=0.08, kicks=100))
    assert 36 <= first_return(rec.fidelity) <= 44


def test_csv_round_trip(tmp_path):
    p = SystemParams(epsilon=0.35, delta_epsilon=0.004, kicks=50, dim=48, buffer=16)
    rec = run_trajectory(p)
    path = tmp_path / "t.csv"
    rec.to_csv(path)
    text = path.read_text().splitlines()
    assert text[0].startswith("# ")
    assert "k,F,F_N,mean_n" in text
    back = TrajectoryRecord.from_csv(path)
    assert back.params == p
    assert np.array_equal(back.fidelity, rec.fidelity)
    assert np.array_equal(back.f_n, rec.f_n)
    assert np.array_equal(back.k, rec.k)


@settings(max_examples=15, deadline=None)
@given(eps=st.floats(0.0, 0.9), de=st.floats(0.0, 0.1), kicks=st.integers(0, 60))
def test_fidelity_bounds(eps, de, kicks):
    rec = run_trajectory(SystemParams(epsilon=eps, delta_epsilon=de, kicks=kicks, dim=48, buffer=16))
    assert rec.fidelity[0] == 1.0
    assert np.all(rec.fidelity >= 0) and np.all(rec.fidelity <= 1 + 1e-9)
    assert np.all(rec.f_n >= 0)
    assert len(rec) == kicks + 1
