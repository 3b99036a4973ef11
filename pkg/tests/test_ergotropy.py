import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbattery.ergotropy import (breakdown, ergotropy, ergotropy_rate_terms,
                                ergotropy_via_passive, internal_energy,
                                passive_state)
from qbattery.model import (DisorderRealization, InitialStateKind,
                            build_free_hamiltonian,
                            build_interaction_hamiltonian, initial_state)

SZ_HALF = np.diag([0.5, -0.5]).astype(complex)


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (m + m.conj().T)


def test_internal_energy_examples():
    e = np.diag([1.0, 0.0]).astype(complex)
    assert internal_energy(e, SZ_HALF) == pytest.approx(0.5)
    mixed = np.eye(4, dtype=complex) / 4.0
    h = np.diag([1.0, 0.0, 0.0, -1.0]).astype(complex)
    assert internal_energy(mixed, h) == pytest.approx(0.0)
    cl = initial_state(InitialStateKind.classical(0.75), 2)
    assert internal_energy(cl, h) == pytest.approx(0.5)


def test_internal_energy_errors():
    with pytest.raises(ValueError):
        internal_energy(np.eye(2, dtype=complex), np.eye(4, dtype=complex))
    # non-Hermitian pair with a genuinely complex trace
    rho = np.array([[0.5, 0.5], [0.0, 0.5]], dtype=complex)
    h = np.array([[0.0, 1j], [1j, 0.0]], dtype=complex)
    with pytest.raises(ValueError):
        internal_energy(rho, h)


def test_passive_state_pure_plus():
    plus = np.full((2, 2), 0.5, dtype=complex)
    ground = np.diag([0.0, 1.0]).astype(complex)
    assert np.allclose(passive_state(plus, SZ_HALF), ground, atol=1e-12)


def test_passive_state_fixed_point():
    rho = np.diag([0.25, 0.75]).astype(complex)  # passive already
    assert np.allclose(passive_state(rho, SZ_HALF), rho, atol=1e-12)


def test_passive_state_has_zero_ergotropy():
    rng = np.random.default_rng(5)
    rho = random_density(rng, 8)
    h = random_hermitian(rng, 8)
    bar = passive_state(rho, h)
    assert ergotropy(bar, h) == pytest.approx(0.0, abs=1e-10)
    # spectrum preserved
    assert np.allclose(np.linalg.eigvalsh(bar), np.linalg.eigvalsh(rho),
                       atol=1e-10)


def test_ergotropy_single_qubit_examples():
    e = np.diag([1.0, 0.0]).astype(complex)
    assert ergotropy(e, SZ_HALF) == pytest.approx(1.0)
    plus = np.full((2, 2), 0.5, dtype=complex)
    assert ergotropy(plus, SZ_HALF) == pytest.approx(0.5)
    cl = np.diag([0.75, 0.25]).astype(complex)
    assert ergotropy(cl, SZ_HALF) == pytest.approx(0.5)
    mixed = np.eye(2, dtype=complex) / 2.0
    assert ergotropy(mixed, SZ_HALF) == pytest.approx(0.0, abs=1e-12)


@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([2, 4, 8, 16]))
@settings(max_examples=40, deadline=None)
def test_dual_path_agreement(seed, dim):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, dim)
    h = random_hermitian(rng, dim)
    assert abs(ergotropy(rho, h) - ergotropy_via_passive(rho, h)) < 1e-10


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=25, deadline=None)
def test_unitary_invariance_in_energy_eigenbasis(seed):
    rng = np.random.default_rng(seed)
    dim = 8
    rho = random_density(rng, dim)
    h = random_hermitian(rng, dim)
    w, v = np.linalg.eigh(h)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=dim))
    u = (v * phases) @ v.conj().T
    rotated = u @ rho @ u.conj().T
    assert ergotropy(rotated, h) == pytest.approx(ergotropy(rho, h), abs=1e-10)


def test_fully_excited_maximizes_free_ergotropy():
    rng = np.random.default_rng(17)
    for n in (1, 2, 3):
        om = rng.uniform(0.2, 3.0, size=n)
        h0 = build_free_hamiltonian(DisorderRealization(om, 0))
        fe = initial_state(InitialStateKind.fully_excited(), n)
        top = ergotropy(fe, h0)
        assert top == pytest.approx(np.sum(om), abs=1e-10)
        for _ in range(25):
            rho = random_density(rng, 2 ** n)
            assert ergotropy(rho, h0) <= top + 1e-10


def test_breakdown_additivity_and_bounds():
    rng = np.random.default_rng(23)
    rho = random_density(rng, 8)
    h = random_hermitian(rng, 8)
    b = breakdown(rho, h)
    assert b.ergotropy == b.internal_energy - b.passive_energy
    assert b.ergotropy >= -1e-10
    assert b.passive_energy <= b.internal_energy + 1e-10
    assert b.ergotropy == pytest.approx(ergotropy(rho, h), abs=1e-10)


def test_rate_terms_vanish_for_uniform_chain():
    n = 2
    h0 = build_free_hamiltonian(DisorderRealization(np.full(n, 1.0), 0))
    h_int = build_interaction_hamiltonian(n, 10.0)
    rng = np.random.default_rng(2)
    rho = random_density(rng, 4)
    coh, _, _ = ergotropy_rate_terms(rho, h0, h_int, 1.0, n)
    assert abs(coh) < 1e-12


def test_rate_terms_vanish_at_ground_state():
    n = 2
    h0 = build_free_hamiltonian(DisorderRealization(np.array([1.0, 2.0]), 0))
    h_int = build_interaction_hamiltonian(n, 10.0)
    rho = np.zeros((4, 4), dtype=complex)
    rho[-1, -1] = 1.0
    coh, dis, u0r = ergotropy_rate_terms(rho, h0, h_int, 1.0, n)
    assert abs(coh) < 1e-12
    assert abs(dis) < 1e-12
    assert abs(u0r) < 1e-9


def test_rate_terms_dimension_mismatch():
    with pytest.raises(ValueError):
        ergotropy_rate_terms(np.eye(2, dtype=complex),
                             np.eye(4, dtype=complex),
                             np.eye(4, dtype=complex), 1.0, 2)


def test_ergotropy_rate_sign_bookkeeping():
    # the sign of dE along the flow must match the sign of (dU - dU0)
    from qbattery import TimeGrid, evolve
    n = 2
    om = np.array([5.0, -2.0])
    h0 = build_free_hamiltonian(DisorderRealization(om, 0))
    h_int = build_interaction_hamiltonian(n, 10.0)
    rho0 = initial_state(InitialStateKind.coherent(), n)
    grid = TimeGrid(0.5, 251)
    traj = evolve(rho0, h0 + h_int, h0, h_int, 1.0, grid,
                  record_passive_rate=True)
    de = np.gradient(traj.ergotropy, traj.times)
    rate = (traj.coherent_rate_term + traj.dissipative_rate_term
            - traj.u0_rate)
    big = np.abs(de) > 1e-2 * np.max(np.abs(de))
    assert np.all(np.sign(de[big]) == np.sign(rate[big]))
