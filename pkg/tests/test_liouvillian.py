import itertools
from dataclasses import replace

import numpy as np
import pytest
import scipy.sparse as sp

from conftest import random_density_matrix, random_hermitian
from flux_cooling.errors import (ConvergenceError, DegenerateSteadyStateError,
                                 InvalidDimensionError)
from flux_cooling.liouvillian import (apply_master_equation, build_liouvillian, converged_nss,
                                      expectation, steady_state, steady_state_eig,
                                      time_evolve, trace_distance, unvec, vec, vectorize)
from flux_cooling.model import (PhysicalParams, build_dissipators, build_hamiltonian,
                                standard)
from flux_cooling.operators import (HilbertSpace, embed_fock, fock_annihilation, fock_number,
                                    product_state, thermal_fock_state)

DEVICE_GRID = [
    PhysicalParams(Gamma_a=0.05, Omega=4.0),
    PhysicalParams(Gamma_a=0.1, Omega=8.0, Gamma_phi=0.5),
    PhysicalParams(Gamma_a=0.05, Omega=10.0, Gamma_phi=0.5, nu=1.0),
]


def test_vec_is_column_stacking():
    m = np.arange(9).reshape(3, 3)
    np.testing.assert_array_equal(vec(m), [0, 3, 6, 1, 4, 7, 2, 5, 8])
    np.testing.assert_array_equal(unvec(vec(m)), m)


def test_lossy_two_level_spectrum():
    kappa = 0.3
    b = fock_annihilation(2)
    L = vectorize(sp.csr_matrix((2, 2)), [standard(kappa, b)])
    assert L.space is None
    ev = np.sort_complex(np.linalg.eigvals(L.matrix.toarray()))
    np.testing.assert_allclose(ev, [-kappa, -kappa / 2, -kappa / 2, 0], atol=1e-14)


def test_vectorize_matches_direct_evaluation(rng):
    p = PhysicalParams(Gamma_a=0.2, Gamma_phi=0.3, eta=0.05, Omega=2.0, Lambda=20.0,
                       N_i=2.0, Q=100.0, fock_dim=5)
    H, ds = build_hamiltonian(p), build_dissipators(p)
    L = vectorize(H, ds)
    for _ in range(10):
        rho = random_hermitian(rng, 20)
        direct = apply_master_equation(H, ds, rho)
        via_super = unvec(L @ vec(rho))
        assert np.abs(via_super - direct).max() <= 1e-12 * max(1.0, np.abs(direct).max())


def test_identity_left_vector_annihilates():
    L = build_liouvillian(PhysicalParams(Gamma_phi=0.5, fock_dim=6))
    d = 24
    left = vec(np.eye(d)).conj()
    assert np.abs(left @ L.matrix).max() <= 1e-10 * d


def test_vectorize_dimension_mismatch():
    p = PhysicalParams(fock_dim=4)
    with pytest.raises(InvalidDimensionError):
        vectorize(build_hamiltonian(p), build_dissipators(replace(p, fock_dim=5)))
    with pytest.raises(InvalidDimensionError):
        vectorize(build_hamiltonian(p), [], HilbertSpace(3))


@pytest.mark.parametrize("p", DEVICE_GRID)
def test_trace_and_hermiticity_preserved(p, rng):
    L = build_liouvillian(p)
    d = L.space.total_dim
    for _ in range(100):
        rho = random_hermitian(rng, d)
        out = unvec(L @ vec(rho))
        assert abs(np.trace(out)) <= 1e-10
        assert np.abs(out - out.conj().T).max() <= 1e-12 * max(1.0, np.abs(out).max())


def test_ground_state_without_drive_or_bath():
    p = PhysicalParams(Omega=0.0, eta=0.0, N_i=0.0, fock_dim=4)
    r = steady_state(build_liouvillian(p))
    expected = product_state("g", thermal_fock_state(0.0, 4))
    assert np.abs(r.rho_ss - expected).max() < 1e-10
    assert r.n_ss == pytest.approx(0.0, abs=1e-12)
    assert r.p_ground == pytest.approx(1.0, abs=1e-12)


def test_thermal_resonator_without_coupling():
    fock_dim = 40
    p = PhysicalParams(Omega=0.0, eta=0.0, N_i=3.0, Q=1e3, fock_dim=fock_dim)
    r = steady_state(build_liouvillian(p))
    truncated = np.real(np.trace(fock_number(fock_dim) @ thermal_fock_state(3.0, fock_dim)))
    assert r.n_ss == pytest.approx(truncated, abs=1e-8)
    assert abs(r.n_ss - 3.0) / 3.0 <= 1e-3


@pytest.mark.parametrize("p", DEVICE_GRID)
def test_steady_state_invariants(p):
    r = steady_state(build_liouvillian(p))
    assert np.trace(r.rho_ss).real == pytest.approx(1.0, abs=1e-10)
    assert np.abs(r.rho_ss - r.rho_ss.conj().T).max() <= 1e-10
    assert r.residual <= 1e-8
    assert r.min_eigenvalue >= -1e-6
    assert r.n_ss >= 0
    assert 0 <= r.p_ground <= 1 + 1e-8


@pytest.mark.parametrize("p", DEVICE_GRID[:2])
def test_eigen_path_agrees_with_direct_solve(p):
    L = build_liouvillian(p)
    direct = steady_state(L)
    eig, mags = steady_state_eig(L)
    assert mags[0] < 1e-10 < mags[1]
    assert trace_distance(direct.rho_ss, eig.rho_ss) < 1e-8
    assert eig.n_ss == pytest.approx(direct.n_ss, rel=1e-7)


def test_degenerate_steady_state_detected():
    # Hamiltonian only: every diagonal state in its eigenbasis is stationary
    p = PhysicalParams(fock_dim=3)
    L = vectorize(build_hamiltonian(p), [], p.space())
    with pytest.raises(DegenerateSteadyStateError):
        steady_state(L)


def test_degenerate_two_dark_states():
    # only the bath acts; the qubit populations are left unconstrained
    p = PhysicalParams(fock_dim=3, Omega=0.0)
    b = embed_fock(fock_annihilation(3), p.space())
    L = vectorize(sp.csr_matrix((12, 12)), [standard(0.5, b)], p.space())
    with pytest.raises(DegenerateSteadyStateError):
        steady_state(L)


def test_expectation_examples(rng):
    num = fock_number(6)
    assert expectation(thermal_fock_state(0, 6), num) == 0
    big = 200
    assert expectation(thermal_fock_state(1.5, big), fock_number(big)).real == pytest.approx(1.5)
    rho = random_density_matrix(rng, 8)
    assert expectation(rho, np.eye(8)) == pytest.approx(1.0)
    assert expectation(rho, sp.identity(8)) == pytest.approx(1.0)
    with pytest.raises(InvalidDimensionError):
        expectation(rho, np.eye(7))


def test_exponential_decay():
    kappa, fock_dim = 0.4, 3
    space = HilbertSpace(fock_dim)
    b = embed_fock(fock_annihilation(fock_dim), space)
    L = vectorize(sp.csr_matrix(b.shape), [standard(kappa, b)], space)
    rho0 = product_state("g", np.diag([0, 1, 0]).astype(complex))
    traj = time_evolve(L, rho0, 10.0, n_points=41)
    np.testing.assert_allclose(traj.n_of_t, np.exp(-kappa * traj.times), atol=1e-7)
    assert traj.trace_error.max() < 1e-8


def test_zero_duration():
    p = PhysicalParams(fock_dim=4)
    rho0 = product_state("g", thermal_fock_state(1.0, 4))
    traj = time_evolve(build_liouvillian(p), rho0, 0.0)
    assert list(traj.times) == [0.0]
    assert len(traj.n_of_t) == 1


def test_time_evolve_rejects_bad_state():
    p = PhysicalParams(fock_dim=3)
    with pytest.raises(ValueError):
        time_evolve(build_liouvillian(p), 2 * np.eye(12) / 12, 1.0)


def test_evolution_reaches_null_space_solution(fast_params):
    L = build_liouvillian(fast_params)
    ss = steady_state(L)
    _, gaps = steady_state_eig(L)
    t_final = 25.0 / gaps[1]
    dim = fast_params.fock_dim
    initial = [
        product_state("g", thermal_fock_state(5.0, dim)),
        product_state("e", thermal_fock_state(0.0, dim)),
        np.eye(4 * dim, dtype=complex) / (4 * dim),
    ]
    finals = []
    for rho0 in initial:
        traj = time_evolve(L, rho0, t_final, n_points=5, rtol=1e-10, atol=1e-12)
        finals.append(traj.rho_final)
        assert traj.trace_error.max() < 1e-8
        assert abs(traj.n_of_t[-1] - ss.n_ss) < 1e-4
    for a, b in itertools.combinations(finals, 2):
        assert trace_distance(a, b) <= 1e-6
    for rho in finals:
        assert trace_distance(rho, ss.rho_ss) <= 1e-6


def test_converged_cooled_regime():
    r = converged_nss(PhysicalParams(Gamma_a=0.05, fock_dim=5))
    assert r.converged
    assert r.fock_dim_used <= 25
    ns = [n for _, n in r.n_sequence]
    diffs = np.abs(np.diff(ns))
    assert np.all(diffs[1:] <= diffs[:-1] + 1e-12)


def test_converged_thermal_tail_needs_room():
    with pytest.raises(ConvergenceError) as info:
        converged_nss(PhysicalParams(eta=0.0, N_i=400.0, fock_dim=10), fock_dim_max=30)
    assert len(info.value.n_sequence) == 5
    assert [d for d, _ in info.value.n_sequence] == [10, 15, 20, 25, 30]


def test_decoupled_resonator_thermalizes():
    for omega in (0.0, 4.0):
        p = PhysicalParams(eta=0.0, N_i=1.0, Omega=omega, Gamma_phi=0.5, fock_dim=25)
        r = converged_nss(p)
        assert abs(r.n_ss - 1.0) <= 1e-3
