import numpy as np
import pytest

from flux_cooling import PhysicalParams

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fast_params():
    """Small, quickly relaxing model used wherever time evolution is the oracle."""
    return PhysicalParams(nu=1.0, Q=20.0, Gamma_a=0.5, Gamma_phi=0.2, eta=0.1, Omega=1.0,
                          Lambda=5.0, N_i=0.5, fock_dim=6)


def random_density_matrix(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
