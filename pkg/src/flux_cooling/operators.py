"""
Operators on the composite space of the two-qubit collective basis and a
truncated resonator Fock space.

Basis ordering is qubit-major, Fock-minor::

    index = q * fock_dim + n,   q in {g=0, a=1, s=2, e=3},  n in {0 .. fock_dim-1}

which is what ``scipy.sparse.kron(qubit_op, fock_op)`` produces. Every other
module goes through the helpers here, so this is the only place the
ordering is spelled out.

All composite operators are returned as CSR matrices. They are treated as
immutable values.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InvalidDimensionError

QUBIT_LABELS = ("g", "a", "s", "e")
QUBIT_INDEX = {label: i for i, label in enumerate(QUBIT_LABELS)}
QUBIT_DIM = 4


@dataclass(frozen=True)
class HilbertSpace:
    """Collective qubit space (fixed, 4 states) tensored with ``fock_dim`` Fock states."""

    fock_dim: int
    qubit_dim: int = QUBIT_DIM

    def __post_init__(self):
        if self.qubit_dim != QUBIT_DIM:
            raise InvalidDimensionError(f"qubit_dim is fixed to {QUBIT_DIM}, got {self.qubit_dim}")
        if int(self.fock_dim) != self.fock_dim or self.fock_dim < 1:
            raise InvalidDimensionError(f"fock_dim must be a positive integer, got {self.fock_dim}")

    @property
    def total_dim(self):
        return self.qubit_dim * self.fock_dim

    def index(self, qubit, n):
        """Composite basis index of ``|qubit, n>``."""
        q = QUBIT_INDEX[qubit] if isinstance(qubit, str) else int(qubit)
        if not 0 <= n < self.fock_dim:
            raise InvalidDimensionError(f"Fock level {n} outside 0..{self.fock_dim - 1}")
        return q * self.fock_dim + n


def adjoint(op):
    """Hermitian conjugate, keeping sparse inputs sparse."""
    if sp.issparse(op):
        return op.conj().T.tocsr()
    return np.conj(np.asarray(op)).T


def fock_annihilation(fock_dim):
    """Truncated annihilation operator b with <n-1|b|n> = sqrt(n)."""
    if int(fock_dim) != fock_dim or fock_dim < 2:
        raise InvalidDimensionError(f"fock_dim must be an integer >= 2, got {fock_dim}")
    return sp.diags(np.sqrt(np.arange(1, fock_dim, dtype=float)), 1,
                    shape=(fock_dim, fock_dim), format="csr", dtype=complex)


def fock_number(fock_dim):
    """b^dagger b on the Fock space alone."""
    return sp.diags(np.arange(fock_dim, dtype=float), 0, format="csr", dtype=complex)


def qubit_projector(j, k):
    """The bare 4x4 matrix |j><k| in the collective basis."""
    try:
        row, col = QUBIT_INDEX[j], QUBIT_INDEX[k]
    except KeyError as exc:
        raise ValueError(f"qubit label must be one of {QUBIT_LABELS}, got {exc.args[0]!r}") from None
    return sp.csr_matrix(([1.0 + 0j], ([row], [col])), shape=(QUBIT_DIM, QUBIT_DIM))


def collective_projector(j, k, space):
    """R_jk = |j><k| tensored with the Fock identity."""
    return sp.kron(qubit_projector(j, k), sp.identity(space.fock_dim, dtype=complex), format="csr")


def embed_fock(op, space):
    """Lift a Fock-space operator to I_4 (x) op."""
    if op.shape != (space.fock_dim, space.fock_dim):
        raise InvalidDimensionError(
            f"operator has shape {op.shape}, expected ({space.fock_dim}, {space.fock_dim})")
    return sp.kron(sp.identity(QUBIT_DIM, dtype=complex), sp.csr_matrix(op, dtype=complex),
                   format="csr")


def embed_qubit(op, space):
    """Lift a 4x4 collective-basis operator to op (x) I_fock."""
    if op.shape != (QUBIT_DIM, QUBIT_DIM):
        raise InvalidDimensionError(f"qubit operator must be 4x4, got {op.shape}")
    return sp.kron(sp.csr_matrix(op, dtype=complex), sp.identity(space.fock_dim, dtype=complex),
                   format="csr")


def thermal_fock_state(n_bar, fock_dim):
    """Thermal resonator state with mean ``n_bar``, renormalized on the truncated space."""
    if n_bar < 0:
        raise ValueError(f"n_bar must be >= 0, got {n_bar}")
    if int(fock_dim) != fock_dim or fock_dim < 1:
        raise InvalidDimensionError(f"fock_dim must be a positive integer, got {fock_dim}")
    n = np.arange(fock_dim)
    if n_bar == 0:
        p = (n == 0).astype(float)
    else:
        # log form avoids 0**0 and underflow for long tails
        p = np.exp(n * (np.log(n_bar) - np.log1p(n_bar)))
    p /= p.sum()
    return np.diag(p).astype(complex)


def product_state(qubit, rho_fock):
    """Density matrix |qubit><qubit| (x) rho_fock as a dense array."""
    rho_fock = np.asarray(rho_fock)
    return np.kron(qubit_projector(qubit, qubit).toarray(), rho_fock)
