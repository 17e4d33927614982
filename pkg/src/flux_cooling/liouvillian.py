"""
Superoperator construction, steady states, time evolution and observables.

Vectorization is column stacking: ``vec(rho) = rho.ravel(order="F")`` and
``vec(A rho B) = (B^T kron A) vec(rho)``. :func:`vec` and :func:`unvec` are
the only two places that know this.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .errors import (ConvergenceError, DegenerateSteadyStateError, IntegrationError,
                     InvalidDimensionError, SolverError)
from .model import build_dissipators, build_hamiltonian
from .operators import HilbertSpace, adjoint, embed_fock, fock_number

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
UNIQUENESS_TOL = 1e-6
# smallest/largest LU pivot; well-posed models in this package sit above 1e-7
PIVOT_RATIO_MIN = 1e-13
FOCK_STEP = 5
FOCK_DIM_MAX = 60


@dataclass(frozen=True)
class Superoperator:
    matrix: sp.csr_matrix
    space: HilbertSpace

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __matmul__(self, v):
        return self.matrix @ v


@dataclass
class SteadyStateResult:
    rho_ss: np.ndarray
    n_ss: float
    p_ground: float
    residual: float
    min_eigenvalue: float
    fock_dim_used: int
    converged: bool = True
    n_sequence: list = field(default_factory=list)


@dataclass
class EvolutionTrajectory:
    times: np.ndarray
    n_of_t: np.ndarray
    trace_error: np.ndarray
    rho_final: np.ndarray


def vec(rho):
    return np.asarray(rho).ravel(order="F")


def unvec(v, dim=None):
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return v.reshape((dim, dim), order="F")


def _left(a, ident):
    return sp.kron(ident, a, format="csr")


def _right(a, ident):
    # rho -> rho a
    return sp.kron(a.T, ident, format="csr")


def _dissipator_super(d, ident):
    if d.form == "standard":
        pairs = [(d.ops[0], d.ops[0])]
    else:
        a1, a2 = d.ops
        pairs = [(a1, a2), (a2, a1)]
    n2 = ident.shape[0] ** 2
    out = sp.csr_matrix((n2, n2), dtype=complex)
    for ai, aj in pairs:
        aj_dag = adjoint(sp.csr_matrix(aj))
        ai = sp.csr_matrix(ai)
        jump = sp.kron(aj_dag.T, ai, format="csr")   # A_i rho A_j^+
        anti = aj_dag @ ai
        out = out + 2 * jump - _left(anti, ident) - _right(anti, ident)
    return 0.5 * d.rate * out


def vectorize(H, dissipators, space=None):
    """Liouvillian L with vec(drho/dt) = L vec(rho)."""
    H = sp.csr_matrix(H, dtype=complex)
    dim = H.shape[0]
    if H.shape != (dim, dim):
        raise InvalidDimensionError(f"Hamiltonian must be square, got {H.shape}")
    for d in dissipators:
        if d.dim != dim:
            raise InvalidDimensionError(
                f"dissipator {d.label or d.form} has dim {d.dim}, Hamiltonian has {dim}")
    if space is None:
        # bare operators (e.g. a lone Fock space) get no composite structure
        space = HilbertSpace(dim // 4) if dim % 4 == 0 else None
    elif space.total_dim != dim:
        raise InvalidDimensionError(f"space has dim {space.total_dim}, operators have {dim}")

    ident = sp.identity(dim, dtype=complex, format="csr")
    L = -1j * (_left(H, ident) - _right(H, ident))
    for d in dissipators:
        if d.rate:
            L = L + _dissipator_super(d, ident)
    return Superoperator(L.tocsr(), space)


def build_liouvillian(p):
    space = p.space()
    return vectorize(build_hamiltonian(p, space), build_dissipators(p, space), space)


def apply_master_equation(H, dissipators, rho):
    """Right-hand side of the master equation evaluated with plain matrix products.

    Independent of :func:`vectorize`; used to cross-check it.
    """
    H = sp.csr_matrix(H)
    rho = np.asarray(rho, dtype=complex)
    out = -1j * (H @ rho - (H.T @ rho.T).T)
    for d in dissipators:
        if d.form == "standard":
            pairs = [(d.ops[0], d.ops[0])]
        else:
            pairs = [(d.ops[0], d.ops[1]), (d.ops[1], d.ops[0])]
        for ai, aj in pairs:
            ai = sp.csr_matrix(ai).toarray()
            aj_dag = np.conj(sp.csr_matrix(aj).toarray()).T
            k = aj_dag @ ai
            out += 0.5 * d.rate * (2 * ai @ rho @ aj_dag - k @ rho - rho @ k)
    return out


def expectation(rho, op):
    """trace(op @ rho) as a complex number."""
    rho = np.asarray(rho)
    if op.shape != rho.shape:
        raise InvalidDimensionError(f"operator shape {op.shape} vs density matrix {rho.shape}")
    if sp.issparse(op):
        op = op.tocsr()
        # trace(O rho) = sum_ij O_ij rho_ji
        return complex(np.sum(op.multiply(rho.T)))
    return complex(np.einsum("ij,ji->", np.asarray(op), rho))


def real_expectation(rho, op, tol=1e-10):
    value = expectation(rho, op)
    if abs(value.imag) > tol * max(1.0, abs(value.real)):
        raise SolverError(f"expectation of Hermitian operator has imaginary part {value.imag:.3e}")
    return value.real


def resonator_populations(rho, space):
    """Fock-level populations with the qubit traced out."""
    r = np.asarray(rho).reshape(space.qubit_dim, space.fock_dim, space.qubit_dim, space.fock_dim)
    return np.einsum("qnqn->n", r).real


def observables(L, rho, space):
    """Fill a SteadyStateResult for an already-normalized Hermitian rho."""
    v = vec(rho)
    residual = np.linalg.norm(L.matrix @ v) / np.linalg.norm(v)
    number = embed_fock(fock_number(space.fock_dim), space)
    return SteadyStateResult(
        rho_ss=rho,
        n_ss=real_expectation(rho, number),
        p_ground=float(resonator_populations(rho, space)[0]),
        residual=float(residual),
        min_eigenvalue=float(np.linalg.eigvalsh(rho)[0]),
        fock_dim_used=space.fock_dim,
    )


def _solve_with_trace_row(A, row):
    d2 = A.shape[0]
    d = int(round(np.sqrt(d2)))
    A = A.tolil(copy=True)
    trace_row = np.zeros(d2, dtype=complex)
    trace_row[:: d + 1] = 1.0
    A[row, :] = trace_row
    rhs = np.zeros(d2, dtype=complex)
    rhs[row] = 1.0
    try:
        lu = spla.splu(A.tocsc())
    except RuntimeError as exc:
        raise DegenerateSteadyStateError(
            "trace-constrained Liouvillian is singular; steady state is not unique",
            {"replaced_row": row, "splu": str(exc)}) from None
    pivots = np.abs(lu.U.diagonal())
    ratio = pivots.min() / pivots.max()
    if ratio < PIVOT_RATIO_MIN:
        raise DegenerateSteadyStateError(
            "trace-constrained Liouvillian is numerically singular; steady state is not unique",
            {"replaced_row": row, "pivot_ratio": ratio})
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise SolverError("sparse solve returned non-finite values", {"replaced_row": row})
    return x


def _normalize(x, d):
    rho = unvec(x, d)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def trace_distance(a, b):
    return 0.5 * np.abs(np.linalg.eigvalsh(np.asarray(a) - np.asarray(b))).sum()


def _require_space(L):
    if L.space is None:
        raise InvalidDimensionError("superoperator is not on the qubit (x) Fock composite space")


def steady_state(L, residual_tol=RESIDUAL_TOL, check_unique=True):
    """Null vector of L normalized to unit trace.

    One scalar equation (the rho_00 row) is replaced by trace(rho) = 1 and
    the resulting sparse system is LU-solved. With ``check_unique`` the
    solve is repeated replacing the last diagonal row instead; two different
    answers mean the null space is not one-dimensional.
    """
    _require_space(L)
    d = L.space.total_dim
    A = L.matrix
    x = _solve_with_trace_row(A, 0)
    rho = _normalize(x, d)
    result = observables(L, rho, L.space)
    if result.residual > residual_tol:
        raise DegenerateSteadyStateError(
            f"steady-state residual {result.residual:.3e} exceeds {residual_tol:.1e}",
            {"residual": result.residual})
    if check_unique:
        alt = _normalize(_solve_with_trace_row(A, d * d - 1), d)
        dist = trace_distance(rho, alt)
        if dist > UNIQUENESS_TOL:
            raise DegenerateSteadyStateError(
                "independent trace-row choices give different steady states",
                {"trace_distance": dist})
    return result


def steady_state_eig(L, n_eigs=2, shift=1e-9):
    """Validation path: eigenvector of L with eigenvalue closest to zero.

    Returns the result and the magnitudes of the ``n_eigs`` eigenvalues
    found nearest zero (the second one is the spectral gap).
    """
    _require_space(L)
    d = L.space.total_dim
    vals, vecs = spla.eigs(L.matrix.tocsc(), k=n_eigs, sigma=shift, which="LM")
    order = np.argsort(np.abs(vals))
    vals, vecs = vals[order], vecs[:, order]
    rho = unvec(vecs[:, 0], d)
    return observables(L, _normalize(vec(rho / np.trace(rho)), d), L.space), np.abs(vals)


def time_evolve(L, rho0, t_final, n_points=101, rtol=1e-8, atol=1e-10, method="DOP853",
                times=None):
    """Integrate d vec(rho)/dt = L vec(rho) with an adaptive explicit scheme."""
    _require_space(L)
    rho0 = np.asarray(rho0, dtype=complex)
    d = L.space.total_dim
    if rho0.shape != (d, d):
        raise InvalidDimensionError(f"rho0 has shape {rho0.shape}, expected {(d, d)}")
    if abs(np.trace(rho0) - 1) > 1e-8 or not np.allclose(rho0, rho0.conj().T, atol=1e-10):
        raise ValueError("rho0 must be Hermitian with unit trace")
    if np.linalg.eigvalsh(rho0)[0] < -1e-8:
        raise ValueError("rho0 must be positive semidefinite")
    if t_final < 0:
        raise ValueError("t_final must be >= 0")

    number = embed_fock(fock_number(L.space.fock_dim), L.space)

    def record(states):
        n = np.array([real_expectation(unvec(s, d), number, tol=1e-6) for s in states])
        tr = np.array([abs(np.trace(unvec(s, d)) - 1) for s in states])
        return n, tr

    if t_final == 0:
        n, tr = record([vec(rho0)])
        return EvolutionTrajectory(np.array([0.0]), n, tr, rho0)

    if times is None:
        times = np.linspace(0.0, t_final, n_points)
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")

    M = L.matrix
    sol = solve_ivp(lambda t, y: M @ y, (times[0], times[-1]), vec(rho0), method=method,
                    t_eval=times, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise IntegrationError(f"integrator failed: {sol.message}", {"t_reached": sol.t[-1]})
    states = sol.y.T
    n, tr = record(states)
    return EvolutionTrajectory(sol.t, n, tr, unvec(states[-1], d))


def converged_nss(p, fock_dim_max=FOCK_DIM_MAX, step=FOCK_STEP, residual_tol=RESIDUAL_TOL,
                  rel_tol=1e-2, abs_tol=1e-4):
    """Steady state with the Fock truncation grown until n_ss settles."""
    sequence = []
    prev = None
    fock_dim = p.fock_dim
    while fock_dim <= fock_dim_max:
        q = replace(p, fock_dim=fock_dim)
        result = steady_state(build_liouvillian(q), residual_tol=residual_tol)
        sequence.append((fock_dim, result.n_ss))
        log.debug("fock_dim=%d n_ss=%.6g", fock_dim, result.n_ss)
        if prev is not None and abs(result.n_ss - prev.n_ss) < max(rel_tol * result.n_ss, abs_tol):
            result.converged = True
            result.n_sequence = sequence
            return result
        prev = result
        fock_dim += step
    raise ConvergenceError(
        f"n_ss did not converge by fock_dim_max={fock_dim_max}: "
        + ", ".join(f"{n}:{v:.4g}" for n, v in sequence), sequence)
