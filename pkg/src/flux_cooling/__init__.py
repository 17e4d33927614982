"""Ground-state cooling of a nanomechanical resonator by two interacting flux qubits."""

__version__ = "0.1.0"

from .analysis import (FitResult, SweepResult, SweepSpec, eval_cooling_formula, fit_cg,
                       nu_opt, run_sweep, split_contributions)
from .liouvillian import (SteadyStateResult, build_liouvillian, converged_nss, expectation,
                          steady_state, steady_state_eig, time_evolve, vectorize)
from .model import (DeviceParams, Dissipator, PhysicalParams, build_dissipators,
                    build_hamiltonian, derive_lamb_dicke, red_sideband_detuning)
from .operators import (HilbertSpace, collective_projector, embed_fock, fock_annihilation,
                        thermal_fock_state)

__all__ = [
    "DeviceParams", "Dissipator", "FitResult", "HilbertSpace", "PhysicalParams",
    "SteadyStateResult", "SweepResult", "SweepSpec", "build_dissipators", "build_hamiltonian",
    "build_liouvillian", "collective_projector", "converged_nss", "derive_lamb_dicke",
    "embed_fock", "eval_cooling_formula", "expectation", "fit_cg", "fock_annihilation",
    "nu_opt", "red_sideband_detuning", "run_sweep", "split_contributions", "steady_state",
    "steady_state_eig", "thermal_fock_state", "time_evolve", "vectorize",
]
