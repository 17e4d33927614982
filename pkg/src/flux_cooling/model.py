"""
Hamiltonian and dissipators of the driven two-qubit / resonator system.

Units: hbar = 1 and the single-qubit decay rate gamma = 1, so every rate
and frequency below is a plain float measured in gamma.
"""

import math
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy import constants

from .errors import InvalidDimensionError, ParameterError
from .operators import HilbertSpace, adjoint, collective_projector, embed_fock, fock_annihilation

SQRT2 = math.sqrt(2.0)
GAMMA_SUM_TOL = 1e-12

HBAR = constants.hbar
FLUX_QUANTUM = constants.physical_constants["mag. flux quantum"][0]


@dataclass(frozen=True)
class PhysicalParams:
    """Model parameters in units of gamma.

    ``Gamma_s`` and ``Delta`` may be left as ``None``; they then resolve to
    ``2 - Gamma_a`` and the red sideband ``nu + Lambda`` respectively (see
    :attr:`gamma_s` and :attr:`delta`). Keeping the unresolved form lets
    :func:`dataclasses.replace` re-derive them when ``Gamma_a``/``nu`` change.
    """

    nu: float = 0.5
    Q: float = 1e6
    Gamma_a: float = 0.1
    Gamma_s: Optional[float] = None
    Gamma_phi: float = 0.0
    eta: float = 0.003
    Omega: float = 4.0
    Lambda: float = 500.0
    Delta: Optional[float] = None
    N_i: float = 400.0
    fock_dim: int = 10

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is not None and not math.isfinite(value):
                raise ParameterError(f"{f.name} must be finite, got {value}")
        if self.nu <= 0:
            raise ParameterError(f"nu must be > 0, got {self.nu}")
        if self.Q <= 0:
            raise ParameterError(f"Q must be > 0, got {self.Q}")
        if not 0 < self.Gamma_a <= 1:
            raise ParameterError(f"Gamma_a must lie in (0, 1], got {self.Gamma_a}")
        if self.Gamma_s is not None:
            if self.Gamma_s < 0:
                raise ParameterError(f"Gamma_s must be >= 0, got {self.Gamma_s}")
            if abs(self.Gamma_a + self.Gamma_s - 2.0) > GAMMA_SUM_TOL:
                raise ParameterError(
                    f"Gamma_a + Gamma_s must equal 2 (gamma +/- gamma_12), got "
                    f"{self.Gamma_a} + {self.Gamma_s}")
        for name in ("Gamma_phi", "eta", "Omega", "N_i"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0, got {getattr(self, name)}")
        if int(self.fock_dim) != self.fock_dim or self.fock_dim < 2:
            raise ParameterError(f"fock_dim must be an integer >= 2, got {self.fock_dim}")
        object.__setattr__(self, "fock_dim", int(self.fock_dim))

    @property
    def gamma_s(self):
        return 2.0 - self.Gamma_a if self.Gamma_s is None else self.Gamma_s

    @property
    def delta(self):
        return red_sideband_detuning(self) if self.Delta is None else self.Delta

    @property
    def kappa(self):
        """Resonator energy damping rate nu / Q."""
        return self.nu / self.Q

    def space(self):
        return HilbertSpace(self.fock_dim)

    def resolved(self):
        """All fields with defaulted quantities filled in, for output metadata."""
        out = asdict(self)
        out["Gamma_s"] = self.gamma_s
        out["Delta"] = self.delta
        out["Gamma_s_defaulted"] = self.Gamma_s is None
        out["Delta_defaulted"] = self.Delta is None
        return out


@dataclass(frozen=True)
class DeviceParams:
    """SI-unit resonator/qubit device data used only to derive eta."""

    M_eff: float      # kg
    nu_Hz: float      # angular frequency, rad/s
    B: float          # T
    l: float          # m
    varsigma: float   # C_j / S_j matrix-element ratio


@dataclass(frozen=True)
class Dissipator:
    """One Lindblad term.

    ``ops`` holds one operator for the standard form
    ``(k/2)(2 A rho A^+ - {A^+ A, rho})`` and two for the cross form
    ``(k/2) sum_{i != j} (2 A_i rho A_j^+ - {A_j^+ A_i, rho})``.
    """

    rate: float
    ops: tuple
    label: str = ""

    def __post_init__(self):
        if self.rate < 0:
            raise ParameterError(f"dissipator rate must be >= 0, got {self.rate}")
        if len(self.ops) not in (1, 2):
            raise ValueError("a dissipator takes one (standard) or two (cross) operators")
        shapes = {op.shape for op in self.ops}
        if len(shapes) != 1:
            raise InvalidDimensionError(f"dissipator operators disagree in shape: {shapes}")

    @property
    def form(self):
        return "standard" if len(self.ops) == 1 else "cross"

    @property
    def dim(self):
        return self.ops[0].shape[0]


def standard(rate, op, label=""):
    return Dissipator(rate, (op,), label)


def cross(rate, op1, op2, label=""):
    return Dissipator(rate, (op1, op2), label)


def red_sideband_detuning(p):
    """Drive detuning resonant with |g, n> -> |a, n-1>."""
    return p.nu + p.Lambda


def _check_space(p, space):
    if space is None:
        return p.space()
    if space.fock_dim != p.fock_dim:
        raise InvalidDimensionError(
            f"space.fock_dim={space.fock_dim} does not match params.fock_dim={p.fock_dim}")
    return space


def _position(space):
    b = embed_fock(fock_annihilation(space.fock_dim), space)
    return b, (b + adjoint(b)).tocsr()


def build_hamiltonian(p, space=None):
    """Rotating-frame Hamiltonian H_0 + H_I as a sparse Hermitian matrix."""
    space = _check_space(p, space)
    R = lambda j, k: collective_projector(j, k, space)  # noqa: E731
    b, x = _position(space)

    h0 = (p.nu * (adjoint(b) @ b)
          + p.delta * (R("e", "e") - R("g", "g"))
          + p.Lambda * (R("s", "s") - R("a", "a")))
    carrier = R("e", "s") + R("s", "g") + R("s", "e") + R("g", "s")
    sideband = x @ (R("a", "g") + R("g", "a") - R("e", "a") - R("a", "e"))
    h = h0 + SQRT2 * p.Omega * carrier + SQRT2 * p.Omega * p.eta * sideband
    return h.tocsr()


def dephasing_operators(space):
    """Collective-basis images of sigma_z on the left and on the right qubit.

    With |s>, |a> = (|eg> +/- |ge>)/sqrt(2), the single-qubit operator
    |e_j><e_j| - |g_j><g_j| becomes R_ee - R_gg +/- (R_sa + R_as).
    """
    R = lambda j, k: collective_projector(j, k, space)  # noqa: E731
    diag = R("e", "e") - R("g", "g")
    mix = R("s", "a") + R("a", "s")
    return (diag + mix).tocsr(), (diag - mix).tocsr()


def build_dissipators(p, space=None, drop_zero=False):
    """All Lindblad terms of the master equation, in a fixed order.

    Order: the six qubit-emission terms (two direct, two second-order
    Lamb-Dicke, two first-order cross terms), the two single-qubit dephasing
    terms, then resonator damping and thermal heating. All ten are always
    returned, zero-rate ones included (e.g. dephasing at ``Gamma_phi == 0``),
    unless ``drop_zero`` is set.
    """
    space = _check_space(p, space)
    R = lambda j, k: collective_projector(j, k, space)  # noqa: E731
    b, x = _position(space)
    gs, ga, eta = p.gamma_s, p.Gamma_a, p.eta

    sym = (R("s", "e") + R("g", "s")).tocsr()       # decay through |s>
    anti = (R("a", "e") - R("g", "a")).tocsr()      # decay through |a>
    d_left, d_right = dephasing_operators(space)

    terms = [
        standard(gs, sym, "emission_s"),
        standard(ga, anti, "emission_a"),
        standard(gs * eta**2, (anti @ x).tocsr(), "recoil_s"),
        standard(ga * eta**2, (sym @ x).tocsr(), "recoil_a"),
        cross(gs * eta, ((R("g", "a") - R("a", "e")) @ x).tocsr(), sym, "cross_s"),
        cross(ga * eta, (sym @ x).tocsr(), (R("g", "a") - R("a", "e")).tocsr(), "cross_a"),
        standard(p.Gamma_phi / 2, d_left, "dephasing_L"),
        standard(p.Gamma_phi / 2, d_right, "dephasing_R"),
        standard((p.N_i + 1) * p.kappa, b, "bath_damping"),
        standard(p.N_i * p.kappa, adjoint(b), "bath_heating"),
    ]
    if drop_zero:
        terms = [t for t in terms if t.rate != 0]
    return terms


def derive_lamb_dicke(d):
    """Zero-point fluctuation X0 (m) and |eta| for a device.

    eta = varsigma * B * l * X0 * 2 pi / Phi_0, X0 = sqrt(hbar / (2 M_eff nu)).
    """
    if d.M_eff <= 0 or d.nu_Hz <= 0:
        raise ParameterError("M_eff and nu_Hz must be positive")
    if d.l <= 0:
        raise ParameterError("resonator length must be positive")
    x0 = math.sqrt(HBAR / (2.0 * d.M_eff * d.nu_Hz))
    eta = d.varsigma * d.B * d.l * x0 * 2.0 * math.pi / FLUX_QUANTUM
    return x0, abs(eta)


def beam_mass(length, width, thickness, density=3100.0):
    """Mass (kg) of a rectangular beam; default density is silicon nitride."""
    return density * length * width * thickness


def to_dense(op):
    return op.toarray() if sp.issparse(op) else np.asarray(op)
