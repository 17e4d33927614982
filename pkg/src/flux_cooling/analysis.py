"""
Parameter sweeps, the environment/scattering split of n_ss, and the
two-term cooling-limit formula

    n_ss = C * Gamma_a * nu * N_i / ((eta * Omega)**2 * Q) + G * (Gamma_a / (4 nu))**2

with C, G fitted to numerical sweeps.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .errors import FluxCoolingError, FormulaError, InsufficientDataError, ParameterError
from .liouvillian import FOCK_DIM_MAX, RESIDUAL_TOL, converged_nss
from .model import PhysicalParams

log = logging.getLogger(__name__)

SWEEP_AXES = ("Omega", "Gamma_a", "nu", "N_i", "Q", "eta", "Gamma_phi", "Delta")
NEGATIVE_CLAMP = 1e-6


@dataclass(frozen=True)
class SweepSpec:
    base: PhysicalParams
    axis: str
    values: Tuple[float, ...]
    link_delta_to_sideband: bool = True
    fock_dim_max: int = FOCK_DIM_MAX
    residual_tol: float = RESIDUAL_TOL

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ParameterError(f"sweep axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ParameterError("sweep needs at least one value")
        if not all(math.isfinite(v) for v in values):
            raise ParameterError("sweep values must be finite")
        if self.axis == "Delta" and self.link_delta_to_sideband:
            raise ParameterError("cannot sweep Delta while linking it to the red sideband")
        object.__setattr__(self, "values", values)

    def params_at(self, value):
        """Base parameters with the axis field replaced by ``value``."""
        delta = None if self.link_delta_to_sideband else self.base.delta
        p = replace(self.base, Delta=delta)
        return replace(p, **{self.axis: value})


@dataclass
class SweepRow:
    value: float
    params: PhysicalParams
    n_ss: float = math.nan
    n_env: float = math.nan
    n_scatter: float = math.nan
    p_ground: float = math.nan
    residual: float = math.nan
    fock_dim: int = 0
    converged: bool = False
    clamped: bool = False
    error: Optional[str] = None

    @property
    def usable(self):
        return self.converged and self.error is None and math.isfinite(self.n_ss)


@dataclass
class SweepResult:
    axis: str
    base: PhysicalParams
    link_delta_to_sideband: bool
    rows: List[SweepRow] = field(default_factory=list)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def argmin(self):
        """Row with the smallest n_ss among usable rows."""
        good = [r for r in self.rows if r.usable]
        if not good:
            raise InsufficientDataError("no usable rows in sweep")
        return min(good, key=lambda r: r.n_ss)


@dataclass
class FitResult:
    C: float
    G: float
    rms_relative_error: float
    rms_relative_error_env: float
    rms_relative_error_scatter: float
    n_rows: int
    domain_of_validity: str


def split_contributions(p, fock_dim_max=FOCK_DIM_MAX, residual_tol=RESIDUAL_TOL):
    """Return (n_env, n_scatter, total, clamped) from runs at N_i and at N_i = 0."""
    if p.N_i <= 0:
        raise ParameterError("split_contributions needs N_i > 0")
    total = converged_nss(p, fock_dim_max=fock_dim_max, residual_tol=residual_tol)
    scatter = converged_nss(replace(p, N_i=0.0), fock_dim_max=fock_dim_max,
                            residual_tol=residual_tol)
    n_scatter = scatter.n_ss
    n_env = total.n_ss - n_scatter
    clamped = False
    if n_env < 0 and n_env >= -NEGATIVE_CLAMP:
        n_env, clamped = 0.0, True
    if n_scatter < 0 and n_scatter >= -NEGATIVE_CLAMP:
        n_scatter, clamped = 0.0, True
    return n_env, n_scatter, total, clamped


def _sweep_point(args):
    spec, value = args
    p = spec.params_at(value)
    row = SweepRow(value=value, params=p)
    try:
        if p.N_i > 0:
            n_env, n_scatter, total, clamped = split_contributions(
                p, spec.fock_dim_max, spec.residual_tol)
        else:
            total = converged_nss(p, fock_dim_max=spec.fock_dim_max,
                                  residual_tol=spec.residual_tol)
            n_env, n_scatter, clamped = 0.0, total.n_ss, False
    except FluxCoolingError as exc:
        row.error = f"{type(exc).__name__}: {exc}"
        log.warning("sweep point %s=%g failed: %s", spec.axis, value, row.error)
        return row
    row.n_ss = total.n_ss
    row.n_env = n_env
    row.n_scatter = n_scatter
    row.p_ground = total.p_ground
    row.residual = total.residual
    row.fock_dim = total.fock_dim_used
    row.converged = total.converged
    row.clamped = clamped
    return row


def run_sweep(spec, workers=1):
    """Solve every sweep point; rows come back in the order of ``spec.values``."""
    jobs = [(spec, v) for v in spec.values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(job) for job in jobs]
    return SweepResult(spec.axis, spec.base, spec.link_delta_to_sideband, rows)


def environment_term(p):
    """Gamma_a nu N_i / ((eta Omega)^2 Q), the coefficient multiplying C."""
    coupling = (p.eta * p.Omega) ** 2
    if coupling == 0:
        raise FormulaError("cooling formula is undefined for eta * Omega = 0")
    return p.Gamma_a * p.nu * p.N_i / (coupling * p.Q)


def scattering_term(p):
    """(Gamma_a / (4 nu))^2, the coefficient multiplying G."""
    return (p.Gamma_a / (4.0 * p.nu)) ** 2


def eval_cooling_formula(p, C, G):
    if C <= 0 or G <= 0:
        raise ParameterError("C and G must be positive")
    return C * environment_term(p) + G * scattering_term(p)


def _fit_scale(x, y):
    # one-parameter model y = c x, least squares in relative error: min sum((c x/y - 1)^2)
    r = x / y
    c = np.sum(r) / np.sum(r * r)
    rms = math.sqrt(np.mean((c * r - 1.0) ** 2))
    return c, rms


def fit_cg(sweeps, window=None):
    """Fit constant C and G to the decomposed rows of one or more sweeps.

    ``window=(lo, hi)`` restricts rows to that range of the sweep axis value.
    Each coefficient is a single-parameter relative least-squares fit of its
    term against n_env or n_scatter.
    """
    if isinstance(sweeps, SweepResult):
        sweeps = [sweeps]
    rows = []
    for s in sweeps:
        for r in s.rows:
            if not r.usable:
                continue
            if window is not None and not window[0] <= r.value <= window[1]:
                continue
            if r.n_env <= 0 or r.n_scatter <= 0:
                continue
            if r.params.eta * r.params.Omega == 0:
                continue
            rows.append(r)
    if len(rows) < 3:
        raise InsufficientDataError(f"need at least 3 usable rows to fit, got {len(rows)}")

    x_env = np.array([environment_term(r.params) for r in rows])
    x_sc = np.array([scattering_term(r.params) for r in rows])
    n_env = np.array([r.n_env for r in rows])
    n_sc = np.array([r.n_scatter for r in rows])
    n_tot = np.array([r.n_ss for r in rows])

    C, rms_env = _fit_scale(x_env, n_env)
    G, rms_sc = _fit_scale(x_sc, n_sc)
    model = C * x_env + G * x_sc
    rms = math.sqrt(np.mean((model / n_tot - 1.0) ** 2))

    axes = sorted({s.axis for s in sweeps})
    values = [r.value for r in rows]
    domain = f"{'/'.join(axes)} in [{min(values):.6g}, {max(values):.6g}] ({len(rows)} rows)"
    return FitResult(C=float(C), G=float(G), rms_relative_error=rms,
                     rms_relative_error_env=rms_env, rms_relative_error_scatter=rms_sc,
                     n_rows=len(rows), domain_of_validity=domain)


def nu_opt(p, C, G):
    """Resonator frequency minimizing the cooling formula at fixed other parameters."""
    if C <= 0 or G <= 0:
        raise ParameterError("C and G must be positive")
    if p.N_i <= 0:
        raise ParameterError("nu_opt needs N_i > 0")
    return (p.eta ** 2 * p.Omega ** 2 * p.Q * p.Gamma_a * G / (8.0 * C * p.N_i)) ** (1.0 / 3.0)


def sweep_values(start, stop, points, spacing="linear"):
    if points < 1:
        raise ParameterError("points must be >= 1")
    if spacing == "linear":
        return tuple(np.linspace(start, stop, points).tolist())
    if spacing == "log":
        if start <= 0 or stop <= 0:
            raise ParameterError("log spacing needs positive bounds")
        return tuple(np.geomspace(start, stop, points).tolist())
    raise ParameterError(f"spacing must be 'linear' or 'log', got {spacing!r}")
