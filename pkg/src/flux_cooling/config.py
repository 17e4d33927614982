"""
INI-style run configuration.

Example::

    [params]
    nu = 0.5
    Gamma_a = 0.05
    Omega = 4

    [solver]
    fock_dim_max = 60

    [sweep]
    axis = Omega
    start = 1
    stop = 10
    points = 30

    [output]
    csv_path = omega_sweep.csv

Keys are case sensitive and unknown sections or keys are rejected. The
``[metadata]`` section is free-form and copied verbatim into output headers.
"""

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Tuple

from .analysis import SWEEP_AXES, sweep_values
from .errors import ConfigError, FluxCoolingError
from .liouvillian import FOCK_DIM_MAX, RESIDUAL_TOL
from .model import PhysicalParams

PARAM_KEYS = {
    "nu": float, "Q": float, "Gamma_a": float, "Gamma_s": float, "Gamma_phi": float,
    "eta": float, "Omega": float, "Lambda": float, "N_i": float, "fock_dim": int,
    "delta": float,
}
SOLVER_KEYS = {"fock_dim_max": int, "residual_tol": float, "evolve_t_final": float,
               "evolve_points": int}
SWEEP_KEYS = {"axis": str, "start": float, "stop": float, "points": int, "spacing": str,
              "link_delta": bool}
FIT_KEYS = {"omega_window": "window", "window": "window", "input_csv": str}
OUTPUT_KEYS = {"csv_path": str, "plot_path": str}
SECTIONS = {"params", "solver", "sweep", "fit", "output", "metadata"}

# nu used for the Omega sweeps when the config leaves it unset
DEFAULT_SWEEP_NU = 0.5


@dataclass
class SolverConfig:
    fock_dim_max: int = FOCK_DIM_MAX
    residual_tol: float = RESIDUAL_TOL
    evolve_t_final: Optional[float] = None
    evolve_points: int = 201


@dataclass
class SweepConfig:
    axis: str
    start: float
    stop: float
    points: int
    spacing: str = "linear"
    link_delta: bool = True

    def values(self):
        return sweep_values(self.start, self.stop, self.points, self.spacing)


@dataclass
class FitConfig:
    window: Optional[Tuple[float, float]] = None
    input_csv: Optional[str] = None


@dataclass
class RunConfig:
    params: PhysicalParams
    solver: SolverConfig = field(default_factory=SolverConfig)
    sweep: Optional[SweepConfig] = None
    fit: Optional[FitConfig] = None
    csv_path: Optional[str] = None
    plot_path: Optional[str] = None
    metadata: dict = field(default_factory=dict)
    defaulted: tuple = ()


def _convert(section, key, raw, kind):
    try:
        if kind is bool:
            lowered = raw.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "window":
            parts = [float(x) for x in raw.replace("[", "").replace("]", "").split(",")]
            if len(parts) != 2 or parts[0] > parts[1]:
                raise ValueError(raw)
            return tuple(parts)
        if kind is int:
            as_float = float(raw)
            if as_float != int(as_float):
                raise ValueError(raw)
            return int(as_float)
        return kind(raw.strip())
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}", key=key) from None


def _read_section(cp, name, allowed):
    if not cp.has_section(name):
        return {}
    out = {}
    for key, raw in cp.items(name):
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{name}]; allowed: {sorted(allowed)}",
                              key=key)
        out[key] = _convert(name, key, raw, allowed[key])
    return out


def parse_config(text, source="<string>"):
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for name in cp.sections():
        if name not in SECTIONS:
            raise ConfigError(f"unknown section [{name}]", key=name)

    raw_params = _read_section(cp, "params", PARAM_KEYS)
    solver = SolverConfig(**_read_section(cp, "solver", SOLVER_KEYS))
    sweep_raw = _read_section(cp, "sweep", SWEEP_KEYS)
    fit_raw = _read_section(cp, "fit", FIT_KEYS)
    output = _read_section(cp, "output", OUTPUT_KEYS)
    metadata = dict(cp.items("metadata")) if cp.has_section("metadata") else {}

    sweep = None
    if sweep_raw:
        missing = {"axis", "start", "stop", "points"} - set(sweep_raw)
        if missing:
            raise ConfigError(f"[sweep] missing keys: {sorted(missing)}", key=sorted(missing)[0])
        if sweep_raw["axis"] not in SWEEP_AXES:
            raise ConfigError(f"[sweep] axis must be one of {SWEEP_AXES}", key="axis")
        sweep = SweepConfig(**sweep_raw)
        if sweep.axis == "Delta":
            sweep.link_delta = False

    defaulted = []
    kwargs = {k: v for k, v in raw_params.items() if k != "delta"}
    if "delta" in raw_params:
        kwargs["Delta"] = raw_params["delta"]
    else:
        defaulted.append("Delta")
    if "Gamma_s" not in raw_params:
        defaulted.append("Gamma_s")
    if "nu" not in raw_params:
        kwargs["nu"] = DEFAULT_SWEEP_NU
        defaulted.append("nu")
    try:
        params = PhysicalParams(**kwargs)
        if sweep is not None:
            sweep.values()
    except FluxCoolingError as exc:
        key = next((f.name for f in fields(PhysicalParams) if f.name in str(exc)), None)
        raise ConfigError(str(exc), key=key) from None

    if "omega_window" in fit_raw:
        if "window" in fit_raw:
            raise ConfigError("[fit] give either omega_window or window, not both", key="window")
        fit_raw["window"] = fit_raw.pop("omega_window")
    fit = FitConfig(**fit_raw) if cp.has_section("fit") else None
    return RunConfig(params=params, solver=solver, sweep=sweep, fit=fit,
                     csv_path=output.get("csv_path"), plot_path=output.get("plot_path"),
                     metadata=metadata, defaulted=tuple(defaulted))


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))
