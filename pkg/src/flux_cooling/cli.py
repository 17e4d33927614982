"""
Command-line entry point: ``flux-cooling {steady,sweep,fit,evolve} --config FILE``.

Exit codes: 0 success, 1 configuration error, 2 solver/integrator error,
3 not enough data to fit. Errors are also reported as one JSON line on
stderr.
"""

import argparse
import json
import logging
import sys

from . import __version__
from .analysis import SweepSpec, environment_term, fit_cg, run_sweep, scattering_term
from .config import load_config
from .errors import ConfigError, InsufficientDataError, SolverError
from .liouvillian import build_liouvillian, converged_nss, steady_state, time_evolve
from .operators import product_state, thermal_fock_state
from .output import (EVOLVE_HEADER, STEADY_HEADER, metadata_lines, read_sweep, write_sweep,
                     write_table)
from .plotting import line_plot

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_FIT = 0, 1, 2, 3

log = logging.getLogger("flux_cooling")


class _Fail(Exception):
    def __init__(self, code, kind, message, **extra):
        super().__init__(message)
        self.code, self.kind, self.extra = code, kind, extra


def _extra_meta(cfg, args, command):
    meta = {"command": command, "version": __version__,
            "solver.fock_dim_max": cfg.solver.fock_dim_max,
            "solver.residual_tol": cfg.solver.residual_tol}
    if args.seed is not None:
        meta["seed"] = args.seed
    for key, value in sorted(cfg.metadata.items()):
        meta[f"metadata.{key}"] = value
    return meta


def _csv_path(cfg, args):
    return args.out or cfg.csv_path


def _plot_path(cfg, args):
    return args.plot or cfg.plot_path


def _sweep_spec(cfg):
    s = cfg.sweep
    return SweepSpec(cfg.params, s.axis, s.values(), link_delta_to_sideband=s.link_delta,
                     fock_dim_max=cfg.solver.fock_dim_max, residual_tol=cfg.solver.residual_tol)


def cmd_steady(cfg, args):
    try:
        r = converged_nss(cfg.params, fock_dim_max=cfg.solver.fock_dim_max,
                          residual_tol=cfg.solver.residual_tol)
    except SolverError as exc:
        raise _Fail(EXIT_SOLVER, type(exc).__name__, str(exc)) from None
    print(f"n_ss = {r.n_ss!r}")
    print(f"p_ground = {r.p_ground!r}")
    print(f"residual = {r.residual!r}")
    print(f"fock_dim_used = {r.fock_dim_used}")
    path = _csv_path(cfg, args)
    if path:
        comments = ["table = steady"] + metadata_lines(
            cfg.params, cfg.defaulted, _extra_meta(cfg, args, "steady"))
        write_table(path, STEADY_HEADER,
                    [(r.n_ss, r.p_ground, r.residual, r.fock_dim_used, r.converged)], comments)
    return EXIT_OK


def _sweep_plot(result, path, fit=None):
    xs = [r.value for r in result.rows]
    series = [("n_ss", xs, [r.n_ss for r in result.rows], False),
              ("environment", xs, [r.n_env for r in result.rows], False),
              ("scattering", xs, [r.n_scatter for r in result.rows], False)]
    if fit is not None:
        series.append(("fit: environment", xs,
                       [fit.C * environment_term(r.params) for r in result.rows], True))
        series.append(("fit: scattering", xs,
                       [fit.G * scattering_term(r.params) for r in result.rows], True))
    positive = all(x > 0 for x in xs)
    log_x = positive and len(xs) > 2 and max(xs) / min(xs) >= 20
    line_plot(series, path, xlabel=result.axis, ylabel="phonon number", log_x=log_x)


def cmd_sweep(cfg, args):
    if cfg.sweep is None:
        raise _Fail(EXIT_CONFIG, "ConfigError", "[sweep] section required", key="sweep")
    result = run_sweep(_sweep_spec(cfg), workers=args.threads)
    path = _csv_path(cfg, args)
    if path:
        write_sweep(path, result, cfg.defaulted, _extra_meta(cfg, args, "sweep"))
    for r in result.rows:
        status = "ok" if r.usable else (r.error or "not converged")
        print(f"{result.axis}={r.value:.6g}  n_ss={r.n_ss:.6g}  n_env={r.n_env:.6g}  "
              f"n_scatter={r.n_scatter:.6g}  fock_dim={r.fock_dim}  {status}")
    if _plot_path(cfg, args):
        _sweep_plot(result, _plot_path(cfg, args))
    if any(not r.usable for r in result.rows):
        raise _Fail(EXIT_SOLVER, "SolverError", "one or more sweep points failed",
                    failed=[r.value for r in result.rows if not r.usable])
    return EXIT_OK


def cmd_fit(cfg, args):
    fit_cfg = cfg.fit
    if fit_cfg is not None and fit_cfg.input_csv:
        try:
            result = read_sweep(fit_cfg.input_csv)
        except (OSError, ValueError, KeyError) as exc:
            raise _Fail(EXIT_CONFIG, "ConfigError", f"cannot read sweep table: {exc}",
                        key="input_csv") from None
    elif cfg.sweep is not None:
        result = run_sweep(_sweep_spec(cfg), workers=args.threads)
    else:
        raise _Fail(EXIT_CONFIG, "ConfigError",
                    "fit needs [fit] input_csv or a [sweep] section", key="fit")
    window = fit_cfg.window if fit_cfg is not None else None
    try:
        fit = fit_cg([result], window=window)
    except InsufficientDataError as exc:
        raise _Fail(EXIT_FIT, "InsufficientDataError", str(exc)) from None

    print(f"C = {fit.C!r}")
    print(f"G = {fit.G!r}")
    print(f"rms_relative_error = {fit.rms_relative_error!r}")
    print(f"window = {fit.domain_of_validity}")

    path = _csv_path(cfg, args)
    if path:
        meta = _extra_meta(cfg, args, "fit")
        meta.update({"fit.C": fit.C, "fit.G": fit.G,
                     "fit.rms_relative_error": fit.rms_relative_error,
                     "fit.rms_relative_error_env": fit.rms_relative_error_env,
                     "fit.rms_relative_error_scatter": fit.rms_relative_error_scatter,
                     "fit.window": fit.domain_of_validity,
                     "sweep.axis": result.axis})
        rows = []
        for r in result.rows:
            env = fit.C * environment_term(r.params)
            sc = fit.G * scattering_term(r.params)
            inside = window is None or window[0] <= r.value <= window[1]
            rows.append((r.value, r.n_ss, r.n_env, r.n_scatter, env, sc, env + sc, inside))
        write_table(path, ("value", "n_ss", "n_env", "n_scatter", "n_env_fit", "n_scatter_fit",
                           "n_ss_fit", "in_window"), rows,
                    ["table = fit"] + metadata_lines(result.base, cfg.defaulted, meta))
    if _plot_path(cfg, args):
        _sweep_plot(result, _plot_path(cfg, args), fit)
    return EXIT_OK


def cmd_evolve(cfg, args):
    p = cfg.params
    t_final = cfg.solver.evolve_t_final
    if t_final is None:
        raise _Fail(EXIT_CONFIG, "ConfigError", "[solver] evolve_t_final is required",
                    key="evolve_t_final")
    n_bar = min(p.N_i, p.fock_dim / 4)
    rho0 = product_state("g", thermal_fock_state(n_bar, p.fock_dim))
    L = build_liouvillian(p)
    try:
        traj = time_evolve(L, rho0, t_final, n_points=cfg.solver.evolve_points)
        ss = steady_state(L, residual_tol=cfg.solver.residual_tol)
    except SolverError as exc:
        raise _Fail(EXIT_SOLVER, type(exc).__name__, str(exc)) from None
    n_first, n_last, t_last = float(traj.n_of_t[0]), float(traj.n_of_t[-1]), float(traj.times[-1])
    print(f"initial n = {n_first!r} (thermal n_bar = {n_bar!r}, fock_dim = {p.fock_dim})")
    print(f"final n = {n_last!r} at t = {t_last!r}")
    print(f"steady-state n_ss = {ss.n_ss!r}; |difference| = {abs(n_last - ss.n_ss):.3e}")
    path = _csv_path(cfg, args)
    if path:
        meta = _extra_meta(cfg, args, "evolve")
        meta.update({"evolve.t_final": t_final, "evolve.initial_n_bar": n_bar,
                     "evolve.steady_state_n_ss": ss.n_ss})
        write_table(path, EVOLVE_HEADER,
                    zip(map(float, traj.times), map(float, traj.n_of_t),
                        map(float, traj.trace_error)),
                    ["table = evolve"] + metadata_lines(p, cfg.defaulted, meta))
    if _plot_path(cfg, args):
        line_plot([("n(t)", list(traj.times), list(traj.n_of_t), False),
                   ("n_ss", [traj.times[0], traj.times[-1]], [ss.n_ss, ss.n_ss], True)],
                  _plot_path(cfg, args), xlabel="t (1/gamma)", ylabel="phonon number")
    return EXIT_OK


COMMANDS = {"steady": cmd_steady, "sweep": cmd_sweep, "fit": cmd_fit, "evolve": cmd_evolve}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="flux-cooling",
        description="Steady-state cooling of a nanomechanical resonator by two collective "
                    "flux qubits.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="INI-style run configuration")
        p.add_argument("--out", help="CSV output path (overrides [output] csv_path)")
        p.add_argument("--plot", help="SVG plot path (overrides [output] plot_path)")
        p.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
        p.add_argument("--seed", type=int, default=None,
                       help="recorded in metadata; the physics is deterministic")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _report(code, kind, message, **extra):
    payload = {"error": kind, "exit_code": code, "message": message}
    payload.update(extra)
    print(json.dumps(payload, default=str), file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        return _report(EXIT_CONFIG, "ConfigError", "--threads must be >= 1", key="threads")
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        return _report(EXIT_CONFIG, "ConfigError", str(exc), key=exc.key)
    except _Fail as exc:
        return _report(exc.code, exc.kind, str(exc), **exc.extra)


if __name__ == "__main__":
    sys.exit(main())
