import csv
import json
import math
import pathlib
import xml.etree.ElementTree as ET

import pytest

from flux_cooling.analysis import SweepResult, SweepRow, SweepSpec, environment_term, scattering_term
from flux_cooling.cli import main
from flux_cooling.config import load_config, parse_config
from flux_cooling.errors import ConfigError
from flux_cooling.model import PhysicalParams
from flux_cooling.output import read_sweep, write_sweep

OPTIMUM_INI = """
[params]
nu = 0.5
Gamma_a = 0.05
Omega = 4
Gamma_phi = 0
eta = 0.003
Q = 1e6
N_i = 400
Lambda = 500
"""

FAST = """
[params]
nu = 1.0
Q = 20
Gamma_a = 0.5
Gamma_phi = 0.2
eta = 0.1
Omega = 1
Lambda = 5
N_i = 0.5
fock_dim = 6
"""


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_table(path):
    lines = [ln for ln in open(path) if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def comments(path):
    return [ln[2:].rstrip("\n") for ln in open(path) if ln.startswith("#")]


def stderr_error(capsys):
    err = capsys.readouterr().err.strip().splitlines()[-1]
    return json.loads(err)


def test_parse_config_defaults():
    cfg = parse_config("[params]\nGamma_a = 0.1\n")
    assert cfg.params.nu == 0.5
    assert set(cfg.defaulted) == {"nu", "Delta", "Gamma_s"}
    assert cfg.params.delta == 500.5


@pytest.mark.parametrize("text,key", [
    ("[params]\nGama_a = 0.1\n", "Gama_a"),
    ("[params]\nnu = fast\n", "nu"),
    ("[params]\nGamma_a = 1.5\n", "Gamma_a"),
    ("[solver]\nthreads = 2\n", "threads"),
    ("[sweep]\naxis = Omega\nstart = 1\n", "points"),
    ("[sweep]\naxis = Q2\nstart = 1\nstop = 2\npoints = 2\n", "axis"),
    ("[bogus]\nx = 1\n", "bogus"),
])
def test_parse_config_rejects(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key


def test_fit_window_aliases():
    assert parse_config("[fit]\nomega_window = 1, 4\n").fit.window == (1.0, 4.0)
    assert parse_config("[fit]\nwindow = [0.1, 1]\n").fit.window == (0.1, 1.0)


def test_steady_optimum(tmp_path, capsys):
    out = tmp_path / "steady.csv"
    assert main(["steady", "--config", write(tmp_path, OPTIMUM_INI), "--out", str(out)]) == 0
    assert "n_ss" in capsys.readouterr().out
    (row,) = read_table(out)
    assert 0.015 <= float(row["n_ss"]) <= 0.06
    meta = comments(out)
    assert "param.Delta = 500.5 (defaulted)" in meta
    assert "param.Gamma_s = 1.95 (defaulted)" in meta


def test_steady_decoupled_gives_bath_occupation(tmp_path):
    out = tmp_path / "steady.csv"
    text = "[params]\neta = 0\nN_i = 1\nfock_dim = 30\nQ = 1e3\n"
    assert main(["steady", "--config", write(tmp_path, text), "--out", str(out)]) == 0
    (row,) = read_table(out)
    assert float(row["n_ss"]) == pytest.approx(1.0, rel=1e-3)


def test_bad_key_exit_1(tmp_path, capsys):
    assert main(["steady", "--config", write(tmp_path, "[params]\nGama_a = 0.1\n")]) == 1
    err = stderr_error(capsys)
    assert err["key"] == "Gama_a" and "Gama_a" in err["message"]


def test_missing_config_exit_1(tmp_path, capsys):
    assert main(["steady", "--config", str(tmp_path / "nope.ini")]) == 1
    assert stderr_error(capsys)["error"] == "ConfigError"


def test_solver_error_exit_2(tmp_path, capsys):
    text = "[params]\neta = 0\nN_i = 400\n[solver]\nfock_dim_max = 20\n"
    assert main(["steady", "--config", write(tmp_path, text)]) == 2
    assert stderr_error(capsys)["error"] == "ConvergenceError"


def test_single_point_sweep_matches_steady(tmp_path):
    sweep_text = OPTIMUM_INI + "[sweep]\naxis = Omega\nstart = 4\nstop = 4\npoints = 1\n"
    s_out, p_out = tmp_path / "sweep.csv", tmp_path / "steady.csv"
    assert main(["sweep", "--config", write(tmp_path, sweep_text, "s.ini"),
                 "--out", str(s_out)]) == 0
    assert main(["steady", "--config", write(tmp_path, OPTIMUM_INI), "--out", str(p_out)]) == 0
    (srow,) = read_table(s_out)
    (prow,) = read_table(p_out)
    assert list(srow) == ["axis", "value", "n_ss", "n_env", "n_scatter", "p_ground", "residual",
                          "fock_dim", "converged"]
    for key in ("n_ss", "p_ground", "residual", "fock_dim", "converged"):
        assert srow[key] == prow[key]


def test_sweep_deterministic_with_plot(tmp_path):
    text = OPTIMUM_INI + "[sweep]\naxis = nu\nstart = 0.2\nstop = 0.6\npoints = 3\n"
    cfg = write(tmp_path, text)
    a, b, plot = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "a.svg"
    assert main(["sweep", "--config", cfg, "--out", str(a), "--plot", str(plot)]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(b), "--threads", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    root = ET.parse(plot).getroot()
    assert root.tag.endswith("svg")
    rows = read_table(a)
    assert [float(r["value"]) for r in rows] == [0.2, 0.4, 0.6]
    for r in rows:
        # round-trip precision
        assert repr(float(r["n_ss"])) == r["n_ss"]


def _synthetic_csv(tmp_path, C, G, values):
    base = PhysicalParams(Gamma_a=0.05, Omega=4.0)
    spec = SweepSpec(base, "nu", values)
    result = SweepResult("nu", base, True)
    for v in values:
        p = spec.params_at(v)
        env, sc = C * environment_term(p), G * scattering_term(p)
        result.rows.append(SweepRow(v, p, env + sc, env, sc, 0.9, 0.0, 10, True))
    path = tmp_path / "synthetic.csv"
    write_sweep(path, result)
    return path


def test_sweep_csv_round_trip(tmp_path):
    path = _synthetic_csv(tmp_path, 0.4, 3.0, (0.1, 0.3, 0.7))
    back = read_sweep(path)
    assert back.axis == "nu"
    assert back.base.delta == 500.5
    assert [r.params.delta for r in back.rows] == [500.1, 500.3, 500.7]
    assert back.rows[1].n_env == 0.4 * environment_term(back.rows[1].params)


def test_fit_synthetic_exact(tmp_path, capsys):
    csv_path = _synthetic_csv(tmp_path, 0.4, 3.0, (0.1, 0.2, 0.3, 0.5, 0.8))
    cfg = write(tmp_path, f"[fit]\ninput_csv = {csv_path}\n")
    out, plot = tmp_path / "fit.csv", tmp_path / "fit.svg"
    assert main(["fit", "--config", cfg, "--out", str(out), "--plot", str(plot)]) == 0
    printed = capsys.readouterr().out
    values = dict(line.split(" = ", 1) for line in printed.splitlines())
    assert float(values["C"]) == pytest.approx(0.4, rel=1e-9)
    assert float(values["G"]) == pytest.approx(3.0, rel=1e-9)
    assert len(read_table(out)) == 5
    ET.parse(plot)


def test_fit_insufficient_rows_exit_3(tmp_path, capsys):
    csv_path = _synthetic_csv(tmp_path, 0.4, 3.0, (0.1, 0.2, 0.3))
    cfg = write(tmp_path, f"[fit]\ninput_csv = {csv_path}\nwindow = 0.1, 0.2\n")
    assert main(["fit", "--config", cfg]) == 3
    assert stderr_error(capsys)["error"] == "InsufficientDataError"


def test_evolve_zero_duration(tmp_path):
    out = tmp_path / "ev.csv"
    cfg = write(tmp_path, FAST + "[solver]\nevolve_t_final = 0\n")
    assert main(["evolve", "--config", cfg, "--out", str(out)]) == 0
    rows = read_table(out)
    assert len(rows) == 1 and float(rows[0]["t"]) == 0.0


def test_evolve_reaches_steady_state(tmp_path):
    out = tmp_path / "ev.csv"
    cfg = write(tmp_path, FAST + "[solver]\nevolve_t_final = 300\nevolve_points = 7\n")
    assert main(["evolve", "--config", cfg, "--out", str(out)]) == 0
    rows = read_table(out)
    n_ss = float(next(c for c in comments(out) if c.startswith("evolve.steady_state_n_ss"))
                 .split(" = ")[1])
    assert abs(float(rows[-1]["n"]) - n_ss) < 1e-4
    assert all(float(r["trace_error"]) < 1e-8 for r in rows)
    times = [float(r["t"]) for r in rows]
    assert all(b > a for a, b in zip(times, times[1:]))


def test_evolve_needs_duration(tmp_path, capsys):
    assert main(["evolve", "--config", write(tmp_path, FAST)]) == 1
    assert stderr_error(capsys)["key"] == "evolve_t_final"


def test_seed_recorded_not_physics(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cfg = write(tmp_path, FAST)
    main(["steady", "--config", cfg, "--out", str(a), "--seed", "1"])
    main(["steady", "--config", cfg, "--out", str(b), "--seed", "2"])
    assert read_table(a) == read_table(b)
    assert "seed = 1" in comments(a)
    assert not math.isnan(float(read_table(a)[0]["n_ss"]))


SHIPPED_CONFIGS = sorted((pathlib.Path(__file__).parent.parent / "configs").glob("*.ini"))


@pytest.mark.parametrize("path", SHIPPED_CONFIGS, ids=lambda p: p.name)
def test_shipped_configs_parse(path):
    cfg = load_config(path)
    assert cfg.csv_path
    if cfg.sweep is not None:
        assert len(cfg.sweep.values()) == cfg.sweep.points
