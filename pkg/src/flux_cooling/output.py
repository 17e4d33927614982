"""
CSV tables with ``#`` metadata headers, and reading sweep tables back.

Floats are written with ``repr`` so they round-trip bit for bit.
"""

import csv
import io
import math
from dataclasses import fields
from pathlib import Path

from .analysis import SweepResult, SweepRow, SweepSpec
from .model import PhysicalParams

SWEEP_HEADER = ("axis", "value", "n_ss", "n_env", "n_scatter", "p_ground", "residual",
                "fock_dim", "converged")
STEADY_HEADER = ("n_ss", "p_ground", "residual", "fock_dim", "converged")
EVOLVE_HEADER = ("t", "n", "trace_error")


def fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def metadata_lines(params, defaulted=(), extra=None):
    """Comment lines recording the fully resolved parameter set."""
    lines = []
    resolved = params.resolved()
    for f in fields(PhysicalParams):
        tag = " (defaulted)" if f.name in defaulted or resolved.get(f"{f.name}_defaulted") else ""
        lines.append(f"param.{f.name} = {fmt(resolved[f.name])}{tag}")
    for key, value in (extra or {}).items():
        lines.append(f"{key} = {fmt(value)}")
    return lines


def write_table(path, header, rows, comments=()):
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def sweep_rows(result):
    for r in result.rows:
        yield (result.axis, r.value, r.n_ss, r.n_env, r.n_scatter, r.p_ground, r.residual,
               r.fock_dim, r.converged)


def sweep_comments(result, defaulted=(), extra=None):
    lines = ["table = sweep"]
    lines += metadata_lines(result.base, defaulted)
    lines.append(f"sweep.axis = {result.axis}")
    lines.append(f"sweep.link_delta_to_sideband = {fmt(result.link_delta_to_sideband)}")
    for r in result.rows:
        if r.error:
            lines.append(f"error.{result.axis}={fmt(r.value)}: {r.error}")
        if r.clamped:
            lines.append(f"clamped.{result.axis}={fmt(r.value)}: negative contribution set to 0")
    for key, value in (extra or {}).items():
        lines.append(f"{key} = {fmt(value)}")
    return lines


def write_sweep(path, result, defaulted=(), extra=None):
    return write_table(path, SWEEP_HEADER, sweep_rows(result),
                       sweep_comments(result, defaulted, extra))


def _parse_value(text):
    text = text.split(" (defaulted)")[0].strip()
    if text in ("None", ""):
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        return float(text)


def read_sweep(path):
    """Rebuild a SweepResult (with per-row parameters) from a sweep CSV."""
    comments, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, sep, value = line[1:].partition(" = ")
            if sep:
                comments[key.strip()] = value
        elif line.strip():
            body.append(line)

    kwargs = {}
    for f in fields(PhysicalParams):
        raw = comments.get(f"param.{f.name}")
        if raw is None:
            continue
        defaulted = "(defaulted)" in raw
        if f.name in ("Gamma_s", "Delta") and defaulted:
            continue
        kwargs[f.name] = _parse_value(raw)
    base = PhysicalParams(**kwargs)
    axis = comments["sweep.axis"].strip()
    link = _parse_value(comments.get("sweep.link_delta_to_sideband", "true"))

    reader = csv.DictReader(body)
    if tuple(reader.fieldnames or ()) != SWEEP_HEADER:
        raise ValueError(f"{path}: not a sweep table (header {reader.fieldnames})")
    raw_rows = list(reader)
    spec = SweepSpec(base, axis, tuple(float(r["value"]) for r in raw_rows) or (0.0,), link)
    result = SweepResult(axis, base, link)
    for r in raw_rows:
        value = float(r["value"])
        result.rows.append(SweepRow(
            value=value, params=spec.params_at(value), n_ss=float(r["n_ss"]),
            n_env=float(r["n_env"]), n_scatter=float(r["n_scatter"]),
            p_ground=float(r["p_ground"]), residual=float(r["residual"]),
            fock_dim=int(r["fock_dim"]), converged=r["converged"] == "true",
            error=None if math.isfinite(float(r["n_ss"])) else "missing"))
    return result
