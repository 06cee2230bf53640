"""Command-line front end: self checks, optimum tables, simulation runs, and
report generation over persisted result records.

Exit codes: 0 success, 1 usage/config/check failure, 2 I/O failure.  Result
records are JSON with sorted keys, so write -> read -> write is byte stable.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone

import click
import numpy as np

from .geometry import sphere_quadrature
from .groups import build_signal_family, dihedral_d3
from .harness import RunConfig, RunResult, reference_score, run_experiment
from .multispin import attainable_spins, total_j_projector
from .optimize import finite_group_optimum, optimal_direction_encoding
from .povm import _direction_povm_nodes, covariant_direction_povm, validate_povm
from .protocols import (
    PROTOCOL_KINDS,
    ProtocolSpec,
    d3_covariant_two_spin_score,
    d3_single_spin_povm,
    d3_two_spin_povm,
)
from .states import ProductBasis, SpinJ, StateVector

SCHEMA_VERSION = 1
OUTPUT_DIR_VAR = "SPINDIR_OUTPUT_DIR"

REPORT_COLUMNS = (
    "protocol",
    "N",
    "encoding",
    "decoder",
    "trials",
    "seed",
    "fidelity",
    "stderr",
    "per_axis_infidelity",
    "n_sq_infidelity",
)

_INT_KEYS = ("num_spins", "trials", "seed", "n_theta", "n_phi")
_KNOWN_KEYS = _INT_KEYS + ("kind", "encoding", "decoder", "tie_break", "output")


class _ExitStatus(Exception):
    """Bare exit code for commands that already printed their diagnostics."""

    def __init__(self, code: int):
        super().__init__(code)
        self.code = code


# ---------------------------------------------------------------- records


@dataclass(frozen=True)
class ResultRecord:
    """One persisted run: schema tag, timestamp, config echo, result payload."""

    schema_version: int
    timestamp: str
    config: dict
    result: dict


def config_payload(config: RunConfig) -> dict:
    p = config.protocol
    return {
        "protocol": {
            "kind": p.kind,
            "num_spins": p.num_spins,
            "encoding": p.encoding,
            "decoder": p.decoder,
            "tie_break": p.tie_break,
        },
        "trials": config.trials,
        "seed": config.seed,
        "n_theta": config.n_theta,
        "n_phi": config.n_phi,
    }


def config_from_payload(payload: dict) -> RunConfig:
    proto = payload["protocol"]
    spec = ProtocolSpec(
        kind=proto["kind"],
        num_spins=proto["num_spins"],
        encoding=proto.get("encoding", "coherent"),
        decoder=proto.get("decoder", ""),
        tie_break=proto.get("tie_break", "random"),
    )
    return RunConfig(
        protocol=spec,
        trials=payload["trials"],
        seed=payload["seed"],
        n_theta=payload.get("n_theta"),
        n_phi=payload.get("n_phi"),
    )


def record_from_run(config: RunConfig, result: RunResult) -> ResultRecord:
    payload = {
        "estimates": result.estimates,
        "stderrs": result.stderrs,
        "trials": result.trials,
        "wall_time": result.wall_time,
    }
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return ResultRecord(
        schema_version=SCHEMA_VERSION,
        timestamp=stamp,
        config=config_payload(config),
        result=payload,
    )


def record_to_json(record: ResultRecord) -> str:
    body = {
        "schema_version": record.schema_version,
        "timestamp": record.timestamp,
        "config": record.config,
        "result": record.result,
    }
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def write_record(record: ResultRecord, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(record_to_json(record))


def read_record(path: str) -> ResultRecord:
    with open(path) as fh:
        body = json.load(fh)
    try:
        return ResultRecord(
            schema_version=body["schema_version"],
            timestamp=body["timestamp"],
            config=body["config"],
            result=body["result"],
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path} is not a result record ({exc})") from exc


# ----------------------------------------------------------- configuration


def load_settings(path: str) -> dict:
    """Read run settings from [protocol]/[run] key = value sections, or from
    the JSON equivalent {"protocol": {...}, "run": {...}}."""
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json") or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError(f"{path}: expected a JSON object")
        sections = [data.get("protocol", {}), data.get("run", {})]
    else:
        parser = configparser.ConfigParser()
        try:
            parser.read_string(text, source=path)
        except configparser.Error as exc:
            raise ValueError(str(exc)) from exc
        sections = [
            dict(parser[name]) for name in ("protocol", "run") if parser.has_section(name)
        ]
    settings: dict = {}
    for section in sections:
        for key, value in section.items():
            key = str(key).replace("-", "_")
            if key not in _KNOWN_KEYS:
                raise ValueError(f"unknown setting {key!r} in {path}")
            if key in _INT_KEYS and value is not None and not isinstance(value, int):
                try:
                    value = int(str(value), 10)
                except ValueError:
                    raise ValueError(f"{key} must be an integer, got {value!r}") from None
            settings[key] = value
    return settings


def build_run_config(settings: dict) -> RunConfig:
    missing = [k for k in ("kind", "num_spins", "trials", "seed") if settings.get(k) is None]
    if missing:
        raise ValueError("missing required settings: " + ", ".join(missing))
    spec = ProtocolSpec(
        kind=settings["kind"],
        num_spins=settings["num_spins"],
        encoding=settings.get("encoding") or "coherent",
        decoder=settings.get("decoder") or "",
        tie_break=settings.get("tie_break") or "random",
    )
    return RunConfig(
        protocol=spec,
        trials=settings["trials"],
        seed=settings["seed"],
        n_theta=settings.get("n_theta"),
        n_phi=settings.get("n_phi"),
        output_path=settings.get("output"),
    )


def _resolve_output(config: RunConfig, explicit) -> str:
    path = explicit or config.output_path
    if path:
        return path
    p = config.protocol
    name = f"{p.kind}-N{p.num_spins}-t{config.trials}-s{config.seed}.json"
    out_dir = os.environ.get(OUTPUT_DIR_VAR, ".")
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


# ----------------------------------------------------------------- checks


def _check_group_axioms() -> tuple:
    group, _ = dihedral_d3()
    group.validate()
    return f"order {group.order}: identity, inverses, associativity, classes", True


def _check_characters() -> tuple:
    group, irreps = dihedral_d3()
    sizes = np.array([len(c) for c in group.classes], dtype=float)
    chars = irreps.characters
    gram = (chars * sizes) @ chars.conj().T / group.order
    dev = float(np.max(np.abs(gram - np.eye(len(irreps.dims)))))
    return f"row orthogonality deviation = {dev:.3e}", dev < 1e-12


def _check_povm(povm) -> tuple:
    report = validate_povm(povm)
    detail = (
        f"|sum E - 1| = {report.max_completeness_dev:.3e}, "
        f"min eigenvalue = {report.min_eigenvalue:.3e}"
    )
    return detail, report.passed


def _check_projectors(num_qubits: int) -> tuple:
    projectors = [total_j_projector(num_qubits, j) for j in attainable_spins(num_qubits)]
    dim = 2**num_qubits
    dev = float(np.max(np.abs(sum(projectors) - np.eye(dim))))
    for k, p in enumerate(projectors):
        dev = max(dev, float(np.max(np.abs(p @ p - p))))
        for q in projectors[k + 1 :]:
            dev = max(dev, float(np.max(np.abs(p @ q))))
    return f"idempotence, orthogonality, completeness deviation = {dev:.3e}", dev < 1e-10


# --------------------------------------------------------------- commands


@click.group(name="spindir")
def cli():
    """Direction and frame transmission through spins: checks, covariant
    optima, Monte Carlo runs, and report tables."""


@cli.command("validate")
@click.option(
    "--break-quadrature",
    is_flag=True,
    help="Build the sampled direction measurement on a grid too coarse for its "
    "kernel; the completeness check must then fail.",
)
def cmd_validate(break_quadrature: bool):
    """Run the self-check suite and print one line per invariant."""
    j = SpinJ(4)
    if break_quadrature:
        grid = sphere_quadrature(2, 3)  # exact to degree 2 only; kernel needs 4
        sampled = _direction_povm_nodes(j, grid)
    else:
        sampled = covariant_direction_povm(j, sphere_quadrature(5, 9))
    checks = [
        ("group axioms", _check_group_axioms),
        ("character table", _check_characters),
        ("one-spin orbit POVM", lambda: _check_povm(d3_single_spin_povm())),
        ("two-spin orbit POVM", lambda: _check_povm(d3_two_spin_povm())),
        ("sampled direction POVM (spin 2)", lambda: _check_povm(sampled)),
        ("two-qubit spin projectors", lambda: _check_projectors(2)),
        ("three-qubit spin projectors", lambda: _check_projectors(3)),
    ]
    rows = []
    for name, fn in checks:
        try:
            detail, ok = fn()
        except (ValueError, RuntimeError) as exc:
            detail, ok = str(exc), False
        rows.append((name, detail, ok))
    width = max(len(name) for name, _, _ in rows)
    for name, detail, ok in rows:
        click.echo(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    failed = [name for name, _, ok in rows if not ok]
    if failed:
        click.echo(f"{len(failed)} of {len(rows)} checks failed: {', '.join(failed)}", err=True)
        raise _ExitStatus(1)
    click.echo(f"all {len(rows)} checks passed")


def _direction_table(num_spins, max_spins) -> list:
    if num_spins is not None and max_spins is not None:
        raise ValueError("give --num-spins or --max-spins, not both")
    if num_spins is not None:
        spin_counts = [num_spins]
    else:
        top = 24 if max_spins is None else max_spins
        if top < 2:
            raise ValueError("--max-spins must be at least 2")
        spin_counts = list(range(2, top + 1, 2))
    lines = [f"{'N':>4}  {'F':<18}{'1-F':<18}{'N^2(1-F)':<18}amplitudes"]
    for n in spin_counts:
        if n < 2 or n % 2:
            raise ValueError(
                f"N = {n}: the code carries integer blocks j = 0..N/2, "
                "so N must be a positive even number"
            )
        code = optimal_direction_encoding(SpinJ(n))
        amps = code.amplitudes
        shown = " ".join(f"{a:.4f}" for a in amps[:4]) + (" ..." if len(amps) > 4 else "")
        lines.append(
            f"{n:>4d}  {code.fidelity:<18.12g}{code.infidelity:<18.12g}"
            f"{n * n * code.infidelity:<18.12g}{shown}"
        )
    return lines


def _dihedral_profile(num_spins) -> list:
    n = 2 if num_spins is None else num_spins
    if n == 2:
        score = d3_covariant_two_spin_score()
        fidelity, coeffs = score.fidelity, score.coefficients
    elif n == 1:
        group, irreps = dihedral_d3()
        seed = StateVector(basis=ProductBasis(1), amplitudes=np.array([1.0, 0.0]))
        optimum = finite_group_optimum(build_signal_family(group, 1, seed, irreps))
        fidelity, coeffs = optimum.fidelity, optimum.optimal_coefficients
    else:
        raise ValueError("the dihedral profile is computed for 1 or 2 spins")
    return [
        f"dihedral six-signal task on {n} spin(s)",
        f"F = {fidelity:.12g}",
        f"1-F = {1.0 - fidelity:.12g}",
        "block coefficients (by block dimension): "
        + ", ".join(f"{c:.12g}" for c in coeffs),
    ]


@cli.command("optimize")
@click.argument("target", type=click.Choice(["direction", "dihedral"]))
@click.option("--num-spins", type=int, default=None, help="Single N (direction) or 1|2 (dihedral).")
@click.option("--max-spins", type=int, default=None, help="Direction rows for N = 2, 4, ... up to this value (default 24).")
@click.option("--out", "out_path", default=None, help="Also write the table to this file.")
def cmd_optimize(target, num_spins, max_spins, out_path):
    """Print covariant optima: the direction-code table or the dihedral profile."""
    if target == "direction":
        lines = _direction_table(num_spins, max_spins)
    else:
        if max_spins is not None:
            raise ValueError("--max-spins applies to the direction table only")
        lines = _dihedral_profile(num_spins)
    text = "\n".join(lines) + "\n"
    click.echo(text, nl=False)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)


@cli.command("simulate")
@click.option("--config", "config_path", default=None, help="Settings file: [protocol]/[run] key = value sections, or JSON.")
@click.option("--kind", type=click.Choice(list(PROTOCOL_KINDS)), default=None)
@click.option("--num-spins", type=int, default=None)
@click.option("--encoding", default=None)
@click.option("--decoder", default=None)
@click.option("--tie-break", default=None)
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--n-theta", type=int, default=None)
@click.option("--n-phi", type=int, default=None)
@click.option("--output", "output", default=None, help="Record path (default: derived name in $SPINDIR_OUTPUT_DIR).")
def cmd_simulate(config_path, **flags):
    """Run one seeded experiment and persist its result record."""
    settings = load_settings(config_path) if config_path else {}
    for key, value in flags.items():
        if value is not None:
            settings[key] = value
    config = build_run_config(settings)
    result = run_experiment(config)
    record = record_from_run(config, result)
    path = _resolve_output(config, settings.get("output"))
    write_record(record, path)

    p = config.protocol
    est, err = result.estimates, result.stderrs
    line = (
        f"{p.kind} N={p.num_spins} {p.encoding}/{p.decoder} "
        f"trials={config.trials} seed={config.seed}: "
        f"fidelity {est['fidelity']:.6f} +- {err['fidelity']:.6f}"
    )
    ref = reference_score(config)
    if ref is not None:
        line += f" ({ref.method} reference {ref.fidelity:.6f})"
    click.echo(line)
    if "per_axis" in est:
        pairs = ", ".join(
            f"{v:.6f} +- {e:.6f}" for v, e in zip(est["per_axis"], err["per_axis"])
        )
        click.echo(f"per-axis infidelity: {pairs}")
    if "naive_failures" in est:
        click.echo(f"estimator clamps (|sin phi| > 1): {est['naive_failures']} of {config.trials}")
    click.echo(f"wrote {path}")


def _format_cell(value) -> str:
    return "" if value is None else f"{value:.12g}"


def _report_row(record: ResultRecord) -> list:
    proto = record.config["protocol"]
    est = record.result["estimates"]
    err = record.result["stderrs"]
    per_axis = est.get("per_axis")
    per_axis_mean = float(np.mean(per_axis)) if per_axis else None
    n = proto["num_spins"]
    return [
        proto["kind"],
        str(n),
        proto["encoding"],
        proto["decoder"],
        str(record.config["trials"]),
        str(record.config["seed"]),
        _format_cell(est["fidelity"]),
        _format_cell(err["fidelity"]),
        _format_cell(per_axis_mean),
        _format_cell(n * n * est["infidelity"]),
    ]


def _csv_report(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for record in records:
        writer.writerow(_report_row(record))
    return buf.getvalue()


def _json_report(records) -> str:
    body = [
        {
            "schema_version": r.schema_version,
            "timestamp": r.timestamp,
            "config": r.config,
            "result": r.result,
        }
        for r in records
    ]
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


@cli.command("report")
@click.argument("records", nargs=-1)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", "out_path", default=None, help="Write here instead of stdout.")
def cmd_report(records, fmt, out_path):
    """Tabulate result records as plot-ready CSV or JSON."""
    if not records:
        raise click.UsageError("no input records given")
    loaded = [read_record(path) for path in records]
    versions = sorted({r.schema_version for r in loaded})
    if len(versions) > 1:
        raise ValueError(f"records mix schema versions {versions}")
    text = _csv_report(loaded) if fmt == "csv" else _json_report(loaded)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text, nl=False)


def main(argv=None) -> int:
    """Entry point mapping failures to the documented exit codes."""
    try:
        cli.main(args=argv, prog_name="spindir", standalone_mode=False)
    except _ExitStatus as exc:
        return exc.code
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
