"""Configuration-driven command line runner.

``lindgrain run <config.json>`` executes the listed tasks in order and
writes one result file per task; ``lindgrain sweep <config.json>`` runs
only the sweep tasks; ``lindgrain validate <config.json>`` checks the
configuration and exits.  Exit codes: 0 success, 1 configuration or
validation error, 2 numerical failure.

The configuration is a single JSON document::

    {
      "model": "two_qubit" | "tunnelling" | "custom",
      "params": { ... model parameters ... },
      "mode": {"kind": "full_secular"}
              | {"kind": "partial_secular", "omega_cut": 1.0}
              | {"kind": "exact", "dt": 50.0},
      "flags": {"flattened_occupations": false, "include_energy_shift": false},
      "tasks": [ {"type": "gamma"}, {"type": "steady"}, {"type": "current"},
                 {"type": "evolve", "t_max": 100.0, "n_points": 11,
                  "rho0": "ground" | "excited" | "maximally_mixed" | "gibbs"
                          | [[..[re, im]..], ..]},
                 {"type": "sweep", "variable": "coupling", "grid": [..]} ],
      "output_dir": "out"
    }

Complex matrix entries are written as [re, im] pairs.  Sweep variables
accept both the symbolic names (Omega, gamma, dt, T_h, T_c, T_l, T_r)
and their parameter aliases; sweep rows are emitted as CSV with a '#'
units comment, single results as JSON.  All floating-point output uses a
fixed 17-significant-digit scientific format so that re-running a config
byte-reproduces every file.  The LINDGRAIN_OUT environment variable
overrides the configured output directory; the --out flag wins over the
environment.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linalg import NumericalFailureError, hermitian_eig
from .bath import (BathSpec, Exact, FullSecular, PartialSecular,
                   gamma_exact, gamma_limit, build_gamma_matrix)
from .bohr import bohr_decompose
from .lindblad import SystemModel, assemble_liouvillian
from .dynamics import evolve, gibbs_state, heat_current, steady_state
from .models import two_qubit, tunnelling

__all__ = ["main", "cmd_run", "cmd_sweep", "cmd_validate", "load_config", "RunConfig"]


class ConfigError(Exception):
    """Configuration is malformed or inconsistent; maps to exit code 1."""


# ----------------------------------------------------------------------
# Fixed-format serialization
# ----------------------------------------------------------------------

def _fmt(x: float) -> str:
    """17-significant-digit scientific notation used for every float."""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(float(x), ".16e")


def _dump_json(obj, indent: int = 0) -> str:
    """Deterministic JSON text with fixed float formatting."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  "{key}": {_dump_json(value, indent + 1)}'
                 for key, value in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_fmt(v) if isinstance(v, float) else str(v)
                                   for v in obj) + "]"
        items = [f"{pad}  {_dump_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, int):
        return str(obj)
    if obj is None:
        return "null"
    return json.dumps(obj)


def _matrix_pairs(m: np.ndarray) -> list:
    """Complex matrix as nested [re, im] pairs."""
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m, complex)]


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _write_csv(path: str, units_comment: str, header: list, rows: list):
    lines = [f"# {units_comment}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _write_text(path, "\n".join(lines) + "\n")


# ----------------------------------------------------------------------
# Configuration
# ----------------------------------------------------------------------

_TWO_QUBIT_KEYS = ("omega_s", "coupling", "gamma_h", "gamma_c", "t_hot", "t_cold")
_TUNNELLING_KEYS = ("omega_s", "tunnel", "gamma", "t_left", "t_right")

#: Sweep variable aliases -> canonical parameter name per model.
_SWEEP_ALIASES = {
    "Omega": "coupling", "omega": "coupling", "coupling": "coupling", "tunnel": "coupling",
    "gamma": "gamma", "dt": "dt", "Delta_t": "dt",
    "T_h": "t_hot", "t_hot": "t_hot", "T_c": "t_cold", "t_cold": "t_cold",
    "T_l": "t_left", "t_left": "t_left", "T_r": "t_right", "t_right": "t_right",
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration."""

    model_kind: str
    params: dict
    mode: object
    tasks: tuple
    output_dir: str
    flattened_occupations: bool = False
    include_energy_shift: bool = False


def _require(condition: bool, where: str, message: str):
    if not condition:
        raise ConfigError(f"{where}: {message}")


def _parse_complex_matrix(raw, where: str) -> np.ndarray:
    _require(isinstance(raw, list) and raw, where, "expected a nonempty matrix")
    n = len(raw)
    out = np.zeros((n, len(raw[0])), dtype=complex)
    for i, row in enumerate(raw):
        _require(isinstance(row, list) and len(row) == out.shape[1],
                 f"{where}[{i}]", "ragged matrix rows")
        for j, cell in enumerate(row):
            if isinstance(cell, (int, float)) and not isinstance(cell, bool):
                out[i, j] = float(cell)
            elif (isinstance(cell, list) and len(cell) == 2
                  and all(isinstance(v, (int, float)) for v in cell)):
                out[i, j] = complex(cell[0], cell[1])
            else:
                raise ConfigError(f"{where}[{i}][{j}]: entries must be numbers "
                                  "or [re, im] pairs")
    return out


def _parse_mode(raw, where: str):
    _require(isinstance(raw, dict) and "kind" in raw, where,
             'expected an object with a "kind" field')
    kind = raw["kind"]
    try:
        if kind == "full_secular":
            return FullSecular()
        if kind == "partial_secular":
            return PartialSecular(float(raw.get("omega_cut", float("nan"))))
        if kind == "exact":
            _require("dt" in raw, where, 'exact mode needs "dt"')
            return Exact(float(raw["dt"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: unknown mode kind {kind!r}")


def load_config(path: str) -> RunConfig:
    """Parse and validate a configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc

    _require(isinstance(raw, dict), path, "top level must be an object")
    unknown = set(raw) - {"model", "params", "mode", "tasks", "output_dir", "flags"}
    _require(not unknown, path, f"unknown top-level keys {sorted(unknown)}")

    model_kind = raw.get("model")
    _require(model_kind in ("two_qubit", "tunnelling", "custom"), "model",
             f"must be two_qubit, tunnelling or custom, got {model_kind!r}")
    params = raw.get("params", {})
    _require(isinstance(params, dict), "params", "must be an object")

    mode_raw = raw.get("mode", {"kind": "full_secular"})
    mode = _parse_mode(mode_raw, "mode")

    flags = raw.get("flags", {})
    _require(isinstance(flags, dict), "flags", "must be an object")
    unknown = set(flags) - {"flattened_occupations", "include_energy_shift"}
    _require(not unknown, "flags", f"unknown flags {sorted(unknown)}")

    tasks = raw.get("tasks")
    _require(isinstance(tasks, list) and tasks, "tasks",
             "must be a nonempty list of task objects")
    for k, task in enumerate(tasks):
        _require(isinstance(task, dict) and "type" in task, f"tasks[{k}]",
                 'each task needs a "type"')
        kind = task["type"]
        _require(kind in ("gamma", "steady", "current", "evolve", "sweep"),
                 f"tasks[{k}]", f"unknown task type {kind!r}")
        if kind == "evolve":
            _require("t_max" in task and float(task["t_max"]) > 0, f"tasks[{k}]",
                     "evolve needs t_max > 0")
            _require(int(task.get("n_points", 0)) >= 2, f"tasks[{k}]",
                     "evolve needs n_points >= 2")
        if kind == "sweep":
            variable = task.get("variable")
            _require(variable in _SWEEP_ALIASES, f"tasks[{k}]",
                     f"unknown sweep variable {variable!r} "
                     f"(expected one of {sorted(set(_SWEEP_ALIASES))})")
            grid = task.get("grid")
            _require(isinstance(grid, list) and grid, f"tasks[{k}]",
                     "sweep needs a nonempty grid")
            _require(all(isinstance(v, (int, float)) and math.isfinite(v) for v in grid),
                     f"tasks[{k}]", "grid values must be finite numbers")
            _require(model_kind != "custom", f"tasks[{k}]",
                     "sweeps apply to the built-in models only")

    config = RunConfig(
        model_kind=model_kind,
        params=params,
        mode=mode,
        tasks=tuple(tasks),
        output_dir=str(raw.get("output_dir", "lindgrain_out")),
        flattened_occupations=bool(flags.get("flattened_occupations", False)),
        include_energy_shift=bool(flags.get("include_energy_shift", False)),
    )
    build_model(config)        # surface parameter errors at validation time
    return config


def _model_params(config: RunConfig, overrides: dict | None = None):
    params = dict(config.params)
    if overrides:
        params.update(overrides)
    if config.model_kind == "two_qubit":
        missing = [k for k in _TWO_QUBIT_KEYS if k not in params]
        _require(not missing, "params", f"two_qubit needs {missing}")
        try:
            return two_qubit.TwoQubitParams(**{k: float(params[k]) for k in _TWO_QUBIT_KEYS})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"params: {exc}") from exc
    missing = [k for k in _TUNNELLING_KEYS if k not in params]
    _require(not missing, "params", f"tunnelling needs {missing}")
    try:
        return tunnelling.TunnellingParams(**{k: float(params[k]) for k in _TUNNELLING_KEYS})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"params: {exc}") from exc


def build_model(config: RunConfig, overrides: dict | None = None,
                mode=None) -> SystemModel:
    """Instantiate the SystemModel described by the configuration."""
    mode = config.mode if mode is None else mode
    if isinstance(mode, PartialSecular) and math.isnan(mode.omega_cut):
        mode = PartialSecular(_default_cut(config, overrides))
    if config.model_kind == "custom":
        _require(not isinstance(mode, Exact) or _all_ohmic(config), "mode",
                 "exact mode needs ohmic couplings")
        return _build_custom(config, mode)
    _require(not isinstance(mode, Exact), "mode",
             "exact mode needs ohmic couplings; built-in models use flat baths "
             "(define a custom model instead)")
    p = _model_params(config, overrides)
    if config.model_kind == "two_qubit":
        return two_qubit.build_two_qubit(p, mode, config.flattened_occupations)
    return tunnelling.build_tunnelling(p, mode, config.flattened_occupations)


def _default_cut(config: RunConfig, overrides: dict | None = None) -> float:
    if config.model_kind == "custom":
        raise ConfigError("mode: partial_secular needs an explicit omega_cut "
                          "for custom models")
    return float(_model_params(config, overrides).omega_s)


def _all_ohmic(config: RunConfig) -> bool:
    couplings = config.params.get("couplings", [])
    return bool(couplings) and all(c.get("spectral") == "ohmic" for c in couplings)


def _build_custom(config: RunConfig, mode) -> SystemModel:
    params = config.params
    _require("hamiltonian" in params, "params", 'custom model needs "hamiltonian"')
    h = _parse_complex_matrix(params["hamiltonian"], "params.hamiltonian")
    raw_couplings = params.get("couplings")
    _require(isinstance(raw_couplings, list) and raw_couplings, "params.couplings",
             "custom model needs a nonempty coupling list")
    couplings = []
    for k, item in enumerate(raw_couplings):
        where = f"params.couplings[{k}]"
        _require(isinstance(item, dict), where, "must be an object")
        _require("operator" in item, where, 'needs "operator"')
        op = _parse_complex_matrix(item["operator"], where + ".operator")
        try:
            bath = BathSpec(
                temperature=float(item.get("temperature", 0.0)),
                rate=float(item.get("rate", 0.0)),
                label=str(item.get("label", f"bath{k}")),
                spectral=str(item.get("spectral", "flat")),
                eta=float(item.get("eta", 1.0)),
                cutoff=float(item.get("cutoff", 10.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        couplings.append((op, bath))
    try:
        return SystemModel(hamiltonian=h, couplings=tuple(couplings), mode=mode,
                           include_energy_shift=config.include_energy_shift)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"params: {exc}") from exc


# ----------------------------------------------------------------------
# Task execution
# ----------------------------------------------------------------------

def _current_labels(model: SystemModel) -> tuple[str, str]:
    labels = model.labels
    if len(labels) < 2:
        raise ConfigError("current: the model has fewer than two reservoirs")
    if "hot" in labels and "cold" in labels:
        return "hot", "cold"
    if "left" in labels and "right" in labels:
        return "left", "right"
    return labels[0], labels[1]


def _initial_state(spec, model: SystemModel) -> np.ndarray:
    d = model.dim
    if isinstance(spec, list):
        rho = _parse_complex_matrix(spec, "tasks.evolve.rho0")
        _require(rho.shape == (d, d), "tasks.evolve.rho0",
                 f"expected a {d}x{d} matrix")
        return rho
    w, v = hermitian_eig(model.hamiltonian)
    if spec == "ground":
        return np.outer(v[:, 0], v[:, 0].conj())
    if spec == "excited":
        return np.outer(v[:, -1], v[:, -1].conj())
    if spec == "maximally_mixed":
        return np.eye(d) / d
    if spec == "gibbs":
        temperature = max(bath.temperature for _, bath in model.couplings)
        _require(temperature > 0, "tasks.evolve.rho0", "gibbs needs a bath with T > 0")
        return gibbs_state(model.hamiltonian, temperature)
    raise ConfigError(f"tasks.evolve.rho0: unknown initial state {spec!r}")


def _task_gamma(config: RunConfig, model: SystemModel, path: str):
    report = {}
    for x, bath in model.couplings:
        dec = bohr_decompose(model.hamiltonian, x, freq_tol=model.freq_tol)
        g = build_gamma_matrix(dec, bath, model.mode,
                               flatten_at=model.flatten_occupations_at)
        report[bath.label] = {
            "indices": list(g.indices),
            "frequencies": [dec.frequency(m) for m in g.indices],
            "entries": _matrix_pairs(g.entries),
            "min_eigenvalue": g.min_eigenvalue(),
            "zero_block_excluded": g.zero_block_excluded,
        }
    _write_text(path, _dump_json({"gamma": report, "mode": _mode_doc(config.mode)}) + "\n")


def _mode_doc(mode) -> dict:
    if isinstance(mode, Exact):
        return {"kind": "exact", "dt": mode.dt}
    if isinstance(mode, PartialSecular):
        return {"kind": "partial_secular", "omega_cut": mode.omega_cut}
    return {"kind": "full_secular"}


def _task_steady(config: RunConfig, model: SystemModel, path: str):
    result = steady_state(assemble_liouvillian(model))
    w, v = hermitian_eig(model.hamiltonian)
    populations = np.real(np.diag(v.conj().T @ result.rho @ v))
    _write_text(path, _dump_json({
        "rho": _matrix_pairs(result.rho),
        "multiplicity": result.multiplicity,
        "residual": result.residual,
        "energy_basis_populations": [float(p) for p in populations],
        "energies": [float(x) for x in w],
    }) + "\n")


def _task_current(config: RunConfig, model: SystemModel, path: str):
    hot, cold = _current_labels(model)
    result = steady_state(assemble_liouvillian(model))
    report = heat_current(model, result.rho, hot, cold)
    _write_text(path, _dump_json({
        "per_reservoir": {k: float(v) for k, v in sorted(report.per_reservoir.items())},
        "net": report.net,
        "net_convention": f"J({hot}) - J({cold})",
        "balance_defect": report.balance_defect(),
    }) + "\n")


def _task_evolve(config: RunConfig, model: SystemModel, task: dict, path: str):
    rho0 = _initial_state(task.get("rho0", "ground"), model)
    grid = np.linspace(0.0, float(task["t_max"]), int(task["n_points"]))
    states = evolve(assemble_liouvillian(model), rho0, grid)
    d = model.dim
    header = ["t"]
    for i in range(d):
        for j in range(d):
            header += [f"rho_{i}{j}_re", f"rho_{i}{j}_im"]
    rows = []
    for t, rho in zip(grid, states):
        row = [t]
        for i in range(d):
            for j in range(d):
                row += [rho[i, j].real, rho[i, j].imag]
        rows.append(row)
    _write_csv(path, "t in 1/omega_ref; rho entries dimensionless", header, rows)


# -- sweeps ------------------------------------------------------------

def _sweep_overrides(config: RunConfig, canonical: str, value: float) -> dict:
    if canonical == "coupling":
        key = "coupling" if config.model_kind == "two_qubit" else "tunnel"
        return {key: value}
    if canonical == "gamma":
        if config.model_kind == "tunnelling":
            return {"gamma": value}
        # scale both nonzero qubit rates; zero rates stay decoupled
        out = {}
        for key in ("gamma_h", "gamma_c"):
            if float(config.params.get(key, 0.0)) > 0.0:
                out[key] = value
        _require(bool(out), "sweep", "gamma sweep needs at least one nonzero rate")
        return out
    if canonical in ("t_hot", "t_cold", "t_left", "t_right"):
        expected = _TWO_QUBIT_KEYS if config.model_kind == "two_qubit" else _TUNNELLING_KEYS
        _require(canonical in expected, "sweep",
                 f"variable {canonical!r} does not apply to {config.model_kind}")
        return {canonical: value}
    raise ConfigError(f"sweep: variable {canonical!r} not handled here")


def _sweep_cell(config: RunConfig, canonical: str, value: float) -> list:
    """One sweep row; used directly and through the process pool."""
    if canonical == "dt":
        return _dt_cell(config, value)
    overrides = _sweep_overrides(config, canonical, value)
    p = _model_params(config, overrides)
    cut = (config.mode.omega_cut if isinstance(config.mode, PartialSecular)
           and not math.isnan(config.mode.omega_cut) else float(p.omega_s))
    row = [value]
    currents_defined = True
    if config.model_kind == "two_qubit" and p.single_reservoir:
        currents_defined = False
    for mode in (FullSecular(), PartialSecular(cut)):
        model = build_model(config, overrides, mode=mode)
        result = steady_state(assemble_liouvillian(model))
        if currents_defined:
            hot, cold = _current_labels(model)
            row.append(heat_current(model, result.rho, hot, cold).net)
        if isinstance(mode, PartialSecular) and config.model_kind == "two_qubit":
            rho_eig = two_qubit.to_eigenbasis(result.rho)
            lv = two_qubit.LEVELS
            row.append(float((rho_eig[lv["+"], lv["-"]] + rho_eig[lv["-"], lv["+"]]).real))
    return row


def _dt_cell(config: RunConfig, dt_value: float) -> list:
    params = config.params
    omega = float(params.get("omega_s", 1.0))
    bath = BathSpec(
        temperature=float(params.get("temperature", 0.0)),
        rate=float(params.get("rate", 1.0)),
        label="scan",
        spectral="ohmic",
        eta=float(params.get("eta", 1.0)),
        cutoff=float(params.get("cutoff", 20.0)),
    )
    exact = gamma_exact(omega, omega, dt_value, bath)
    limit = gamma_limit(omega, omega, bath, PartialSecular(math.inf))
    return [dt_value, abs(exact - limit)]


def _sweep_header(config: RunConfig, canonical: str) -> tuple[str, list]:
    if canonical == "dt":
        return ("dt in 1/omega_ref; deviation |gamma_exact - gamma_limit| in rate units",
                ["dt", "gamma_deviation"])
    header = [canonical]
    comment = f"{canonical} and currents in reference-frequency units"
    single = (config.model_kind == "two_qubit"
              and _model_params(config).single_reservoir)
    if not single:
        header += ["j_full_secular", "j_partial_secular"]
    if config.model_kind == "two_qubit":
        header += ["p0_partial_secular"]
    return comment, header


def _task_sweep(config: RunConfig, task: dict, path: str, jobs: int):
    canonical = _SWEEP_ALIASES[task["variable"]]
    grid = [float(v) for v in task["grid"]]
    if jobs > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_cell, [config] * len(grid),
                                 [canonical] * len(grid), grid))
    else:
        rows = [_sweep_cell(config, canonical, value) for value in grid]
    comment, header = _sweep_header(config, canonical)
    _write_csv(path, comment, header, rows)


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------

def _output_dir(config: RunConfig, args) -> str:
    out = config.output_dir
    env = os.environ.get("LINDGRAIN_OUT")
    if env:
        out = env
    if args.out:
        out = args.out
    os.makedirs(out, exist_ok=True)
    return out


def _execute(config: RunConfig, args, only_sweeps: bool) -> int:
    out = _output_dir(config, args)
    tasks = [(k, t) for k, t in enumerate(config.tasks)
             if not only_sweeps or t["type"] == "sweep"]
    if only_sweeps and not tasks:
        raise ConfigError("tasks: sweep command needs at least one sweep task")
    needs_model = any(t["type"] != "sweep" for _, t in tasks)
    model = build_model(config) if needs_model else None
    for k, task in tasks:
        kind = task["type"]
        suffix = "csv" if kind in ("evolve", "sweep") else "json"
        path = os.path.join(out, f"task_{k:02d}_{kind}.{suffix}")
        if kind == "gamma":
            _task_gamma(config, model, path)
        elif kind == "steady":
            _task_steady(config, model, path)
        elif kind == "current":
            _task_current(config, model, path)
        elif kind == "evolve":
            _task_evolve(config, model, task, path)
        else:
            _task_sweep(config, task, path, args.jobs)
        print(f"wrote {path}")
    return 0


def cmd_run(args) -> int:
    config = load_config(args.config)
    return _execute(config, args, only_sweeps=False)


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    return _execute(config, args, only_sweeps=True)


def cmd_validate(args) -> int:
    load_config(args.config)
    print(f"{args.config}: OK")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lindgrain",
        description="Coarse-grained Lindblad master equations: build, solve, sweep.")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes for sweep grids (default 1, deterministic)")
    parser.add_argument("--out", default=None, help="override the output directory")
    parser.add_argument("--seedless", action="store_true",
                        help="assert that no task uses randomness (always true; "
                             "reserved for stochastic extensions)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler in (("run", cmd_run), ("sweep", cmd_sweep), ("validate", cmd_validate)):
        p = sub.add_parser(name)
        p.add_argument("config")
        p.set_defaults(handler=handler)
    args = parser.parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 1
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
