"""Command-line interface: config ingestion, dispatch, CSV/JSON export.

Commands::

    floqdyn simulate --config run.json [--preset NAME] [--set k=v ...] [--out DIR]
    floqdyn floquet  --config run.json ...
    floqdyn compare  --config cmp.json ...
    floqdyn sweep    --config sweep.json ...

Configs are JSON, validated against a strict schema (unknown keys are
rejected) before any computation.  Exit codes: 0 success, 2 configuration
error, 3 numerical error.  CSV output uses 17-significant-digit floats,
'\\n' line endings, and a '.' decimal separator.
"""

import argparse
import copy
import json
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from pathlib import Path

import jsonschema
import numpy as np

from .baths import BathSpec, LambIntegralParams, OhmicSpec
from .errors import ConfigError, FloqdynError, NumericalError
from .floquet import DriveSpec, benchmark_fidelities
from .operators import trace_distance
from .scenarios import (
    PRESETS,
    ScenarioConfig,
    build_generator,
    decompose_scenario,
    efficiency,
    evolve,
    trajectory_diagnostics,
)

FLOAT_FMT = "%.17g"

_LAMB_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "w_cutoff": {"type": "number"},
        "quadrature_points": {"type": "integer"},
        "pv_window": {"type": "number"},
    },
}

_SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "label": {"type": "string"},
        "energies": {"type": "array", "items": {"type": "number"}},
        "target_level": {"type": "integer"},
        "kind": {"enum": ["lindblad", "floquet_lindblad", "redfield", "floquet_redfield"]},
        "lamb_shift": {"type": "boolean"},
        "q_max": {"type": "integer"},
        "initial_level": {"type": "integer"},
        "grid_m": {"type": "integer"},
        "period_nodes": {"type": "integer"},
        "substeps": {"type": "integer"},
        "dt": {"type": ["number", "null"]},
        "drive": {
            "type": ["object", "null"],
            "additionalProperties": False,
            "properties": {
                "mu": {"type": "number"},
                "omega": {"type": "number"},
                "pair": {"type": "array", "items": {"type": "integer"},
                         "minItems": 2, "maxItems": 2},
            },
            "required": ["mu", "omega", "pair"],
        },
        "baths": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "beta": {"type": "number"},
                    "j0": {"type": "number"},
                    "omega_cutoff": {"type": "number"},
                    "transitions": {"type": "array",
                                    "items": {"type": "array", "items": {"type": "integer"},
                                              "minItems": 2, "maxItems": 2}},
                },
                "required": ["name", "beta", "j0", "omega_cutoff", "transitions"],
            },
        },
        "lamb_params": _LAMB_SCHEMA,
    },
}

_INTEGRATION_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "dt": {"type": ["number", "null"]},
        "t_final": {"type": "number"},
        "stride": {"type": ["integer", "null"]},
    },
    "required": ["t_final"],
}

_OUTPUTS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "path": {"type": ["string", "null"]},
        "formats": {"type": "array", "items": {"enum": ["csv", "json"]}},
    },
}

RUN_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "scenario": _SCENARIO_SCHEMA,
        "integration": _INTEGRATION_SCHEMA,
        "outputs": _OUTPUTS_SCHEMA,
    },
    "required": ["scenario", "integration"],
}

COMPARE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "a": _SCENARIO_SCHEMA,
        "b": _SCENARIO_SCHEMA,
        "integration": _INTEGRATION_SCHEMA,
        "metric": {"enum": ["eta_series", "trace_distance"]},
        "outputs": _OUTPUTS_SCHEMA,
    },
    "required": ["a", "b", "integration"],
}

# the base run is validated in canonical form per grid point, so the raw
# sweep schema only constrains the sweep-level structure
SWEEP_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "base": {"type": "object"},
        "axes": {"type": "object",
                 "additionalProperties": {"type": "array", "minItems": 1}},
        "parallelism": {"type": "integer", "minimum": 1},
        "outputs": _OUTPUTS_SCHEMA,
    },
    "required": ["base", "axes"],
}


# ---------------------------------------------------------------------------
# scenario <-> dict


def scenario_to_dict(config: ScenarioConfig) -> dict:
    """Canonical, fully expanded JSON form of a scenario."""
    return {
        "label": config.label,
        "energies": list(config.energies),
        "target_level": config.target_level,
        "kind": config.kind,
        "lamb_shift": config.lamb_shift,
        "q_max": config.q_max,
        "initial_level": config.initial_level,
        "grid_m": config.grid_m,
        "period_nodes": config.period_nodes,
        "substeps": config.substeps,
        "dt": config.dt,
        "drive": None if config.drive is None else {
            "mu": config.drive.mu,
            "omega": config.drive.omega_drive,
            "pair": list(config.drive.pair),
        },
        "baths": [
            {
                "name": b.name,
                "beta": b.beta,
                "j0": b.spectral.j0,
                "omega_cutoff": b.spectral.omega_cutoff,
                "transitions": [list(t) for t in b.transitions],
            }
            for b in config.baths
        ],
        "lamb_params": {
            "w_cutoff": config.lamb_params.w_cutoff,
            "quadrature_points": config.lamb_params.quadrature_points,
            "pv_window": config.lamb_params.pv_window,
        },
    }


def scenario_from_dict(data: dict) -> ScenarioConfig:
    """Build a scenario from its canonical dict (or preset + overrides)."""
    data = canonical_scenario_dict(data)
    drive = None
    if data["drive"] is not None:
        drive = DriveSpec(mu=data["drive"]["mu"], omega_drive=data["drive"]["omega"],
                          pair=tuple(data["drive"]["pair"]))
    baths = tuple(
        BathSpec(name=b["name"], beta=b["beta"],
                 spectral=OhmicSpec(b["j0"], b["omega_cutoff"]),
                 transitions=tuple(tuple(t) for t in b["transitions"]))
        for b in data["baths"]
    )
    lp = data["lamb_params"]
    try:
        return ScenarioConfig(
            label=data["label"],
            energies=tuple(data["energies"]),
            target_level=data["target_level"],
            baths=baths,
            kind=data["kind"],
            drive=drive,
            lamb_shift=data["lamb_shift"],
            q_max=data["q_max"],
            lamb_params=LambIntegralParams(**lp),
            initial_level=data["initial_level"],
            grid_m=data["grid_m"],
            period_nodes=data["period_nodes"],
            substeps=data["substeps"],
            dt=data["dt"],
        )
    except FloqdynError as exc:
        raise ConfigError(str(exc)) from exc


def _deep_merge(base: dict, override: dict) -> dict:
    """Recursively merge override into base (dicts merge, scalars replace)."""
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def canonical_scenario_dict(data: dict) -> dict:
    """Expand a preset reference into the canonical full form."""
    data = copy.deepcopy(data)
    preset = data.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset!r}; available: {sorted(PRESETS)}")
        return _deep_merge(scenario_to_dict(PRESETS[preset]()), data)
    required = ("energies", "target_level", "kind", "baths")
    missing = [k for k in required if k not in data]
    if missing:
        raise ConfigError(f"scenario missing required keys: {missing}")
    defaults = {
        "label": "custom", "lamb_shift": True, "q_max": 0, "initial_level": 0,
        "grid_m": 1024, "period_nodes": 256, "substeps": 16, "dt": None,
        "drive": None,
        "lamb_params": {"w_cutoff": 4.0e4, "quadrature_points": 96, "pv_window": 0.1},
    }
    for key, val in defaults.items():
        data.setdefault(key, val)
    lp_defaults = defaults["lamb_params"]
    for key, val in lp_defaults.items():
        data["lamb_params"].setdefault(key, val)
    return data


def canonical_run_dict(data: dict) -> dict:
    data = copy.deepcopy(data)
    data["scenario"] = canonical_scenario_dict(data["scenario"])
    data.setdefault("outputs", {})
    data["outputs"].setdefault("path", None)
    data["outputs"].setdefault("formats", ["csv", "json"])
    data["integration"].setdefault("dt", None)
    data["integration"].setdefault("stride", None)
    return data


# ---------------------------------------------------------------------------
# config loading and --set overrides


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data: dict, pairs: list[str]) -> dict:
    """Apply dotted-path key=value overrides onto a config dict."""
    data = copy.deepcopy(data)
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        path, _, raw = pair.partition("=")
        keys = path.split(".")
        node = data
        for key in keys[:-1]:
            if not isinstance(node, dict):
                raise ConfigError(f"--set path {path!r} does not resolve to a config entry")
            node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set path {path!r} does not resolve to a config entry")
        node[keys[-1]] = _parse_value(raw)
    return data


def load_config(path: str | None, preset: str | None, overrides: list[str],
                default: dict | None = None) -> dict:
    """Read the raw JSON config and apply --preset / --set flags."""
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    elif default is not None:
        data = copy.deepcopy(default)
    else:
        raise ConfigError("--config is required")
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    if preset is not None:
        data.setdefault("scenario", {})
        if not isinstance(data["scenario"], dict):
            raise ConfigError("scenario section must be an object")
        data["scenario"]["preset"] = preset
    if overrides:
        data = apply_overrides(data, overrides)
    return data


def validate_schema(data: dict, schema: dict) -> dict:
    """Strict JSON-schema check; unknown keys are rejected."""
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema violation: {exc.message}") from exc
    return data


# ---------------------------------------------------------------------------
# output helpers


def _fmt(value: float) -> str:
    return FLOAT_FMT % value


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _json_matrix(m: np.ndarray) -> dict:
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def trajectory_rows(traj, eta_cumulative):
    d = traj.dim
    for k in range(len(traj.times)):
        row = [float(traj.times[k])]
        for i in range(d):
            for j in range(i, d):
                row.append(float(traj.states[k, i, j].real))
                row.append(float(traj.states[k, i, j].imag))
        row.append(float(eta_cumulative[k]))
        yield row


def trajectory_header(d: int) -> list[str]:
    header = ["t"]
    for i in range(d):
        for j in range(i, d):
            header += [f"rho_{i}{j}_re", f"rho_{i}{j}_im"]
    header.append("eta_cumulative")
    return header


# ---------------------------------------------------------------------------
# commands


def _run_trajectory(run: dict):
    config = scenario_from_dict(run["scenario"])
    integ = run["integration"]
    traj = evolve(config, t_final=integ["t_final"], dt=integ.get("dt"),
                  stride=integ.get("stride"))
    report = efficiency(traj)
    return config, traj, report


def cmd_simulate(run: dict, out_dir: Path) -> int:
    config, traj, report = _run_trajectory(run)
    diag = trajectory_diagnostics(traj)
    formats = run["outputs"]["formats"]
    if "csv" in formats:
        write_csv(out_dir / "trajectory.csv", trajectory_header(traj.dim),
                  trajectory_rows(traj, report.cumulative))
    if "json" in formats:
        write_json(out_dir / "summary.json", {
            "label": config.label,
            "kind": config.kind,
            "eta": report.eta,
            "t_final": report.t_final,
            "final_state": _json_matrix(traj.final_state()),
            "final_populations": traj.populations[-1].tolist(),
            "diagnostics": {
                "min_eigenvalue": diag.min_eigenvalue,
                "max_trace_error": diag.max_trace_error,
                "stationarity": diag.stationarity,
                "warnings": list(traj.warnings_issued),
            },
        })
    return 0


def cmd_floquet(run: dict, out_dir: Path) -> int:
    config = scenario_from_dict(run["scenario"])
    if config.drive is None:
        raise ConfigError("floquet command requires a scenario with a drive")
    decomp = decompose_scenario(config)
    from .scenarios import scenario_with

    # the per-channel Lamb matrices are defined by the secular construction
    # regardless of which generator kind the scenario runs with
    gen = build_generator(scenario_with(config, kind="floquet_lindblad"),
                          decomposition=decomp)
    gaps = sorted({round(float(ea - eb), 10)
                   for ea in decomp.quasi.energies for eb in decomp.quasi.energies})
    payload = {
        "label": config.label,
        "tau": decomp.tau,
        "omega_drive": decomp.omega_drive,
        "hbar_floquet": _json_matrix(decomp.hbar_floquet),
        "quasienergies": decomp.quasi.energies.tolist(),
        "gaps": gaps,
        "q_range": [-config.q_max, config.q_max],
        "lamb_shift_per_channel": {
            key: _json_matrix(h) for key, h in gen.h_lamb.items()
        },
    }
    write_json(out_dir / "floquet.json", payload)
    bench = benchmark_fidelities(config.drive, config.h0, decomp)
    write_csv(out_dir / "benchmark.csv",
              ["t", "fidelity_propagator", "fidelity_periodicity",
               "fidelity_periodicity_magnus"],
              ([float(t), float(fu), float(fp), float(fm)] for t, fu, fp, fm in bench.rows()))
    return 0


def cmd_compare(cfg: dict, out_dir: Path) -> int:
    scen_a = scenario_from_dict(cfg["a"])
    scen_b = scenario_from_dict(cfg["b"])
    if scen_a.dim != scen_b.dim:
        raise ConfigError(
            f"incompatible level structures: {scen_a.dim} vs {scen_b.dim} levels")
    metric = cfg.get("metric", "eta_series")
    integ = cfg["integration"]
    # one shared integration grid so series align row by row; build the
    # generators up front so the stability guard cannot desynchronize dt
    gens = [build_generator(s) for s in (scen_a, scen_b)]
    dt = min(s.default_dt() if integ.get("dt") is None else integ["dt"]
             for s in (scen_a, scen_b))
    bound = max(float(np.linalg.norm(g.superop_at(0.0), 2)) for g in gens)
    if bound * dt > 1.5:
        dt = dt / int(np.ceil(bound * dt / 1.5))
    results = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for scen, gen in zip((scen_a, scen_b), gens):
            traj = evolve(scen, t_final=integ["t_final"], dt=dt,
                          stride=integ.get("stride"), generator=gen)
            results.append((traj, efficiency(traj)))
    (traj_a, eff_a), (traj_b, eff_b) = results
    n = min(len(traj_a.times), len(traj_b.times))
    if metric == "eta_series":
        rows = ([float(traj_a.times[k]), float(eff_a.cumulative[k]),
                 float(eff_b.cumulative[k]),
                 float(eff_a.cumulative[k] - eff_b.cumulative[k])] for k in range(n))
        header = ["t", "eta_a", "eta_b", "difference"]
    else:
        rows = ([float(traj_a.times[k]),
                 float(trace_distance(traj_a.states[k], traj_b.states[k]))]
                for k in range(n))
        header = ["t", "trace_distance"]
    write_csv(out_dir / "compare.csv", header, rows)
    rel = (eff_a.eta - eff_b.eta) / eff_b.eta if eff_b.eta != 0 else float("nan")
    write_json(out_dir / "compare_summary.json", {
        "label_a": scen_a.label, "label_b": scen_b.label, "metric": metric,
        "eta_a": eff_a.eta, "eta_b": eff_b.eta,
        "relative_gain_a_over_b": rel,
        "final_trace_distance": trace_distance(traj_a.states[n - 1], traj_b.states[n - 1]),
    })
    return 0


def _sweep_point(args):
    run, values = args
    try:
        _, traj, report = _run_trajectory(run)
        return {
            "values": values,
            "status": "ok",
            "eta": report.eta,
            "final_populations": traj.populations[-1].tolist(),
            "positivity_min": float(traj.positivity_log.min()),
        }
    except FloqdynError as exc:
        code = 2 if isinstance(exc, ConfigError) else 3
        return {"values": values, "status": f"error:{code}", "eta": float("nan"),
                "final_populations": [], "positivity_min": float("nan")}


def cmd_sweep(cfg: dict, out_dir: Path) -> int:
    base = cfg["base"]
    axes = cfg["axes"]
    names = sorted(axes)
    grid = list(product(*(axes[name] for name in names)))
    jobs = []
    failed = {}
    for values in grid:
        # override the raw config so preset-level axes still take effect,
        # then canonicalize (preset expansion deep-merges partial sections)
        try:
            run = apply_overrides(copy.deepcopy(base),
                                  [f"{n}={json.dumps(v)}" for n, v in zip(names, values)])
            run = validate_schema(canonical_run_dict(run), RUN_SCHEMA)
            jobs.append((run, values))
        except FloqdynError:
            failed[values] = {"values": values, "status": "error:2", "eta": float("nan"),
                              "final_populations": [], "positivity_min": float("nan")}
    workers = cfg.get("parallelism", 1)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            computed = list(pool.map(_sweep_point, jobs))
    else:
        computed = [_sweep_point(j) for j in jobs]
    by_values = {tuple(r["values"]): r for r in computed}
    by_values.update({tuple(k): v for k, v in failed.items()})
    results = [by_values[tuple(v)] for v in grid]

    dim = scenario_from_dict(canonical_scenario_dict(base["scenario"])).dim
    header = list(names) + ["status", "eta"] + [f"pop_{i}" for i in range(dim)] \
        + ["positivity_min"]
    rows = []
    for res in results:
        pops = res["final_populations"] or [float("nan")] * dim
        rows.append([json.dumps(v) if not isinstance(v, float) else v
                     for v in res["values"]]
                    + [res["status"], res["eta"]] + list(pops) + [res["positivity_min"]])
    write_csv(out_dir / "sweep.csv", header, rows)
    if all(r["status"] != "ok" for r in results):
        raise NumericalError("every sweep grid point failed")
    return 0


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floqdyn",
        description="Energy-transfer simulations of driven few-level open systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "integrate a scenario and export the trajectory"),
        ("floquet", "Floquet decomposition, Lamb matrices, fidelity benchmark"),
        ("compare", "run two scenarios and export paired series"),
        ("sweep", "grid of runs over named config axes"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--preset", help="scenario preset name", default=None)
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="dotted-path config override")
    return parser


_DEFAULT_RUN = {"scenario": {}, "integration": {"t_final": 100.0}}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    out_dir = Path(args.out)
    try:
        if args.command in ("simulate", "floquet"):
            data = load_config(args.config, args.preset, args.overrides,
                               default=_DEFAULT_RUN)
            run = validate_schema(canonical_run_dict(data), RUN_SCHEMA)
            if run["outputs"]["path"] and args.out == ".":
                out_dir = Path(run["outputs"]["path"])
            out_dir.mkdir(parents=True, exist_ok=True)
            return cmd_simulate(run, out_dir) if args.command == "simulate" \
                else cmd_floquet(run, out_dir)
        if args.command == "compare":
            data = load_config(args.config, None, args.overrides)
            data.setdefault("metric", "eta_series")
            for side in ("a", "b"):
                if side not in data:
                    raise ConfigError(f"compare config missing scenario {side!r}")
                data[side] = canonical_scenario_dict(data[side])
            validate_schema(data, COMPARE_SCHEMA)
            out_dir.mkdir(parents=True, exist_ok=True)
            return cmd_compare(data, out_dir)
        data = load_config(args.config, None, args.overrides)
        validate_schema(data, SWEEP_SCHEMA)
        out_dir.mkdir(parents=True, exist_ok=True)
        return cmd_sweep(data, out_dir)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
