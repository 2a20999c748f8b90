"""Command-line front end.

    spinbattery simulate --config run.json --out trace.csv
    spinbattery scaling --format json --threads 4
    spinbattery validate

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure
(including a failed ``validate`` check).
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
from typing import Any

import jsonschema
import numpy as np

from . import experiments, oracles
from .errors import NumericalError
from .hamiltonians import ModelParams, TcParams
from .propagation import TimeGrid

SCENARIOS = ("simulate", "landscape", "scaling", "crosstalk", "nonideal", "tc-benchmark", "validate")

_COMMON = {
    "scenario": {"enum": list(SCENARIOS)},
    "g": {"type": "number", "exclusiveMinimum": 0, "default": 0.1},
    "omega0": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
}
_GAMMA = {"type": "number", "minimum": 0, "maximum": 1}
_SIZES = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}

SCHEMAS: dict[str, dict[str, Any]] = {
    "simulate": {
        "M": {"type": "integer", "minimum": 1, "default": 2},
        "N": {"type": "integer", "minimum": 1, "default": 4},
        "gamma": {**_GAMMA, "default": 0.0},
        "g1_over_g": {"type": "number", "minimum": 0, "default": 0.0},
        "frame": {"enum": ["lab", "rotating"], "default": "lab"},
        "gt_max": {"type": ["number", "null"], "exclusiveMinimum": 0, "default": None},
        "points": {"type": "integer", "minimum": 2, "default": 4000},
        "engine": {"enum": ["auto", "spectral", "krylov"], "default": "auto"},
    },
    "landscape": {
        "Ms": {**_SIZES, "default": list(range(1, 11))},
        "ratios": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1, "default": [1, 2, 3, 10]},
        "gammas": {"type": "array", "items": _GAMMA, "minItems": 1, "default": [0.0, 0.2, 0.6, 1.0]},
    },
    "scaling": {
        "Ms": {"type": ["array", "null"], "items": {"type": "integer", "minimum": 1}, "default": None},
        "M_max": {"type": "integer", "minimum": 3, "default": 100},
        "gamma": {**_GAMMA, "default": 0.0},
        "include_tc": {"type": "boolean", "default": True},
    },
    "crosstalk": {
        "M": {"type": "integer", "minimum": 1, "default": 2},
        "N": {"type": "integer", "minimum": 1, "default": 4},
        "g1_over_g": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1,
                      "default": [0.1, 1.0, 7.0, 10.0]},
        "crossing_fraction": {"type": ["number", "null"], "exclusiveMinimum": 0, "default": 0.01},
    },
    "nonideal": {
        "charger_p": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 2,
                      "default": [0.6, 0.1, 0.1, 0.1, 0.1]},
        "battery_p": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 2,
                      "default": [0.6, 0.2, 0.2]},
        "M": {"type": "integer", "minimum": 1, "default": 2},
        "N": {"type": "integer", "minimum": 1, "default": 4},
    },
    "tc-benchmark": {
        "Ms": {**_SIZES, "default": [1, 2, 3, 4, 5, 10, 20, 50, 100]},
        "gamma": {**_GAMMA, "default": 0.0},
    },
    "validate": {},
}


class ConfigError(ValueError):
    pass


def _schema(scenario: str) -> dict:
    props = {**_COMMON, **SCHEMAS[scenario]}
    return {"type": "object", "properties": props, "additionalProperties": False}


def resolve_config(scenario: str, raw: dict | None) -> dict:
    """Validate ``raw`` against the scenario schema and fill every default."""
    raw = dict(raw or {})
    if raw.get("scenario", scenario) != scenario:
        raise ConfigError(f"config.scenario: {raw['scenario']!r} conflicts with command {scenario!r}")
    validator = jsonschema.Draft7Validator(_schema(scenario))
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = ".".join(str(p) for p in ["config", *err.absolute_path])
        raise ConfigError(f"{path}: {err.message}")
    resolved = {"scenario": scenario}
    for key, spec in {**_COMMON, **SCHEMAS[scenario]}.items():
        if key == "scenario":
            continue
        resolved[key] = copy.deepcopy(raw.get(key, spec.get("default")))
    try:
        _semantic_checks(resolved)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return resolved


def _semantic_checks(cfg: dict) -> None:
    if cfg["scenario"] == "simulate":
        if cfg["frame"] == "rotating" and cfg["gamma"] != 0:
            raise ValueError("config.frame: the rotating frame requires gamma = 0")
    if cfg["scenario"] == "nonideal":
        for key in ("charger_p", "battery_p"):
            if abs(sum(cfg[key]) - 1.0) > 1e-12:
                raise ValueError(f"config.{key}: probabilities sum to {sum(cfg[key])!r}, not 1")
        if len(cfg["charger_p"]) != cfg["N"] + 1:
            raise ValueError(f"config.charger_p: expected N + 1 = {cfg['N'] + 1} entries")
        if len(cfg["battery_p"]) != cfg["M"] + 1:
            raise ValueError(f"config.battery_p: expected M + 1 = {cfg['M'] + 1} entries")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


class Table:
    """Column-named rows plus scalar metadata, renderable as CSV or JSON."""

    def __init__(self, columns: list[str], rows: list[list], meta: dict | None = None):
        self.columns = columns
        self.rows = rows
        self.meta = meta or {}

    def to_csv(self, config: dict) -> str:
        buf = io.StringIO()
        buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        for key, val in self.meta.items():
            buf.write(f"# {key}: {_fmt(val)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self, config: dict) -> str:
        def clean(v):
            if isinstance(v, (np.floating, float)):
                return float(format(float(v), ".12g"))
            if isinstance(v, (np.integer,)):
                return int(v)
            if isinstance(v, (np.bool_,)):
                return bool(v)
            return v

        doc = {
            "config": config,
            "meta": {k: clean(v) for k, v in self.meta.items()},
            "columns": self.columns,
            "rows": [[clean(v) for v in row] for row in self.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


_POINT_COLUMNS = ["M", "N", "gamma", "g1_over_g", "charger", "E_max_over_omega0", "P_max_over_gomega0",
                  "P_max_over_sqrtN_gomega0", "gt_E", "gt_P"]


def _point_rows(points) -> list[list]:
    return [[p.M, p.N, p.gamma, p.g1_over_g, p.charger, p.e_max, p.p_max, p.p_max_collective, p.gt_e, p.gt_p]
            for p in points]


def run_simulate(cfg: dict, threads, tier) -> Table:
    g = cfg["g"]
    params = ModelParams(cfg["M"], cfg["N"], omega0=cfg["omega0"], g=g, gamma=cfg["gamma"],
                         g1=cfg["g1_over_g"] * g, frame=cfg["frame"])
    if cfg["gt_max"] is None:
        grid = TimeGrid.charging_window(g, cfg["N"], cfg["points"])
    else:
        grid = TimeGrid(cfg["gt_max"] / g, cfg["points"])
    trace, summary = experiments.simulate(params, grid, engine=cfg["engine"])
    w, root_n = cfg["omega0"], math.sqrt(cfg["N"])
    rows = [[t, g * t, e / w, p / (g * w), p / (root_n * g * w)]
            for t, e, p in zip(trace.times, trace.energy, trace.power)]
    meta = {
        "E_max_over_omega0": summary.e_max / w, "gt_E": g * summary.t_e,
        "P_max_over_gomega0": summary.p_max / (g * w), "gt_P": g * summary.t_p,
    }
    return Table(["t", "gt", "E_over_omega0", "P_over_gomega0", "P_over_sqrtN_gomega0"], rows, meta)


def run_landscape(cfg: dict, threads, tier) -> Table:
    points = experiments.landscape(cfg["Ms"], cfg["ratios"], cfg["gammas"], cfg["g"], cfg["omega0"], threads)
    meta = {}
    if len(cfg["Ms"]) >= 3:
        for ratio, fit in experiments.slope_fit(points).items():
            meta[f"slope_ratio_{_fmt(ratio)}_E_per_P"] = fit.e_per_p
            meta[f"slope_ratio_{_fmt(ratio)}_P_per_E"] = fit.p_per_e
    return Table(_POINT_COLUMNS, _point_rows(points), meta)


def scaling_sizes(cfg: dict, tier: str) -> list[int]:
    if cfg["Ms"] is not None:
        return sorted(set(cfg["Ms"]))
    sizes = set(range(1, cfg["M_max"] + 1))
    if tier == "full":
        sizes |= {250, 500, 750, 999, 1000}
    return sorted(sizes)


def run_scaling(cfg: dict, threads, tier) -> Table:
    Ms = scaling_sizes(cfg, tier)
    fit = experiments.eta_scaling(Ms, cfg["gamma"], 1, cfg["g"], cfg["omega0"], threads)
    meta = {"beta_global": fit.beta_global, "beta_local": fit.beta_local, "fit_residual": fit.residual}
    tc_eta = {}
    if cfg["include_tc"] and cfg["gamma"] == 0:
        tc = experiments.tc_scaling(Ms, cfg["g"], cfg["omega0"], threads)
        meta.update({"tc_beta_global": tc.beta_global, "tc_beta_local": tc.beta_local})
        tc_eta = dict(zip(tc.Ms, tc.eta))
    rows = [[m, e, tc_eta.get(m, float("nan"))] for m, e in zip(fit.Ms, fit.eta)]
    return Table(["M", "eta", "eta_tc"], rows, meta)


def run_crosstalk(cfg: dict, threads, tier) -> Table:
    points = experiments.crosstalk_scan(cfg["g1_over_g"], cfg["M"], cfg["N"], cfg["g"], cfg["omega0"], threads)
    meta = {}
    if cfg["crossing_fraction"] is not None:
        meta["g1_over_g_at_crossing"] = experiments.crosstalk_crossing(cfg["crossing_fraction"], M=cfg["M"],
                                                                       N=cfg["N"], g=cfg["g"])
    return Table(_POINT_COLUMNS, _point_rows(points), meta)


def run_nonideal(cfg: dict, threads, tier) -> Table:
    g, w = cfg["g"], cfg["omega0"]
    charger = experiments.nonideal_charger(cfg["charger_p"], cfg["M"], g, w)
    battery = experiments.nonideal_battery(cfg["battery_p"], cfg["N"], g, w)
    rows = []
    for name, rep in (("charger", charger), ("battery", battery)):
        rows.append([name, rep.ideal.e_max / w, rep.mixed.e_max / w, rep.energy_fraction,
                     rep.ideal.p_max / (g * w), rep.mixed.p_max / (g * w), rep.power_fraction])
    return Table(["mixture", "E_max_ideal", "E_max_mixed", "E_fraction", "P_max_ideal", "P_max_mixed",
                  "P_fraction"], rows)


def run_tc(cfg: dict, threads, tier) -> Table:
    points = experiments.tc_reference(cfg["Ms"], cfg["gamma"], cfg["g"], cfg["omega0"], threads)
    return Table(_POINT_COLUMNS, _point_rows(points))


def validation_checks(g: float = 0.1, omega0: float = 1.0) -> list[tuple[str, float, float, float]]:
    """(name, value, reference, tolerance) for the oracle equivalence suite."""
    from .fullspace import HybridBasis, build_full_hamiltonian, thermal_collective_estimate
    from .hamiltonians import build_spin_charger, ideal_initial_state
    from .observables import charging_trace
    from .propagation import MixtureTrajectory, Trajectory

    checks = []
    for N in (2, 4, 20):
        _, s = experiments.simulate(ModelParams(2, N, omega0=omega0, g=g))
        ref = oracles.two_cell_emax(N, omega0)
        checks.append((f"two_cell_emax_N{N}", s.e_max, ref, 1e-6 * ref))

    N = 5
    params = ModelParams(2, N, omega0=omega0, g=g, frame="rotating")
    basis = params.basis
    times = np.linspace(0.0, 4.0 / g, 57)
    states = Trajectory(build_spin_charger(params), ideal_initial_state(basis)).states(times)
    amps = oracles.two_cell_amplitudes(N, times, g)
    s1 = basis.index(1, N - 1)
    sim = np.array([states[:, basis.index(2, N - 2)], states[:, s1] / math.sqrt(2), states[:, s1] / math.sqrt(2),
                    states[:, basis.index(0, N)]])
    checks.append(("two_cell_amplitudes_N5", float(np.max(np.abs(sim - amps))), 0.0, 1e-8))

    unit = experiments.parallel_unit(0.0, g, omega0).p_max / (g * omega0)
    ref = oracles.single_cell_pmax(g, omega0)[0] / (g * omega0)
    checks.append(("single_cell_pmax", unit, ref, 1e-9))

    mixed, mbasis = thermal_collective_estimate(0.3)
    mparams = ModelParams(2, 2, omega0=omega0, g=g, frame="rotating")
    traj = MixtureTrajectory(build_spin_charger(mparams, mbasis), mixed)
    e_sim = omega0 * (traj.expectation(times, mbasis.battery_excitations) - mixed.expectation(mbasis.battery_excitations))
    checks.append(("thermal_closed_form_p0_0.3", float(np.max(np.abs(e_sim - oracles.thermal_energy(0.3, times, g, omega0)))), 0.0, 1e-10))

    fparams = ModelParams(2, 3, omega0=omega0, g=g, gamma=0.6)
    hb = HybridBasis(2, 3)
    grid = TimeGrid(4.0 / g, 101)
    full = charging_trace(build_full_hamiltonian(fparams, hb), hb.ideal_state(), hb.battery_excitations, grid, omega0)
    coll = charging_trace(build_spin_charger(fparams), ideal_initial_state(fparams.basis),
                          fparams.basis.battery_excitations, grid, omega0)
    checks.append(("fullspace_vs_collective_M2_N3", float(np.max(np.abs(full.energy - coll.energy))), 0.0, 1e-9))

    kparams = ModelParams(6, 6, omega0=omega0, g=g, gamma=0.6)
    spec = charging_trace(build_spin_charger(kparams), ideal_initial_state(kparams.basis),
                          kparams.basis.battery_excitations, grid, omega0, engine="spectral")
    kry = charging_trace(build_spin_charger(kparams), ideal_initial_state(kparams.basis),
                         kparams.basis.battery_excitations, grid, omega0, engine="krylov")
    checks.append(("krylov_vs_spectral_M6_N6", float(np.max(np.abs(spec.energy - kry.energy))), 0.0, 1e-7))

    _, tc = experiments.tc_converged(TcParams(2, 2, omega0=omega0, g_tilde=g))
    checks.append(("tc_two_photon_emax", tc.e_max / omega0, oracles.TC_TWO_CELL_EMAX, 1e-6 * 16 / 9))
    return checks


def run_validate(cfg: dict, threads, tier) -> Table:
    rows = []
    for name, value, ref, tol in validation_checks(cfg["g"], cfg["omega0"]):
        rows.append([name, value, ref, tol, abs(value - ref) <= tol])
    failed = sum(1 for r in rows if not r[-1])
    return Table(["check", "value", "reference", "tolerance", "passed"], rows, {"failed": failed})


RUNNERS = {
    "simulate": run_simulate,
    "landscape": run_landscape,
    "scaling": run_scaling,
    "crosstalk": run_crosstalk,
    "nonideal": run_nonideal,
    "tc-benchmark": run_tc,
    "validate": run_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinbattery", description="Collective spin-charger quantum battery simulator")
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", help="JSON file with scenario parameters")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    parser.add_argument("--tier", choices=("ci", "full"), default="ci", help="'full' adds the M = 1000 scaling point")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = None
        if args.config:
            with open(args.config) as fh:
                raw = json.load(fh)
            if not isinstance(raw, dict):
                raise ConfigError("config: top level must be a JSON object")
        cfg = resolve_config(args.scenario, raw)
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads: must be >= 1")
    except (ConfigError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        table = RUNNERS[args.scenario](cfg, args.threads, args.tier)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3

    text = table.to_csv(cfg) if args.format == "csv" else table.to_json(cfg)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    if args.scenario == "validate":
        for row in table.rows:
            print(f"{'PASS' if row[-1] else 'FAIL'} {row[0]}", file=sys.stderr)
        return 0 if table.meta["failed"] == 0 else 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
