"""Scenario-driven command line front end.

Subcommands:
    run <scenario.json>    execute a scenario, write CSV/JSON artifacts
    list-presets           print the model and spectral preset registry
    validate <scenario.json>  parse and validate without running

Exit codes: 0 success, 2 validation error, 3 numerical contract violation.
Errors are emitted as a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import presets
from .gkls import GklsGenerator, generator_superoperator
from .models import SIGMA_1, SIGMA_3
from .operators import (
    DensityMatrix,
    Superoperator,
    is_completely_positive,
    matrix_from_json,
)
from .propagation import Schedule, evolve_exact
from .thermo import first_law_ledger
from .unraveling import TrajectoryConfig, ensemble_density

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONTRACT = 3

TASKS = (
    "evolve",
    "unravel",
    "davies-build",
    "cp-check",
    "thermo-ledger",
    "spinboson-report",
)


class ValidationError(Exception):
    pass


class ContractError(Exception):
    pass


def _fmt(x: float) -> str:
    return "%.17g" % x


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(
                ",".join(v if isinstance(v, str) else _fmt(v) for v in row) + "\n"
            )


def _load_scenario(path: str) -> dict:
    try:
        with open(path) as fh:
            scenario = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read scenario: {exc}") from exc
    if not isinstance(scenario, dict):
        raise ValidationError("scenario must be a JSON object")
    return scenario


def _validate(scenario: dict) -> None:
    task = scenario.get("task")
    if task not in TASKS:
        raise ValidationError(f"unknown task {task!r}; expected one of {TASKS}")
    if task in ("evolve", "unravel", "thermo-ledger"):
        grid = scenario.get("grid")
        if not isinstance(grid, list) or not grid:
            raise ValidationError("grid must be a nonempty list of times")
        arr = np.asarray(grid, dtype=float)
        if arr.size > 1 and np.any(np.diff(arr) <= 0):
            raise ValidationError("grid must be strictly increasing")
    if task in ("evolve", "unravel"):
        model = scenario.get("model")
        if not isinstance(model, dict) or "name" not in model:
            raise ValidationError("model must be an object with a name")
        name = model["name"]
        if name not in presets.MODEL_PRESETS:
            raise ValidationError(f"unknown model preset {name!r}")
        if presets.MODEL_PRESETS[name][0] is None:
            raise ValidationError(f"model preset {name!r} is not runnable via this task")
    if task == "cp-check" and "superoperator" not in scenario:
        raise ValidationError("cp-check requires a superoperator matrix")
    output = scenario.get("output", {})
    if output.get("format", "csv") not in ("csv", "json"):
        raise ValidationError("output format must be csv or json")


def _expand_observables(specs, d: int):
    out = []
    for spec in specs or ["sigma3" if d == 2 else "n"]:
        if spec == "coherence_12":
            out.append(presets.observable_matrix("coherence_12_re", d))
            out.append(presets.observable_matrix("coherence_12_im", d))
        else:
            out.append(presets.observable_matrix(spec, d))
    return out


def _out_path(scenario: dict, out_dir: str | None, default_stem: str, ext: str) -> Path:
    base = scenario.get("output", {}).get("path", default_stem)
    directory = out_dir or os.environ.get("OQSIM_OUT_DIR") or "."
    path = Path(directory) / base
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix != f".{ext}":
        path = path.with_suffix(f".{ext}")
    return path


def _run_evolve(scenario: dict, out_dir, seed, do_plot: bool) -> list[Path]:
    model = scenario["model"]
    gen = presets.build_model(model["name"], model.get("params", {}))
    d = gen.dim
    rho0 = presets.initial_state(scenario.get("initial", "ground"), d)
    grid = np.asarray(scenario["grid"], dtype=float)
    observables = _expand_observables(scenario.get("observables"), d)
    l = generator_superoperator(gen)
    series = {name: [] for name, _ in observables}
    rows = []
    for t in grid:
        rho_t = evolve_exact(l, float(t), rho0)
        for name, m in observables:
            value = float(np.trace(m @ rho_t).real)
            series[name].append(value)
            rows.append((float(t), name, value))
    path = _out_path(scenario, out_dir, "evolve", scenario.get("output", {}).get("format", "csv"))
    artifacts = [path]
    if path.suffix == ".json":
        path.write_text(json.dumps(
            {"t": grid.tolist(), "series": series}, indent=2) + "\n")
    else:
        _write_csv(path, ["t", "observable_name", "value"], rows)
    if do_plot:
        from .report import plot_observables

        artifacts.append(
            plot_observables(grid, series, path.with_suffix(".png"), model["name"])
        )
    return artifacts


def _run_unravel(scenario: dict, out_dir, seed, do_plot: bool) -> list[Path]:
    model = scenario["model"]
    gen = presets.build_model(model["name"], model.get("params", {}))
    d = gen.dim
    rho0 = presets.initial_state(scenario.get("initial", "ground"), d)
    grid = np.asarray(scenario["grid"], dtype=float)
    cfg = TrajectoryConfig(
        dt=scenario.get("dt", 1e-3),
        n_traj=scenario.get("n_traj", 1000),
        seed=seed if seed is not None else scenario.get("seed", 0),
    )
    result = ensemble_density(gen, rho0, grid, cfg)
    header = ["t"]
    for i in range(d):
        for j in range(d):
            header += [f"entry_re_{i}{j}", f"entry_im_{i}{j}", f"se_{i}{j}"]
    rows = []
    for n, t in enumerate(grid):
        row = [float(t)]
        for i in range(d):
            for j in range(d):
                row += [
                    result.rho[n, i, j].real,
                    result.rho[n, i, j].imag,
                    result.stderr[n, i, j],
                ]
        rows.append(row)
    path = _out_path(scenario, out_dir, "unravel", "csv")
    _write_csv(path, header, rows)
    artifacts = [path]
    if do_plot:
        from .report import plot_observables

        diag = {
            f"rho_{i}{i}": result.rho[:, i, i].real for i in range(d)
        }
        artifacts.append(
            plot_observables(grid, diag, path.with_suffix(".png"), model["name"])
        )
    return artifacts


def _run_davies_build(scenario: dict, out_dir, seed, do_plot: bool) -> list[Path]:
    params = scenario.get("model", {}).get("params", {})
    gen = presets.build_model("davies-qubit", params)
    path = _out_path(scenario, out_dir, "davies_generator", "json")
    path.write_text(json.dumps(gen.to_json(), indent=2) + "\n")
    return [path]


def _run_cp_check(scenario: dict, out_dir, seed, do_plot: bool) -> list[Path]:
    m = matrix_from_json(scenario["superoperator"])
    s = Superoperator(m)
    ok, lam_min = is_completely_positive(s)
    path = _out_path(scenario, out_dir, "cp_check", "json")
    path.write_text(
        json.dumps({"completely_positive": bool(ok), "choi_min_eigenvalue": lam_min}) + "\n"
    )
    if not ok:
        raise ContractError(
            f"map is not completely positive: Choi min eigenvalue {lam_min}"
        )
    return [path]


def _run_thermo_ledger(scenario: dict, out_dir, seed, do_plot: bool) -> list[Path]:
    params = scenario.get("model", {}).get("params", {})
    eps0 = params.get("epsilon", 1.0)
    eps1 = params.get("epsilon_final", eps0)
    grid = np.asarray(scenario["grid"], dtype=float)
    t0, t1 = grid[0], grid[-1]
    spectral = presets.build_spectral(
        params.get("spectral", "flat"), params.get("spectral_params", {})
    )
    lam = params.get("coupling", 1.0)
    from .davies import build_davies

    def eps_at(t: float) -> float:
        if t1 == t0:
            return eps0
        x = min(max((t - t0) / (t1 - t0), 0.0), 1.0)
        return eps0 + (eps1 - eps0) * x

    def provider(t: float) -> GklsGenerator:
        return build_davies(eps_at(t) / 2 * SIGMA_3, [SIGMA_1], spectral, lam)

    deps = (eps1 - eps0) / (t1 - t0) if t1 > t0 else 0.0
    schedule = Schedule(provider, grid, dhamiltonian=lambda t: deps / 2 * SIGMA_3)
    d = 2
    rho0 = presets.initial_state(scenario.get("initial", "ground"), d)
    temperature = scenario.get("temperature")
    ledger = first_law_ledger(
        schedule, rho0, step=scenario.get("step", 1e-3), temperature=temperature
    )
    path = _out_path(scenario, out_dir, "thermo_ledger", "csv")
    _write_csv(
        path,
        ["t", "E", "W", "Q", "S", "sigma", "closure_defect"],
        ledger.rows(),
    )
    artifacts = [path]
    if do_plot:
        from .report import plot_ledger

        artifacts.append(plot_ledger(ledger, path.with_suffix(".png"), "thermo ledger"))
    return artifacts


def _run_spinboson(scenario: dict, out_dir, seed, do_plot: bool) -> list[Path]:
    from .models import SpinBosonCoupling, dephasing_feasibility

    params = scenario.get("model", {}).get("params", {})
    lam = params.get("coupling", 1.0)
    s = params.get("ir_exponent", 2.0)
    cutoff = params.get("cutoff", 1.0)

    def amplitude(w: float) -> float:
        # |f(omega)|^2 = omega^s e^{-2 omega / cutoff}
        return float(np.sqrt(w**s) * np.exp(-w / cutoff)) if w > 0 else (
            1.0 if s == 0 else 0.0
        )

    coupling = SpinBosonCoupling(lam, amplitude, s, cutoff)
    report = dephasing_feasibility(coupling)
    path = _out_path(scenario, out_dir, "spinboson_report", "json")
    path.write_text(
        json.dumps(
            {
                "markovian_rate": report.markovian_rate,
                "norm_g_sq": (
                    "DIVERGENT" if report.cloud_divergent else report.norm_g_sq
                ),
                "overlap": 0.0 if report.cloud_divergent else float(
                    np.exp(-2 * report.norm_g_sq)
                ),
                "markovian_dephasing_admissible": report.markovian_dephasing_admissible,
                "verdict": report.verdict,
            },
            indent=2,
        )
        + "\n"
    )
    return [path]


_RUNNERS = {
    "evolve": _run_evolve,
    "unravel": _run_unravel,
    "davies-build": _run_davies_build,
    "cp-check": _run_cp_check,
    "thermo-ledger": _run_thermo_ledger,
    "spinboson-report": _run_spinboson,
}


def _error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oqsim", description="quantum dynamical semigroup toolkit"
    )
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--seed", type=int, default=None, help="override scenario seed")
    parser.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a scenario file")
    run_p.add_argument("scenario")
    run_p.add_argument("--plot", action="store_true", help="render figures next to the data")
    sub.add_parser("list-presets", help="list model and spectral presets")
    val_p = sub.add_parser("validate", help="validate a scenario file")
    val_p.add_argument("scenario")

    args = parser.parse_args(argv)

    if args.command == "list-presets":
        print(presets.preset_table())
        return EXIT_OK

    try:
        scenario = _load_scenario(args.scenario)
        _validate(scenario)
    except ValidationError as exc:
        _error("validation", str(exc))
        return EXIT_VALIDATION

    if args.command == "validate":
        if not args.quiet:
            print("ok")
        return EXIT_OK

    try:
        artifacts = _RUNNERS[scenario["task"]](
            scenario, args.out, args.seed, getattr(args, "plot", False)
        )
    except ContractError as exc:
        _error("contract", str(exc))
        return EXIT_CONTRACT
    except (KeyError, ValueError, ValidationError) as exc:
        _error("validation", str(exc))
        return EXIT_VALIDATION
    if not args.quiet:
        for p in artifacts:
            print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
