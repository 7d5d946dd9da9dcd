"""Command-line entry point.

Each subcommand reads one TOML config (whose experiment.mode must match the
subcommand), runs the corresponding computation, and writes CSV artifacts
plus a manifest into the output directory.  Exit codes: 0 on success, 1 on
numeric failure (including failed sweep cells), 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import artifacts
from .config import MODES, RunConfig, apply_overrides, build_config, load_toml, to_manifest_dict
from .dynamics import evolve_pump, inject_pump
from .ensemble import DisorderPlan, SweepPlan, run_disorder_study, run_power_sweep, run_single
from .errors import ConfigurationError, SimulationError
from .spectral import diagonalize

__all__ = ["main"]

_HEATMAP_NAMES = {
    "topo_weight": "weight_heatmap.csv",
    "gap_top": "gap_heatmap.csv",
    "pump_intensity": "pump_heatmap.csv",
    "biphoton_population": "population_heatmap.csv",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlssh",
        description="Nonlinear SSH waveguide lattice simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in (*MODES, "validate"):
        p = sub.add_parser(command, help=f"run the {command} mode")
        p.add_argument("--config", required=True, help="TOML configuration file")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument(
            "--workers",
            type=int,
            default=None,
            help="worker processes (default: available parallelism)",
        )
        p.add_argument("--seed", type=int, default=None, help="base seed override")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            dest="overrides",
            help="override a config key (dotted path), repeatable",
        )
    return parser


def _resolve(args) -> RunConfig:
    data = load_toml(args.config)
    apply_overrides(data, args.overrides)
    if args.out is not None:
        data["output_dir"] = args.out
    if args.seed is not None:
        data["base_seed"] = args.seed
    run = build_config(data)
    if args.command != "validate" and run.experiment.mode != args.command:
        raise ConfigurationError(
            f"config error at experiment.mode: config declares "
            f"{run.experiment.mode!r} but the subcommand is {args.command!r}"
        )
    return run


def cmd_validate(run: RunConfig, workers: int) -> int:
    print(json.dumps(to_manifest_dict(run), indent=2, sort_keys=True))
    return 0


def cmd_evolve(run: RunConfig, workers: int) -> int:
    ex = run.experiment
    result = run_single(
        run.lattice,
        run.integrator,
        ex.power_w,
        injection_site=ex.injection_site,
        observables=("topo_weight", "pump_intensity", "biphoton_population"),
        weight_modes=ex.weight_modes,
    )
    out = run.output_dir
    out.mkdir(parents=True, exist_ok=True)
    names = [
        artifacts.write_pump_intensity(out, result, run.lattice),
        artifacts.write_biphoton_population(out, result.record, run.lattice),
        artifacts.write_biphoton_scalars(out, result.record),
    ]
    if ex.dump_final_state:
        names.append(artifacts.write_final_state(out, result.record))
    artifacts.write_manifest(out, "evolve", to_manifest_dict(run), names)
    return 0


def cmd_spectrum(run: RunConfig, workers: int) -> int:
    ex = run.experiment
    initial = inject_pump(run.lattice, ex.injection_site, ex.power_w)
    trajectory = evolve_pump(initial, run.integrator, run.lattice)
    steps = sorted({0, run.integrator.n_steps, *ex.record_steps})
    snapshots = [
        diagonalize(
            trajectory.hamiltonian(k, ex.spectrum_species),
            step=k,
            isolation_factor=ex.isolation_factor,
        )
        for k in steps
    ]
    out = run.output_dir
    out.mkdir(parents=True, exist_ok=True)
    names = [
        artifacts.write_spectrum(out, snapshots),
        artifacts.write_modes(out, snapshots, run.lattice),
    ]
    artifacts.write_manifest(out, "spectrum", to_manifest_dict(run), names)
    return 0


def cmd_sweep(run: RunConfig, workers: int) -> int:
    ex = run.experiment
    plan = SweepPlan(
        powers=ex.powers,
        config=run.lattice,
        spec=run.integrator,
        observables=ex.observables,
        injection_site=ex.injection_site,
        weight_modes=ex.weight_modes,
    )
    result = run_power_sweep(plan, workers=workers)
    out = run.output_dir
    out.mkdir(parents=True, exist_ok=True)
    names = [
        artifacts.write_heatmap(
            out, _HEATMAP_NAMES[obs], "power_w", result.powers, result.grid(obs)
        )
        for obs in plan.observables
    ]
    errors = {
        artifacts.fmt(plan.powers[i]): message for i, message in sorted(result.errors.items())
    }
    artifacts.write_manifest(
        out, "sweep", to_manifest_dict(run), names, errors=errors
    )
    if errors:
        for power, message in errors.items():
            print(f"error: sweep cell power_w={power} failed: {message}", file=sys.stderr)
        return 1
    return 0


def cmd_disorder(run: RunConfig, workers: int) -> int:
    ex = run.experiment
    plan = DisorderPlan(
        etas=ex.etas,
        powers=ex.powers,
        config=run.lattice,
        spec=run.integrator,
        n_realizations=ex.n_realizations,
        base_seed=run.base_seed,
        injection_site=ex.injection_site,
        weight_modes=ex.weight_modes,
        per_species=ex.per_species_disorder,
    )
    agg = run_disorder_study(plan, workers=workers)
    out = run.output_dir
    out.mkdir(parents=True, exist_ok=True)
    names = [
        artifacts.write_disorder_stats(out, agg),
        artifacts.write_disorder_series(out, agg),
    ]
    seeds = {
        artifacts.fmt(eta): {
            artifacts.fmt(power): [int(s) for s in agg.seeds[ei, pi]]
            for pi, power in enumerate(agg.powers)
        }
        for ei, eta in enumerate(agg.etas)
    }
    errors = {
        f"eta={artifacts.fmt(plan.etas[ei])},power_w={artifacts.fmt(plan.powers[pi])},"
        f"realization={r}": message
        for (ei, pi, r), message in sorted(agg.errors.items())
    }
    artifacts.write_manifest(
        out, "disorder", to_manifest_dict(run), names, seeds=seeds, errors=errors
    )
    if errors:
        for cell, message in errors.items():
            print(f"error: disorder cell {cell} failed: {message}", file=sys.stderr)
        return 1
    return 0


_DISPATCH = {
    "validate": cmd_validate,
    "evolve": cmd_evolve,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "disorder": cmd_disorder,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    if workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        run = _resolve(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return _DISPATCH[args.command](run, workers)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
