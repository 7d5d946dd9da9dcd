"""Run configuration: a single TOML file, strictly validated.

Sections mirror the library layout ([lattice], [integrator], [experiment]);
unknown keys anywhere are rejected so a sweep's provenance lives in one
reviewable file.  Every key has a reference default except the experiment
mode and its primary inputs, which must be stated explicitly.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .biphoton import WEIGHT_MODE_STATIC, WEIGHT_MODES
from .dynamics import IntegratorSpec
from .ensemble import OBSERVABLES
from .errors import ConfigurationError, SimulationError
from .lattice import (
    Boundary,
    DefectKind,
    LatticeConfig,
    Species,
    SpeciesCouplings,
    reference_lattice,
)

__all__ = [
    "ExperimentConfig",
    "RunConfig",
    "load_toml",
    "apply_overrides",
    "build_config",
    "load_config",
    "to_manifest_dict",
]

MODES = ("evolve", "spectrum", "sweep", "disorder")

_REFERENCE = reference_lattice()

# full-study default grids for the sweep and disorder modes
DEFAULT_SWEEP_POWERS = tuple(float(p) for p in range(0, 101, 2))
DEFAULT_DISORDER_POWERS = (5.0, 15.0, 30.0, 50.0)
DEFAULT_DISORDER_ETAS = (0.1, 0.2, 0.3, 0.4, 0.5)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated [experiment] section; unused keys stay at their defaults."""

    mode: str
    injection_site: int = -1
    weight_modes: str = WEIGHT_MODE_STATIC
    isolation_factor: float = 5.0
    power_w: float | None = None
    dump_final_state: bool = False
    record_steps: tuple = ()
    spectrum_species: Species = Species.PUMP
    powers: tuple = ()
    observables: tuple = ("topo_weight", "gap_top")
    etas: tuple = ()
    n_realizations: int = 20
    per_species_disorder: bool = False


@dataclass(frozen=True)
class RunConfig:
    lattice: LatticeConfig
    integrator: IntegratorSpec
    experiment: ExperimentConfig
    output_dir: Path
    base_seed: int


def _err(path: str, expected: str, value) -> ConfigurationError:
    return ConfigurationError(
        f"config error at {path}: expected {expected}, got {value!r}"
    )


def _reject_unknown(section: dict, allowed: set[str], path: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigurationError(
            f"config error at {path}: unknown key(s) {unknown}; "
            f"accepted: {sorted(allowed)}"
        )


def _get_number(section: dict, key: str, path: str, default=None, *, minimum=None):
    if key not in section:
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _err(f"{path}.{key}", "a number", value)
    if minimum is not None and value < minimum:
        raise _err(f"{path}.{key}", f"a number >= {minimum}", value)
    return float(value)


def _get_int(section: dict, key: str, path: str, default=None, *, minimum=None):
    if key not in section:
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise _err(f"{path}.{key}", "an integer", value)
    if minimum is not None and value < minimum:
        raise _err(f"{path}.{key}", f"an integer >= {minimum}", value)
    return int(value)


def _get_bool(section: dict, key: str, path: str, default: bool) -> bool:
    if key not in section:
        return default
    value = section[key]
    if not isinstance(value, bool):
        raise _err(f"{path}.{key}", "a boolean", value)
    return value


def _get_str(section: dict, key: str, path: str, default=None, *, choices=None):
    if key not in section:
        return default
    value = section[key]
    if not isinstance(value, str):
        raise _err(f"{path}.{key}", "a string", value)
    if choices is not None and value not in choices:
        raise _err(f"{path}.{key}", f"one of {sorted(choices)}", value)
    return value


def _get_number_list(section: dict, key: str, path: str, default=()):
    if key not in section:
        return tuple(default)
    value = section[key]
    if not isinstance(value, list) or any(
        isinstance(x, bool) or not isinstance(x, (int, float)) for x in value
    ):
        raise _err(f"{path}.{key}", "a list of numbers", value)
    return tuple(float(x) for x in value)


def _get_int_list(section: dict, key: str, path: str, default=()):
    if key not in section:
        return tuple(default)
    value = section[key]
    if not isinstance(value, list) or any(
        isinstance(x, bool) or not isinstance(x, int) for x in value
    ):
        raise _err(f"{path}.{key}", "a list of integers", value)
    return tuple(int(x) for x in value)


def _species_couplings(section: dict, species: Species, path: str) -> SpeciesCouplings:
    defaults = _REFERENCE.couplings[species]
    _reject_unknown(section, {"v_long", "v_short", "nu"}, path)
    try:
        return SpeciesCouplings(
            v_long=_get_number(section, "v_long", path, defaults.v_long, minimum=0.0),
            v_short=_get_number(section, "v_short", path, defaults.v_short, minimum=0.0),
            nu=_get_number(section, "nu", path, defaults.nu, minimum=0.0),
        )
    except SimulationError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"config error at {path}: {exc}") from exc


def _build_lattice(section: dict) -> LatticeConfig:
    path = "lattice"
    allowed = {
        "n_sites",
        "defect_kind",
        "boundary",
        "gamma",
        "nonlinear_bonds",
        "pump",
        "signal",
        "idler",
    }
    _reject_unknown(section, allowed, path)
    couplings = {}
    for species in Species:
        sub = section.get(species.value, {})
        if not isinstance(sub, dict):
            raise _err(f"{path}.{species.value}", "a table", sub)
        couplings[species] = _species_couplings(sub, species, f"{path}.{species.value}")
    kind = _get_str(
        section, "defect_kind", path, DefectKind.LONG_LONG.value,
        choices={k.value for k in DefectKind},
    )
    boundary = _get_str(
        section, "boundary", path, Boundary.PERIODIC.value,
        choices={b.value for b in Boundary},
    )
    nonlinear = None
    if "nonlinear_bonds" in section:
        nonlinear = frozenset(_get_int_list(section, "nonlinear_bonds", path))
    try:
        return LatticeConfig(
            couplings=couplings,
            n_sites=_get_int(section, "n_sites", path, 103, minimum=5),
            defect_kind=DefectKind(kind),
            boundary=Boundary(boundary),
            gamma=_get_number(section, "gamma", path, 120.0, minimum=0.0),
            nonlinear_bonds=nonlinear,
        )
    except SimulationError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"config error at {path}: {exc}") from exc


def _build_integrator(section: dict) -> IntegratorSpec:
    path = "integrator"
    _reject_unknown(section, {"dz", "n_steps", "substeps", "method"}, path)
    try:
        return IntegratorSpec(
            dz=_get_number(section, "dz", path, 2e-6),
            n_steps=_get_int(section, "n_steps", path, 1000, minimum=0),
            substeps=_get_int(section, "substeps", path, 6, minimum=1),
            method=_get_str(section, "method", path, "rk4_fixed"),
        )
    except SimulationError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"config error at {path}: {exc}") from exc


def _build_experiment(section: dict, integrator: IntegratorSpec) -> ExperimentConfig:
    path = "experiment"
    mode = _get_str(section, "mode", path, None, choices=set(MODES))
    if mode is None:
        raise ConfigurationError(
            f"config error at {path}.mode: required key missing; accepted: {list(MODES)}"
        )
    common = {"mode", "injection_site", "weight_modes", "isolation_factor"}
    per_mode = {
        "evolve": common | {"power_w", "dump_final_state"},
        "spectrum": common | {"power_w", "record_steps", "spectrum_species"},
        "sweep": common | {"powers", "power_start", "power_stop", "power_step", "observables"},
        "disorder": common | {"etas", "powers", "n_realizations", "per_species_disorder"},
    }
    _reject_unknown(section, per_mode[mode], path)

    kwargs: dict = {
        "mode": mode,
        "injection_site": _get_int(section, "injection_site", path, -1),
        "weight_modes": _get_str(
            section, "weight_modes", path, WEIGHT_MODE_STATIC, choices=set(WEIGHT_MODES)
        ),
        "isolation_factor": _get_number(section, "isolation_factor", path, 5.0),
    }
    if kwargs["isolation_factor"] <= 1.0:
        raise _err(f"{path}.isolation_factor", "a number > 1", kwargs["isolation_factor"])

    if mode in ("evolve", "spectrum"):
        power = _get_number(section, "power_w", path, None, minimum=0.0)
        if power is None:
            raise ConfigurationError(
                f"config error at {path}.power_w: required for mode={mode}; "
                "accepted: number >= 0"
            )
        kwargs["power_w"] = power
    if mode == "evolve":
        kwargs["dump_final_state"] = _get_bool(section, "dump_final_state", path, False)
    if mode == "spectrum":
        steps = _get_int_list(section, "record_steps", path)
        bad = [s for s in steps if not 0 <= s <= integrator.n_steps]
        if bad:
            raise _err(
                f"{path}.record_steps",
                f"step indices within [0, {integrator.n_steps}]",
                bad,
            )
        kwargs["record_steps"] = steps
        kwargs["spectrum_species"] = Species(
            _get_str(
                section, "spectrum_species", path, Species.PUMP.value,
                choices={s.value for s in Species},
            )
        )
    if mode == "sweep":
        explicit = "powers" in section
        ranged = any(k in section for k in ("power_start", "power_stop", "power_step"))
        if explicit and ranged:
            raise ConfigurationError(
                f"config error at {path}: give either powers or "
                "power_start/power_stop/power_step, not both"
            )
        if ranged:
            start = _get_number(section, "power_start", path, None, minimum=0.0)
            stop = _get_number(section, "power_stop", path, None)
            step = _get_number(section, "power_step", path, None)
            if start is None or stop is None or step is None:
                raise ConfigurationError(
                    f"config error at {path}: power_start, power_stop and "
                    "power_step must all be given"
                )
            if step <= 0 or stop < start:
                raise ConfigurationError(
                    f"config error at {path}: need power_step > 0 and "
                    f"power_stop >= power_start, got start={start}, stop={stop}, "
                    f"step={step}"
                )
            count = int(round((stop - start) / step))
            powers = tuple(start + i * step for i in range(count + 1))
            powers = tuple(p for p in powers if p <= stop + 1e-9)
        elif explicit:
            powers = _get_number_list(section, "powers", path)
        else:
            powers = DEFAULT_SWEEP_POWERS
        if not powers:
            raise _err(f"{path}.powers", "a non-empty list of powers in W", list(powers))
        kwargs["powers"] = powers
        kwargs["observables"] = tuple(
            _get_str_list(section, "observables", path, ("topo_weight", "gap_top"))
        )
        bad = [o for o in kwargs["observables"] if o not in OBSERVABLES]
        if bad:
            raise _err(f"{path}.observables", f"names from {list(OBSERVABLES)}", bad)
    if mode == "disorder":
        kwargs["etas"] = _get_number_list(section, "etas", path, DEFAULT_DISORDER_ETAS)
        kwargs["powers"] = _get_number_list(
            section, "powers", path, DEFAULT_DISORDER_POWERS
        )
        if not kwargs["etas"]:
            raise _err(f"{path}.etas", "a non-empty list in [0, 1]", [])
        if not kwargs["powers"]:
            raise _err(f"{path}.powers", "a non-empty list of powers in W", [])
        kwargs["n_realizations"] = _get_int(
            section, "n_realizations", path, 20, minimum=1
        )
        kwargs["per_species_disorder"] = _get_bool(
            section, "per_species_disorder", path, False
        )
    return ExperimentConfig(**kwargs)


def _get_str_list(section: dict, key: str, path: str, default=()):
    if key not in section:
        return tuple(default)
    value = section[key]
    if not isinstance(value, list) or any(not isinstance(x, str) for x in value):
        raise _err(f"{path}.{key}", "a list of strings", value)
    return tuple(value)


def load_toml(path: str | Path) -> dict:
    """Parse the TOML file; syntax errors surface with line/column info."""
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"config syntax error in {path}: {exc}") from exc


def apply_overrides(data: dict, overrides) -> dict:
    """Apply --set KEY.PATH=VALUE pairs onto the raw mapping.

    Values are parsed as TOML scalars (numbers, booleans, lists, strings);
    anything that fails to parse is kept as a bare string.
    """
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(
                f"invalid override {item!r}: expected KEY.PATH=VALUE"
            )
        key, raw = item.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigurationError(f"invalid override {item!r}: empty key path")
        try:
            value = tomllib.loads(f"v = {raw}")["v"]
        except tomllib.TOMLDecodeError:
            value = raw.strip()
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            nxt = node.setdefault(part, {})
            if not isinstance(nxt, dict):
                raise ConfigurationError(
                    f"invalid override {item!r}: {part} is not a table"
                )
            node = nxt
        node[parts[-1]] = value
    return data


def build_config(data: dict) -> RunConfig:
    """Validate a raw mapping into a RunConfig; unknown keys are fatal."""
    _reject_unknown(
        data, {"lattice", "integrator", "experiment", "output_dir", "base_seed"}, "top level"
    )
    for name in ("lattice", "integrator", "experiment"):
        if name in data and not isinstance(data[name], dict):
            raise _err(name, "a table", data[name])
    integrator = _build_integrator(data.get("integrator", {}))
    lattice = _build_lattice(data.get("lattice", {}))
    experiment = _build_experiment(data.get("experiment", {}), integrator)
    out = data.get("output_dir", "out")
    if not isinstance(out, str) or not out:
        raise _err("output_dir", "a non-empty string", out)
    base_seed = _get_int(data, "base_seed", "top level", 0, minimum=0)

    # fail early on grids the plans would reject, with config-keyed messages
    exp = experiment
    if exp.mode in ("sweep", "disorder"):
        if any(p < 0 for p in exp.powers):
            raise _err("experiment.powers", "non-negative powers", list(exp.powers))
        if any(b <= a for a, b in zip(exp.powers, exp.powers[1:])):
            raise _err(
                "experiment.powers", "a strictly increasing list", list(exp.powers)
            )
    if exp.mode == "disorder":
        if any(not 0.0 <= e <= 1.0 for e in exp.etas):
            raise _err("experiment.etas", "values in [0, 1]", list(exp.etas))
        if any(b <= a for a, b in zip(exp.etas, exp.etas[1:])):
            raise _err("experiment.etas", "a strictly increasing list", list(exp.etas))
    try:
        lattice.site_offset(exp.injection_site)
    except IndexError as exc:
        raise ConfigurationError(
            f"config error at experiment.injection_site: {exc}"
        ) from exc
    return RunConfig(
        lattice=lattice,
        integrator=integrator,
        experiment=experiment,
        output_dir=Path(out),
        base_seed=base_seed,
    )


def load_config(path: str | Path, overrides=()) -> RunConfig:
    """Load, override, and validate in one call."""
    data = load_toml(path)
    apply_overrides(data, overrides)
    return build_config(data)


def to_manifest_dict(run: RunConfig) -> dict:
    """Resolved configuration as a JSON-ready mapping (defaults included)."""
    lat = run.lattice
    exp = run.experiment
    lattice = {
        "n_sites": lat.n_sites,
        "defect_kind": lat.defect_kind.value,
        "boundary": lat.boundary.value,
        "gamma": lat.gamma,
        "nonlinear_bonds": sorted(lat.nonlinear_bonds),
    }
    for species in Species:
        c = lat.couplings[species]
        lattice[species.value] = {"v_long": c.v_long, "v_short": c.v_short, "nu": c.nu}
    experiment: dict = {
        "mode": exp.mode,
        "injection_site": exp.injection_site,
        "weight_modes": exp.weight_modes,
        "isolation_factor": exp.isolation_factor,
    }
    if exp.mode in ("evolve", "spectrum"):
        experiment["power_w"] = exp.power_w
    if exp.mode == "evolve":
        experiment["dump_final_state"] = exp.dump_final_state
    if exp.mode == "spectrum":
        experiment["record_steps"] = list(exp.record_steps)
        experiment["spectrum_species"] = exp.spectrum_species.value
    if exp.mode == "sweep":
        experiment["powers"] = list(exp.powers)
        experiment["observables"] = list(exp.observables)
    if exp.mode == "disorder":
        experiment["etas"] = list(exp.etas)
        experiment["powers"] = list(exp.powers)
        experiment["n_realizations"] = exp.n_realizations
        experiment["per_species_disorder"] = exp.per_species_disorder
    return {
        "output_dir": str(run.output_dir),
        "base_seed": run.base_seed,
        "lattice": lattice,
        "integrator": {
            "dz": run.integrator.dz,
            "n_steps": run.integrator.n_steps,
            "substeps": run.integrator.substeps,
            "method": run.integrator.method,
        },
        "experiment": experiment,
    }
