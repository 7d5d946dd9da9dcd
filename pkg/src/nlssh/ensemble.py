"""Power sweeps and disorder ensembles with reproducible seeding.

Every grid cell (a full pump + biphoton evolution) is an independent pure
task keyed by its coordinates, so sweeps parallelize across processes and
produce bitwise-identical results for any worker count.  Disorder seeds are
derived from (base_seed, eta, power, index) with a splitmix64-style mixing
chain, making any single cell reproducible in isolation.
"""

from __future__ import annotations

import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .biphoton import (
    WEIGHT_MODE_STATIC,
    WEIGHT_MODES,
    BiphotonRecord,
    evolve_biphoton,
)
from .dynamics import IntegratorSpec, PumpTrajectory, _CouplingEngine, evolve_pump, inject_pump
from .errors import ParameterError, SimulationError
from .lattice import DisorderRealization, LatticeConfig, Species
from .spectral import defect_region_fraction

__all__ = [
    "OBSERVABLES",
    "SweepPlan",
    "SweepResult",
    "DisorderPlan",
    "AggregateResult",
    "EvolutionResult",
    "derive_seed",
    "run_single",
    "run_power_sweep",
    "run_disorder_study",
]

# grid observables: scalar per (cell, step)
OBSERVABLES = ("topo_weight", "gap_top", "pump_intensity", "biphoton_population")

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, eta: float, power: float, index: int) -> int:
    """64-bit cell seed mixed from the base seed and cell coordinates.

    eta and power enter through their IEEE-754 bit patterns, so any change
    in a coordinate changes the seed; repeated calls are pure.
    """
    words = (
        struct.unpack("<Q", struct.pack("<d", float(eta)))[0],
        struct.unpack("<Q", struct.pack("<d", float(power)))[0],
        int(index) & _MASK64,
    )
    s = int(base) & _MASK64
    for w in words:
        s = _splitmix64(s ^ w)
    return s


def _check_observables(observables) -> tuple[str, ...]:
    obs = tuple(observables)
    bad = [o for o in obs if o not in OBSERVABLES]
    if bad:
        raise ParameterError(f"unknown observables {bad}; accepted: {list(OBSERVABLES)}")
    return obs


@dataclass(eq=False)
class EvolutionResult:
    """One full evolution: pump trajectory summaries plus pair observables."""

    power: float
    injection_site: int
    z_grid: np.ndarray
    pump_intensities: np.ndarray
    pump_totals: np.ndarray
    record: BiphotonRecord | None
    gap_series: np.ndarray | None
    trajectory: PumpTrajectory
    disorder: DisorderRealization | None = None

    def series(self, observable: str) -> np.ndarray:
        """Scalar per-step series for one grid observable."""
        if observable == "topo_weight":
            if self.record is None:
                raise ParameterError("topo_weight was not recorded for this run")
            return self.record.weights
        if observable == "gap_top":
            if self.gap_series is None:
                raise ParameterError("gap_top was not recorded for this run")
            return self.gap_series
        if observable == "pump_intensity":
            return self.pump_totals
        if observable == "biphoton_population":
            if self.record is None:
                raise ParameterError("biphoton_population was not recorded for this run")
            return np.array(
                [
                    defect_region_fraction(p) if p.sum() > 0 else 0.0
                    for p in self.record.populations
                ]
            )
        raise ParameterError(f"unknown observable {observable!r}")


def run_single(
    config: LatticeConfig,
    spec: IntegratorSpec,
    power: float,
    *,
    injection_site: int = -1,
    disorder: DisorderRealization | None = None,
    disorder_signal: DisorderRealization | None = None,
    disorder_idler: DisorderRealization | None = None,
    observables=("topo_weight", "gap_top"),
    weight_modes: str = WEIGHT_MODE_STATIC,
    validate_propagators: bool = False,
    keep_history: bool = False,
) -> EvolutionResult:
    """Evolve pump and pairs at one power, recording the requested series."""
    obs = _check_observables(observables)
    initial = inject_pump(config, injection_site, power)
    trajectory = evolve_pump(initial, spec, config, disorder)

    need_pairs = "topo_weight" in obs or "biphoton_population" in obs or keep_history
    record = None
    if need_pairs:
        record = evolve_biphoton(
            trajectory,
            weight_modes=weight_modes,
            disorder_signal=disorder_signal,
            disorder_idler=disorder_idler,
            validate_propagators=validate_propagators,
            keep_history=keep_history,
        )

    gap_series = None
    if "gap_top" in obs:
        engine = _CouplingEngine(config, Species.PUMP, disorder)
        gaps = np.empty(trajectory.n_steps + 1)
        for k, state in enumerate(trajectory.states):
            lam = np.linalg.eigvalsh(engine.matrix(state.amplitudes))
            gaps[k] = lam[-1] - lam[-2]
        gap_series = gaps

    return EvolutionResult(
        power=power,
        injection_site=injection_site,
        z_grid=trajectory.z_grid(),
        pump_intensities=trajectory.intensities(),
        pump_totals=trajectory.total_intensities(),
        record=record,
        gap_series=gap_series,
        trajectory=trajectory,
        disorder=disorder,
    )


@dataclass(frozen=True, eq=False)
class SweepPlan:
    """Pump-power sweep over a fixed step grid.

    ``observables`` picks the per-step scalars recorded for every power:
    topo_weight, gap_top, pump_intensity (total W), biphoton_population
    (pair population fraction on the defect region |j| <= 2).
    """

    powers: tuple
    config: LatticeConfig
    spec: IntegratorSpec
    observables: tuple = ("topo_weight", "gap_top")
    injection_site: int = -1
    weight_modes: str = WEIGHT_MODE_STATIC

    def __post_init__(self) -> None:
        powers = tuple(float(p) for p in self.powers)
        if not powers:
            raise ParameterError("power grid must not be empty")
        if any(p < 0 for p in powers):
            raise ParameterError(f"powers must be non-negative, got {min(powers)}")
        if any(b <= a for a, b in zip(powers, powers[1:])):
            raise ParameterError("powers must be strictly increasing")
        object.__setattr__(self, "powers", powers)
        object.__setattr__(self, "observables", _check_observables(self.observables))
        if self.weight_modes not in WEIGHT_MODES:
            raise ParameterError(
                f"weight_modes must be one of {WEIGHT_MODES}, got {self.weight_modes!r}"
            )


@dataclass(eq=False)
class SweepResult:
    """Per-observable grids of shape (n_powers, n_steps + 1); failed cells NaN."""

    powers: np.ndarray
    z_grid: np.ndarray
    grids: dict
    errors: dict = field(default_factory=dict)

    def grid(self, observable: str) -> np.ndarray:
        return self.grids[observable]


def _sweep_cell(payload) -> tuple[int, dict | None, str | None]:
    index, config, spec, power, observables, injection_site, weight_modes = payload
    try:
        result = run_single(
            config,
            spec,
            power,
            injection_site=injection_site,
            observables=observables,
            weight_modes=weight_modes,
        )
    except SimulationError as exc:
        return index, None, f"{type(exc).__name__}: {exc}"
    return index, {o: result.series(o) for o in observables}, None


def run_power_sweep(plan: SweepPlan, workers: int = 1) -> SweepResult:
    """Run every power in the plan; failures mark their row and continue."""
    n_rows = len(plan.powers)
    n_cols = plan.spec.n_steps + 1
    grids = {o: np.full((n_rows, n_cols), np.nan) for o in plan.observables}
    errors: dict[int, str] = {}
    payloads = [
        (i, plan.config, plan.spec, p, plan.observables, plan.injection_site, plan.weight_modes)
        for i, p in enumerate(plan.powers)
    ]
    for index, series, err in _map_cells(_sweep_cell, payloads, workers):
        if err is not None:
            errors[index] = err
            continue
        for name, values in series.items():
            grids[name][index] = values
    z_grid = np.arange(n_cols) * plan.spec.dz
    return SweepResult(
        powers=np.array(plan.powers), z_grid=z_grid, grids=grids, errors=errors
    )


@dataclass(frozen=True, eq=False)
class DisorderPlan:
    """Disorder ensemble: etas x powers x n_realizations weight series."""

    etas: tuple
    powers: tuple
    config: LatticeConfig
    spec: IntegratorSpec
    n_realizations: int = 20
    base_seed: int = 0
    injection_site: int = -1
    weight_modes: str = WEIGHT_MODE_STATIC
    per_species: bool = False

    def __post_init__(self) -> None:
        etas = tuple(float(e) for e in self.etas)
        powers = tuple(float(p) for p in self.powers)
        if not etas or not powers:
            raise ParameterError("etas and powers must not be empty")
        if any(not 0.0 <= e <= 1.0 for e in etas):
            raise ParameterError(f"disorder strengths must lie in [0, 1], got {etas}")
        if any(b <= a for a, b in zip(etas, etas[1:])):
            raise ParameterError("etas must be strictly increasing")
        if any(p < 0 for p in powers):
            raise ParameterError("powers must be non-negative")
        if any(b <= a for a, b in zip(powers, powers[1:])):
            raise ParameterError("powers must be strictly increasing")
        if self.n_realizations < 1:
            raise ParameterError(
                f"n_realizations must be >= 1, got {self.n_realizations}"
            )
        if self.base_seed < 0:
            raise ParameterError(f"base_seed must be non-negative, got {self.base_seed}")
        if self.weight_modes not in WEIGHT_MODES:
            raise ParameterError(
                f"weight_modes must be one of {WEIGHT_MODES}, got {self.weight_modes!r}"
            )
        object.__setattr__(self, "etas", etas)
        object.__setattr__(self, "powers", powers)

    def seed_for(self, eta: float, power: float, index: int) -> int:
        return derive_seed(self.base_seed, eta, power, index)


@dataclass(eq=False)
class AggregateResult:
    """Weight statistics over realizations, per (eta, power, step) cell.

    ``variance`` is the population variance across realizations (two-pass);
    failed realizations are excluded and counted out of ``counts``.
    """

    etas: np.ndarray
    powers: np.ndarray
    z_grid: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    minimum: np.ndarray
    maximum: np.ndarray
    counts: np.ndarray
    seeds: np.ndarray
    errors: dict = field(default_factory=dict)

    def final_mean(self) -> np.ndarray:
        """Final-step mean weight per (eta, power)."""
        return self.mean[:, :, -1]

    def final_std_error(self) -> np.ndarray:
        """Standard error of the final-step mean per (eta, power)."""
        n = np.maximum(self.counts, 1)
        sample_var = self.variance[:, :, -1] * n / np.maximum(n - 1, 1)
        return np.sqrt(sample_var / n)


def _disorder_cell(payload) -> tuple[tuple[int, int, int], np.ndarray | None, str | None]:
    key, config, spec, power, eta, seed, injection_site, weight_modes, per_species = payload
    try:
        dis_s = dis_i = None
        if per_species:
            # independent draws per species, each derived from the cell seed
            pump_d, dis_s, dis_i = (
                DisorderRealization.draw(eta, _splitmix64(seed ^ (k + 1)), config.n_bonds)
                for k in range(3)
            )
        else:
            pump_d = DisorderRealization.draw(eta, seed, config.n_bonds)
        result = run_single(
            config,
            spec,
            power,
            injection_site=injection_site,
            disorder=pump_d,
            disorder_signal=dis_s,
            disorder_idler=dis_i,
            observables=("topo_weight",),
            weight_modes=weight_modes,
        )
    except SimulationError as exc:
        return key, None, f"{type(exc).__name__}: {exc}"
    return key, result.record.weights, None


def _map_cells(fn, payloads, workers: int):
    if workers <= 1:
        for payload in payloads:
            yield fn(payload)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(fn, payloads)


def run_disorder_study(plan: DisorderPlan, workers: int = 1) -> AggregateResult:
    """Run the full (eta, power, realization) grid and aggregate weights."""
    n_steps = plan.spec.n_steps
    shape = (len(plan.etas), len(plan.powers), plan.n_realizations)
    seeds = np.zeros(shape, dtype=np.uint64)
    series = np.full(shape + (n_steps + 1,), np.nan)
    errors: dict[tuple[int, int, int], str] = {}

    payloads = []
    for ei, eta in enumerate(plan.etas):
        for pi, power in enumerate(plan.powers):
            for r in range(plan.n_realizations):
                seed = plan.seed_for(eta, power, r)
                seeds[ei, pi, r] = seed
                payloads.append(
                    (
                        (ei, pi, r),
                        plan.config,
                        plan.spec,
                        power,
                        eta,
                        seed,
                        plan.injection_site,
                        plan.weight_modes,
                        plan.per_species,
                    )
                )
    for key, weights, err in _map_cells(_disorder_cell, payloads, workers):
        if err is not None:
            errors[key] = err
            continue
        series[key] = weights

    valid = np.isfinite(series)
    counts = valid[:, :, :, -1].sum(axis=2)
    with np.errstate(invalid="ignore"):
        mean = np.nanmean(series, axis=2)
        variance = np.nanvar(series, axis=2, ddof=0)
        minimum = np.nanmin(series, axis=2)
        maximum = np.nanmax(series, axis=2)
    return AggregateResult(
        etas=np.array(plan.etas),
        powers=np.array(plan.powers),
        z_grid=np.arange(n_steps + 1) * plan.spec.dz,
        mean=mean,
        variance=variance,
        minimum=minimum,
        maximum=maximum,
        counts=counts,
        seeds=seeds,
        errors=errors,
    )
