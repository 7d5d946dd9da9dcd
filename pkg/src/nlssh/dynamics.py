"""Pump-field propagation along the chip.

The pump amplitudes alpha_j(z) obey  i d(alpha)/dz = H(alpha) alpha  where
H is the hopping matrix built from the instantaneous coupling profile; the
nonlinearity enters only through the intensity-dependent bonds.  Propagation
uses a fixed-step RK4 with the Hamiltonian re-evaluated at every stage.

Each recorded step of size dz is integrated internally as ``substeps``
equal micro-steps.  RK4 conserves the total intensity only to O(h^6) per
micro-step (the stability function satisfies |R(i theta)|^2 = 1 - theta^6/72
+ ...), so the default of 6 micro-steps keeps the full-run drift a couple of
orders below 1e-8 at the reference couplings and dz = 2e-6 m.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .errors import (
    ConfigurationError,
    DimensionError,
    NumericFailureError,
    ParameterError,
)
from .lattice import (
    CouplingProfile,
    DisorderRealization,
    LatticeConfig,
    Species,
    base_couplings,
)

__all__ = [
    "PumpState",
    "IntegratorSpec",
    "HamiltonianMatrix",
    "PumpTrajectory",
    "inject_pump",
    "pump_hamiltonian",
    "step_pump",
    "evolve_pump",
    "rk4_step",
    "STABILITY_LIMIT",
]

# dimensionless stability guard: max coupling times micro-step must stay below this
STABILITY_LIMIT = 0.1


@dataclass(frozen=True, eq=False)
class PumpState:
    """Pump amplitudes (sqrt(W)) on every site at propagation distance z."""

    amplitudes: np.ndarray
    z: float = 0.0

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1:
            raise DimensionError(f"amplitudes must be a vector, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_sites(self) -> int:
        return self.amplitudes.shape[0]

    def intensities(self) -> np.ndarray:
        """Per-site intensity |alpha_j|^2 in W."""
        return np.abs(self.amplitudes) ** 2

    def total_intensity(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class IntegratorSpec:
    """Fixed-step RK4 integration plan.

    dz is the recorded step; each recorded step runs ``substeps`` internal
    micro-steps of size dz / substeps with stage-wise Hamiltonian updates.
    """

    dz: float = 2e-6
    n_steps: int = 1000
    substeps: int = 6
    method: str = "rk4_fixed"

    def __post_init__(self) -> None:
        if self.dz <= 0.0:
            raise ParameterError(f"dz must be positive, got {self.dz}")
        if self.n_steps < 0:
            raise ParameterError(f"n_steps must be >= 0, got {self.n_steps}")
        if self.substeps < 1:
            raise ParameterError(f"substeps must be >= 1, got {self.substeps}")
        if self.method != "rk4_fixed":
            raise ParameterError(
                f"unknown integrator method {self.method!r}; accepted: 'rk4_fixed'"
            )

    @property
    def micro_dz(self) -> float:
        return self.dz / self.substeps

    def ensure_stable(self, max_coupling: float) -> None:
        """Raise ConfigurationError when max_coupling * micro-step >= 0.1."""
        guard = max_coupling * self.micro_dz
        if guard >= STABILITY_LIMIT:
            raise ConfigurationError(
                f"stability guard violated: max coupling {max_coupling:g}/m times "
                f"micro-step {self.micro_dz:g} m is {guard:.3g} >= {STABILITY_LIMIT}; "
                "reduce dz or raise substeps"
            )


def rk4_step(rhs: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    """One classical fixed-step RK4 update for dy/dz = rhs(y).

    The right-hand side is re-evaluated at every stage, so state-dependent
    (nonlinear) systems integrate at full fourth order.
    """
    k1 = rhs(y)
    k2 = rhs(y + (0.5 * h) * k1)
    k3 = rhs(y + (0.5 * h) * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Dense real symmetric hopping matrix with zero diagonal."""

    species: Species
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"matrix must be square, got shape {m.shape}")
        scale = max(np.abs(m).max(), 1.0)
        if np.abs(m - m.T).max() > 1e-9 * scale:
            raise ParameterError("hopping matrix must be symmetric")
        if np.abs(np.diag(m)).max() > 1e-9 * scale:
            raise ParameterError("hopping matrix must have zero diagonal")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_sites(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_profile(cls, profile: CouplingProfile) -> "HamiltonianMatrix":
        config = profile.config
        n = config.n_sites
        m = np.zeros((n, n))
        chain = profile.values[: n - 1]
        idx = np.arange(n - 1)
        m[idx, idx + 1] = chain
        m[idx + 1, idx] = chain
        if config.is_periodic:
            m[0, n - 1] = m[n - 1, 0] = profile.values[n - 1]
        return cls(species=profile.species, matrix=m)


class _CouplingEngine:
    """Vectorised coupling/Hamiltonian evaluation for one species.

    Precomputes the static (disordered) profile and index arrays for the
    nonlinear bonds so per-stage evaluations stay allocation-light.
    """

    def __init__(
        self,
        config: LatticeConfig,
        species: Species,
        disorder: DisorderRealization | None = None,
    ) -> None:
        self.config = config
        self.species = Species(species)
        base = base_couplings(config, self.species)
        if disorder is not None:
            if disorder.multipliers.shape != base.values.shape:
                raise DimensionError(
                    f"realization has {disorder.multipliers.shape[0]} multipliers, "
                    f"lattice has {config.n_bonds} bonds"
                )
            mults = np.array(disorder.multipliers)
        else:
            mults = np.ones(config.n_bonds)
        self.static_values = base.values * mults
        c = config.couplings[self.species]
        self.v_long = c.v_long
        self.nu = c.nu
        nb = sorted(config.bond_offset(j) for j in config.nonlinear_bonds)
        self.nb = np.asarray(nb, dtype=int)
        self.nb_mults = mults[self.nb] if nb else np.empty(0)
        sites_a, sites_b = [], []
        for j in sorted(config.nonlinear_bonds):
            a, b = config.bond_sites(j)
            sites_a.append(config.site_offset(a))
            sites_b.append(config.site_offset(b))
        self.nb_site_a = np.asarray(sites_a, dtype=int)
        self.nb_site_b = np.asarray(sites_b, dtype=int)

    def couplings(self, amps: np.ndarray) -> np.ndarray:
        v = self.static_values.copy()
        if self.nb.size:
            local = (
                np.abs(amps[self.nb_site_a]) ** 2 + np.abs(amps[self.nb_site_b]) ** 2
            )
            v[self.nb] = (self.v_long + self.nu * local) * self.nb_mults
        return v

    def profile(self, amps: np.ndarray) -> CouplingProfile:
        return CouplingProfile(
            species=self.species, values=self.couplings(amps), config=self.config
        )

    def matrix(self, amps: np.ndarray) -> np.ndarray:
        n = self.config.n_sites
        v = self.couplings(amps)
        m = np.zeros((n, n))
        idx = np.arange(n - 1)
        m[idx, idx + 1] = v[: n - 1]
        m[idx + 1, idx] = v[: n - 1]
        if self.config.is_periodic:
            m[0, n - 1] = m[n - 1, 0] = v[n - 1]
        return m

    def rhs(self, amps: np.ndarray) -> np.ndarray:
        """-i H(amps) @ amps without building the dense matrix."""
        n = self.config.n_sites
        v = self.couplings(amps)
        out = np.zeros(n, dtype=complex)
        chain = v[: n - 1]
        out[1:] += chain * amps[:-1]
        out[:-1] += chain * amps[1:]
        if self.config.is_periodic:
            out[0] += v[n - 1] * amps[n - 1]
            out[n - 1] += v[n - 1] * amps[0]
        return -1j * out

    def advance(self, amps: np.ndarray, spec: IntegratorSpec) -> np.ndarray:
        h = spec.micro_dz
        out = amps
        for _ in range(spec.substeps):
            out = rk4_step(self.rhs, out, h)
        return out


def inject_pump(config: LatticeConfig, site: int, power: float) -> PumpState:
    """Single-site excitation carrying the full pump power, at z = 0."""
    if power < 0.0:
        raise ParameterError(f"pump power must be non-negative, got {power}")
    amps = np.zeros(config.n_sites, dtype=complex)
    amps[config.site_offset(site)] = np.sqrt(power)
    return PumpState(amplitudes=amps, z=0.0)


def pump_hamiltonian(
    state: PumpState,
    config: LatticeConfig,
    *,
    species: Species = Species.PUMP,
    disorder: DisorderRealization | None = None,
) -> HamiltonianMatrix:
    """Instantaneous hopping matrix seen by ``species`` under this pump field."""
    if state.n_sites != config.n_sites:
        raise DimensionError(
            f"state has {state.n_sites} sites, lattice has {config.n_sites}"
        )
    engine = _CouplingEngine(config, species, disorder)
    return HamiltonianMatrix(species=Species(species), matrix=engine.matrix(state.amplitudes))


def step_pump(
    state: PumpState,
    spec: IntegratorSpec,
    config: LatticeConfig,
    disorder: DisorderRealization | None = None,
) -> PumpState:
    """Advance the pump by one recorded step of size dz."""
    if state.n_sites != config.n_sites:
        raise DimensionError(
            f"state has {state.n_sites} sites, lattice has {config.n_sites}"
        )
    engine = _CouplingEngine(config, Species.PUMP, disorder)
    spec.ensure_stable(float(engine.static_values.max()))
    amps = engine.advance(state.amplitudes, spec)
    return PumpState(amplitudes=amps, z=state.z + spec.dz)


@dataclass(eq=False)
class PumpTrajectory:
    """Recorded pump evolution plus lazy access to per-step Hamiltonians."""

    config: LatticeConfig
    spec: IntegratorSpec
    states: list[PumpState]
    disorder: DisorderRealization | None = None
    _engines: dict = field(default_factory=dict, repr=False)

    @property
    def n_steps(self) -> int:
        return len(self.states) - 1

    def z_grid(self) -> np.ndarray:
        return np.array([s.z for s in self.states])

    def amplitudes(self) -> np.ndarray:
        """Complex array of shape (n_steps + 1, n_sites)."""
        return np.array([s.amplitudes for s in self.states])

    def intensities(self) -> np.ndarray:
        """Per-site intensities, shape (n_steps + 1, n_sites)."""
        return np.abs(self.amplitudes()) ** 2

    def total_intensities(self) -> np.ndarray:
        return np.array([s.total_intensity() for s in self.states])

    def _engine(self, species: Species) -> _CouplingEngine:
        key = Species(species)
        if key not in self._engines:
            self._engines[key] = _CouplingEngine(self.config, key, self.disorder)
        return self._engines[key]

    def couplings_at(self, step: int, species: Species = Species.PUMP) -> CouplingProfile:
        return self._engine(species).profile(self.states[step].amplitudes)

    def hamiltonian(self, step: int, species: Species = Species.PUMP) -> HamiltonianMatrix:
        matrix = self._engine(species).matrix(self.states[step].amplitudes)
        return HamiltonianMatrix(species=Species(species), matrix=matrix)


def evolve_pump(
    initial: PumpState,
    spec: IntegratorSpec,
    config: LatticeConfig,
    disorder: DisorderRealization | None = None,
) -> PumpTrajectory:
    """Propagate the pump over the full grid, recording every step.

    Raises NumericFailureError naming the step if the field stops being
    finite (e.g. an unstable configuration slipped past the entry guard).
    """
    if initial.n_sites != config.n_sites:
        raise DimensionError(
            f"state has {initial.n_sites} sites, lattice has {config.n_sites}"
        )
    engine = _CouplingEngine(config, Species.PUMP, disorder)
    spec.ensure_stable(float(engine.static_values.max()))
    states = [PumpState(amplitudes=initial.amplitudes, z=initial.z)]
    amps = initial.amplitudes
    z = initial.z
    for k in range(spec.n_steps):
        amps = engine.advance(amps, spec)
        z = initial.z + (k + 1) * spec.dz
        if not np.all(np.isfinite(amps.view(float))):
            raise NumericFailureError(
                f"pump integration produced non-finite amplitudes at step {k + 1}"
            )
        states.append(PumpState(amplitudes=amps, z=z))
    return PumpTrajectory(config=config, spec=spec, states=states, disorder=disorder)
