"""Lattice geometry and coupling profiles for a defected SSH waveguide chain.

Sites carry integer indices j in [-N, N] with the defect centred on j = 0,
so a chain of ``n_sites`` waveguides has half-width N = (n_sites - 1) // 2.
Bond j couples sites j and j+1; under periodic boundary conditions an extra
wrap bond with index N couples site N back to site -N, closing the ring.

Bond classes follow a strict alternation of long (weak) and short (strong)
couplings away from the defect.  A ``long_long`` defect replaces the two
central bonds by long couplings whose strength responds to the local pump
intensity; a ``short_short`` defect replaces them by short couplings and has
no intensity-dependent bonds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .errors import DimensionError, ParameterError

__all__ = [
    "Species",
    "DefectKind",
    "Boundary",
    "BondClass",
    "SpeciesCouplings",
    "LatticeConfig",
    "CouplingProfile",
    "DisorderRealization",
    "reference_lattice",
    "classify_bond",
    "base_couplings",
    "effective_couplings",
    "apply_disorder",
]


class Species(str, Enum):
    """Optical species propagating on the lattice."""

    PUMP = "pump"
    SIGNAL = "signal"
    IDLER = "idler"


class DefectKind(str, Enum):
    LONG_LONG = "long_long"
    SHORT_SHORT = "short_short"


class Boundary(str, Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class BondClass(str, Enum):
    """Coupling class of a single bond."""

    LONG = "L"
    SHORT = "S"
    NONLINEAR = "N"


@dataclass(frozen=True)
class SpeciesCouplings:
    """Per-species coupling constants.

    Parameters
    ----------
    v_long : float
        Weak (long-gap) coupling in 1/m.
    v_short : float
        Strong (short-gap) coupling in 1/m.
    nu : float
        Intensity response of nonlinear bonds in 1/(W m).
    """

    v_long: float
    v_short: float
    nu: float

    def __post_init__(self) -> None:
        if not (0.0 < self.v_long < self.v_short):
            raise ParameterError(
                f"couplings must satisfy 0 < v_long < v_short, "
                f"got v_long={self.v_long}, v_short={self.v_short}"
            )
        if self.nu < 0.0:
            raise ParameterError(f"nu must be non-negative, got {self.nu}")


def _default_nonlinear_bonds(kind: DefectKind) -> frozenset[int]:
    return frozenset({-1, 0}) if kind is DefectKind.LONG_LONG else frozenset()


@dataclass(frozen=True)
class LatticeConfig:
    """Immutable description of one waveguide chain.

    ``nonlinear_bonds`` lists the bond indices whose coupling responds to
    the pump intensity.  If omitted it defaults to the two central bonds
    for a long-long defect and to the empty set otherwise.
    """

    couplings: Mapping[Species, SpeciesCouplings]
    n_sites: int = 103
    defect_kind: DefectKind = DefectKind.LONG_LONG
    boundary: Boundary = Boundary.PERIODIC
    gamma: float = 120.0
    defect_center: int = 0
    nonlinear_bonds: frozenset[int] | None = None

    def __post_init__(self) -> None:
        if self.n_sites < 5 or self.n_sites % 2 == 0:
            raise ParameterError(
                f"n_sites must be an odd integer >= 5, got {self.n_sites}"
            )
        if self.defect_center != 0:
            raise ParameterError(
                "sites are re-indexed so the defect sits at 0; "
                f"defect_center must be 0, got {self.defect_center}"
            )
        if self.gamma < 0.0:
            raise ParameterError(f"gamma must be non-negative, got {self.gamma}")
        missing = [s.value for s in Species if s not in self.couplings]
        if missing:
            raise ParameterError(f"couplings missing species: {missing}")
        object.__setattr__(
            self, "couplings", {Species(k): v for k, v in self.couplings.items()}
        )
        if self.nonlinear_bonds is None:
            object.__setattr__(
                self, "nonlinear_bonds", _default_nonlinear_bonds(self.defect_kind)
            )
        else:
            object.__setattr__(self, "nonlinear_bonds", frozenset(self.nonlinear_bonds))
        if self.defect_kind is DefectKind.SHORT_SHORT and self.nonlinear_bonds:
            raise ParameterError(
                "a short_short defect has no intensity-dependent bonds; "
                "nonlinear_bonds must be empty"
            )
        lo, hi = -self.half_width, self.half_width if self.is_periodic else self.half_width - 1
        bad = [j for j in self.nonlinear_bonds if not lo <= j <= hi]
        if bad:
            raise ParameterError(f"nonlinear bond indices out of range [{lo}, {hi}]: {bad}")

    @property
    def half_width(self) -> int:
        """Half-width N; sites run over [-N, N]."""
        return (self.n_sites - 1) // 2

    @property
    def is_periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def n_bonds(self) -> int:
        """Number of bonds: n_sites on a ring, n_sites - 1 on an open chain."""
        return self.n_sites if self.is_periodic else self.n_sites - 1

    def sites(self) -> np.ndarray:
        """Site indices, defect-centred: [-N, ..., N]."""
        n = self.half_width
        return np.arange(-n, n + 1)

    def bond_indices(self) -> np.ndarray:
        """Bond indices in storage order; the wrap bond N comes last."""
        n = self.half_width
        return np.arange(-n, n + 1) if self.is_periodic else np.arange(-n, n)

    def site_offset(self, j: int) -> int:
        """Array offset of site j."""
        n = self.half_width
        if not -n <= j <= n:
            raise IndexError(f"site index {j} outside [-{n}, {n}]")
        return j + n

    def bond_offset(self, j: int) -> int:
        """Array offset of bond j."""
        n = self.half_width
        hi = n if self.is_periodic else n - 1
        if not -n <= j <= hi:
            raise IndexError(f"bond index {j} outside [-{n}, {hi}]")
        return j + n

    def bond_sites(self, j: int) -> tuple[int, int]:
        """The pair of site indices bond j couples."""
        n = self.half_width
        self.bond_offset(j)
        if j == n:
            return n, -n
        return j, j + 1


def reference_lattice(
    *,
    n_sites: int = 103,
    defect_kind: DefectKind = DefectKind.LONG_LONG,
    boundary: Boundary = Boundary.PERIODIC,
) -> LatticeConfig:
    """The 103-waveguide reference chip with its measured couplings."""
    return LatticeConfig(
        couplings={
            Species.PUMP: SpeciesCouplings(v_long=14951.0, v_short=22118.0, nu=1078.0),
            Species.SIGNAL: SpeciesCouplings(v_long=13603.0, v_short=21882.0, nu=1078.0),
            Species.IDLER: SpeciesCouplings(v_long=14562.0, v_short=22162.0, nu=1078.0),
        },
        n_sites=n_sites,
        defect_kind=defect_kind,
        boundary=boundary,
        gamma=120.0,
    )


def classify_bond(j: int, config: LatticeConfig) -> BondClass:
    """Classify bond j as long, short, or nonlinear.

    Away from the centre the classes alternate; the two bonds adjacent to
    site 0 carry the defect.  Raises IndexError outside the bond range.
    """
    config.bond_offset(j)
    if j in config.nonlinear_bonds:
        return BondClass.NONLINEAR
    if j in (-1, 0):
        # central bonds carry the defect class itself
        if config.defect_kind is DefectKind.LONG_LONG:
            return BondClass.LONG
        return BondClass.SHORT
    short_parity = 1 if config.defect_kind is DefectKind.LONG_LONG else 0
    if j >= 1:
        return BondClass.SHORT if j % 2 == short_parity else BondClass.LONG
    return BondClass.SHORT if j % 2 == (1 - short_parity) else BondClass.LONG


@dataclass(frozen=True, eq=False)
class CouplingProfile:
    """Bond-indexed coupling strengths for one species.

    ``values[b]`` is the coupling of the bond with array offset b (see
    ``LatticeConfig.bond_offset``); units 1/m.
    """

    species: Species
    values: np.ndarray
    config: LatticeConfig

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.config.n_bonds,):
            raise DimensionError(
                f"expected {self.config.n_bonds} bond values, got shape {values.shape}"
            )
        if np.any(values <= 0.0):
            raise ParameterError("bond couplings must be strictly positive")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def value_at(self, j: int) -> float:
        return float(self.values[self.config.bond_offset(j)])


def base_couplings(config: LatticeConfig, species: Species) -> CouplingProfile:
    """Zero-pump coupling profile: the as-designed linear chip."""
    c = config.couplings[Species(species)]
    values = np.empty(config.n_bonds)
    for b, j in enumerate(config.bond_indices()):
        cls = classify_bond(int(j), config)
        values[b] = c.v_short if cls is BondClass.SHORT else c.v_long
    return CouplingProfile(species=Species(species), values=values, config=config)


def effective_couplings(
    base: CouplingProfile, pump_amplitudes: np.ndarray, nu: float
) -> CouplingProfile:
    """Instantaneous couplings under a given pump field.

    Each nonlinear bond j takes the value v_long + nu * (I_j + I_{j+1})
    where I is the pump intensity on the two sites it couples; all other
    bonds keep their base value.
    """
    config = base.config
    amps = np.asarray(pump_amplitudes)
    if amps.shape != (config.n_sites,):
        raise DimensionError(
            f"expected {config.n_sites} pump amplitudes, got shape {amps.shape}"
        )
    if nu < 0.0:
        raise ParameterError(f"nu must be non-negative, got {nu}")
    intensity = np.abs(amps) ** 2
    values = np.array(base.values)
    v_long = config.couplings[base.species].v_long
    for j in config.nonlinear_bonds:
        a, b = config.bond_sites(j)
        local = intensity[config.site_offset(a)] + intensity[config.site_offset(b)]
        values[config.bond_offset(j)] = v_long + nu * local
    return CouplingProfile(species=base.species, values=values, config=config)


@dataclass(frozen=True, eq=False)
class DisorderRealization:
    """One draw of static multiplicative bond disorder.

    Every multiplier lies in [1 - strength, 1 + strength]; the draw is a
    pure function of (strength, seed, n_bonds).
    """

    strength: float
    seed: int
    multipliers: np.ndarray

    def __post_init__(self) -> None:
        if not 0.0 <= self.strength <= 1.0:
            raise ParameterError(
                f"disorder strength must lie in [0, 1], got {self.strength}"
            )
        if self.seed < 0:
            raise ParameterError(f"seed must be non-negative, got {self.seed}")
        mults = np.array(self.multipliers, dtype=float)
        lo, hi = 1.0 - self.strength, 1.0 + self.strength
        if mults.size and (mults.min() < lo - 1e-12 or mults.max() > hi + 1e-12):
            raise ParameterError(
                f"multipliers outside [{lo}, {hi}] for strength {self.strength}"
            )
        mults.setflags(write=False)
        object.__setattr__(self, "multipliers", mults)

    @classmethod
    def draw(cls, strength: float, seed: int, n_bonds: int) -> "DisorderRealization":
        rng = np.random.Generator(np.random.PCG64(seed))
        mults = 1.0 + strength * (2.0 * rng.random(n_bonds) - 1.0)
        return cls(strength=strength, seed=seed, multipliers=mults)


def apply_disorder(
    profile: CouplingProfile, realization: DisorderRealization
) -> CouplingProfile:
    """Scale every bond of a profile by its disorder multiplier."""
    if realization.multipliers.shape != profile.values.shape:
        raise DimensionError(
            f"realization has {realization.multipliers.shape[0]} multipliers, "
            f"profile has {profile.values.shape[0]} bonds"
        )
    return CouplingProfile(
        species=profile.species,
        values=profile.values * realization.multipliers,
        config=profile.config,
    )
