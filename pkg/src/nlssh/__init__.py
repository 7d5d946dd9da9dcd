"""Nonlinear SSH waveguide lattice simulator.

A pump field propagating on a defected SSH chain reshapes two central
couplings through its own intensity, driving the chip between trivial and
topological regimes; spontaneous four-wave mixing populates a two-photon
matrix state whose overlap with the defect zero modes tracks the transition.
The package exposes the lattice/dynamics/spectral/biphoton building blocks,
ensemble orchestration, and a CLI that writes deterministic CSV artifacts.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    ContractViolationError,
    DegenerateInputError,
    DimensionError,
    GaplessError,
    NumericFailureError,
    ParameterError,
    SimulationError,
)
from .lattice import (
    Boundary,
    BondClass,
    CouplingProfile,
    DefectKind,
    DisorderRealization,
    LatticeConfig,
    Species,
    SpeciesCouplings,
    apply_disorder,
    base_couplings,
    classify_bond,
    effective_couplings,
    reference_lattice,
)
from .dynamics import (
    HamiltonianMatrix,
    IntegratorSpec,
    PumpState,
    PumpTrajectory,
    evolve_pump,
    inject_pump,
    pump_hamiltonian,
    rk4_step,
    step_pump,
)
from .spectral import (
    SpectrumSnapshot,
    WindingInput,
    defect_region_fraction,
    diagonalize,
    gap_top,
    isolated_modes,
    localization_profile,
    overlap,
    winding_number,
)
from .biphoton import (
    BiphotonRecord,
    BiphotonState,
    StepPropagators,
    evolve_biphoton,
    propagator,
    site_populations,
    step_biphoton,
    topological_weight,
)
from .ensemble import (
    AggregateResult,
    DisorderPlan,
    EvolutionResult,
    SweepPlan,
    SweepResult,
    derive_seed,
    run_disorder_study,
    run_power_sweep,
    run_single,
)
