"""Photon-pair generation and transport on the pumped lattice.

The two-photon amplitude matrix M (rows: idler site, columns: signal site)
starts at zero and per step undergoes the frozen-Hamiltonian hop plus a
diagonal source injection,

    M  <-  U_i M U_s^T - i gamma dz diag(alpha_j^2),

with the propagators and the pump field both taken at the start of the
step.  The source uses the complex square of the pump amplitude, so pump
phase is imprinted on the generated pairs.  M is never normalized during
evolution; observables divide by its Frobenius norm where needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import HamiltonianMatrix, IntegratorSpec, PumpTrajectory, PumpState, _CouplingEngine
from .errors import (
    ContractViolationError,
    DimensionError,
    NumericFailureError,
    ParameterError,
)
from .lattice import Species
from .spectral import SpectrumSnapshot, _fix_sign, _zero_index

__all__ = [
    "BiphotonState",
    "StepPropagators",
    "BiphotonRecord",
    "propagator",
    "step_biphoton",
    "evolve_biphoton",
    "site_populations",
    "topological_weight",
    "UNITARITY_TOL",
]

UNITARITY_TOL = 1e-10

WEIGHT_MODE_STATIC = "static"
WEIGHT_MODE_INSTANTANEOUS = "instantaneous"
WEIGHT_MODES = (WEIGHT_MODE_STATIC, WEIGHT_MODE_INSTANTANEOUS)


@dataclass(frozen=True, eq=False)
class BiphotonState:
    """Unnormalized two-photon amplitudes; entry (j, k) = idler j, signal k."""

    matrix: np.ndarray
    step: int = 0
    z: float = 0.0

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"biphoton matrix must be square, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_sites(self) -> int:
        return self.matrix.shape[0]

    def frob_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    @classmethod
    def vacuum(cls, n_sites: int) -> "BiphotonState":
        return cls(matrix=np.zeros((n_sites, n_sites), dtype=complex))


def _unitarity_defect(u: np.ndarray) -> float:
    n = u.shape[0]
    return float(np.abs(u.conj().T @ u - np.eye(n)).max())


@dataclass(frozen=True, eq=False)
class StepPropagators:
    """Frozen one-step unitaries for the idler and signal species."""

    idler: np.ndarray
    signal: np.ndarray

    def __post_init__(self) -> None:
        for name in ("idler", "signal"):
            u = np.array(getattr(self, name), dtype=complex)
            if u.ndim != 2 or u.shape[0] != u.shape[1]:
                raise DimensionError(f"{name} propagator must be square, got {u.shape}")
            u.setflags(write=False)
            object.__setattr__(self, name, u)
        if self.idler.shape != self.signal.shape:
            raise DimensionError("idler and signal propagators differ in size")

    def max_unitarity_defect(self) -> float:
        return max(_unitarity_defect(self.idler), _unitarity_defect(self.signal))

    def validate(self) -> None:
        defect = self.max_unitarity_defect()
        if defect > UNITARITY_TOL:
            raise ContractViolationError(
                f"propagator unitarity defect {defect:.3e} exceeds {UNITARITY_TOL:g}"
            )


def propagator(H: HamiltonianMatrix | np.ndarray, dz: float) -> np.ndarray:
    """U = exp(-i H dz) through the spectral decomposition of H."""
    matrix = H.matrix if isinstance(H, HamiltonianMatrix) else np.asarray(H, dtype=float)
    if dz <= 0.0:
        raise ParameterError(f"dz must be positive, got {dz}")
    lam, vecs = np.linalg.eigh(matrix)
    return (vecs * np.exp(-1j * lam * dz)) @ vecs.T


def step_biphoton(
    state: BiphotonState,
    props: StepPropagators,
    pump: PumpState,
    gamma: float,
    dz: float,
) -> BiphotonState:
    """One combined hop-plus-source step of the two-photon matrix."""
    n = state.n_sites
    if props.idler.shape != (n, n):
        raise DimensionError(
            f"propagators are {props.idler.shape}, state is {state.matrix.shape}"
        )
    if pump.n_sites != n:
        raise DimensionError(f"pump has {pump.n_sites} sites, state has {n}")
    if gamma < 0.0:
        raise ParameterError(f"gamma must be non-negative, got {gamma}")
    if dz <= 0.0:
        raise ParameterError(f"dz must be positive, got {dz}")
    m = props.idler @ state.matrix @ props.signal.T
    m[np.diag_indices(n)] -= 1j * gamma * dz * pump.amplitudes**2
    return BiphotonState(matrix=m, step=state.step + 1, z=state.z + dz)


def site_populations(state: BiphotonState | np.ndarray) -> np.ndarray:
    """Normalized per-site pair population (idler and signal marginals averaged).

    A zero-norm state yields an all-zero vector rather than an error.
    """
    m = state.matrix if isinstance(state, BiphotonState) else np.asarray(state, dtype=complex)
    sq = np.abs(m) ** 2
    total = float(sq.sum())
    if total <= 0.0:
        return np.zeros(m.shape[0])
    return (sq.sum(axis=1) + sq.sum(axis=0)) / (2.0 * total)


def topological_weight(
    state: BiphotonState | np.ndarray,
    snapshot_s: SpectrumSnapshot,
    snapshot_i: SpectrumSnapshot,
    *,
    extended: bool = False,
) -> float:
    """Population fraction of the pair state on the joint zero-mode pair.

    w = |phi_i^T M phi_s|^2 / ||M||_F^2 with the signal/idler zero modes of
    the given snapshots; a zero-norm M gives 0.  With ``extended`` the sum
    runs over all pairs of isolated tagged modes (zero/max/min) instead of
    the zero-zero pair alone.
    """
    m = state.matrix if isinstance(state, BiphotonState) else np.asarray(state, dtype=complex)
    n = m.shape[0]
    if snapshot_s.n_modes != n or snapshot_i.n_modes != n:
        raise DimensionError(
            f"snapshots cover {snapshot_s.n_modes}/{snapshot_i.n_modes} modes, "
            f"state has {n} sites"
        )
    total = float(np.sum(np.abs(m) ** 2))
    if total <= 0.0:
        return 0.0
    if not extended:
        amp = snapshot_i.zero_mode @ m @ snapshot_s.zero_mode
        return float(abs(amp) ** 2) / total

    def _tagged_isolated(snap: SpectrumSnapshot) -> list[np.ndarray]:
        pairs = [
            (snap.zero_index, snap.zero_mode),
            (snap.max_index, snap.max_mode),
            (snap.min_index, snap.min_mode),
        ]
        seen: set[int] = set()
        out = []
        for idx, vec in pairs:
            if idx in seen or not snap.isolated[idx]:
                continue
            seen.add(idx)
            out.append(vec)
        return out

    weight = 0.0
    for phi_i in _tagged_isolated(snapshot_i):
        for phi_s in _tagged_isolated(snapshot_s):
            weight += float(abs(phi_i @ m @ phi_s) ** 2)
    return weight / total


@dataclass(eq=False)
class BiphotonRecord:
    """Per-step observables of one biphoton evolution.

    ``weights[k]`` and ``populations[k]`` describe the state after k steps;
    index 0 is the vacuum.  ``history`` holds every BiphotonState only when
    requested (it is n_steps copies of an n x n complex matrix).
    """

    z_grid: np.ndarray
    populations: np.ndarray
    frob_norms: np.ndarray
    weights: np.ndarray
    final_state: BiphotonState
    weight_modes: str
    max_unitarity_defect: float
    history: list[BiphotonState] | None = None

    @property
    def n_steps(self) -> int:
        return self.z_grid.shape[0] - 1

    def final_weight(self) -> float:
        return float(self.weights[-1])


def _zero_mode_of(matrix: np.ndarray) -> np.ndarray:
    lam, vecs = np.linalg.eigh(matrix)
    return _fix_sign(vecs[:, _zero_index(lam, vecs)])


def evolve_biphoton(
    trajectory: PumpTrajectory,
    *,
    gamma: float | None = None,
    weight_modes: str = WEIGHT_MODE_STATIC,
    disorder_signal=None,
    disorder_idler=None,
    validate_propagators: bool = False,
    keep_history: bool = False,
) -> BiphotonRecord:
    """Drive the two-photon state across a recorded pump trajectory.

    Every step freezes the signal/idler Hamiltonians at the step's initial
    pump field, applies their unitaries and injects the diagonal source.
    The topological weight is evaluated against either the zero-pump zero
    modes (``weight_modes='static'``, the as-built topological mode of the
    chip, disorder included) or the per-step instantaneous zero modes
    (``weight_modes='instantaneous'``).  Signal/idler disorder defaults to
    the trajectory's realization; pass ``disorder_signal``/``disorder_idler``
    for species-independent draws.
    """
    if weight_modes not in WEIGHT_MODES:
        raise ParameterError(
            f"weight_modes must be one of {WEIGHT_MODES}, got {weight_modes!r}"
        )
    config = trajectory.config
    spec: IntegratorSpec = trajectory.spec
    g = config.gamma if gamma is None else float(gamma)
    if g < 0.0:
        raise ParameterError(f"gamma must be non-negative, got {g}")
    n = config.n_sites
    n_steps = trajectory.n_steps
    dz = spec.dz

    dis_s = trajectory.disorder if disorder_signal is None else disorder_signal
    dis_i = trajectory.disorder if disorder_idler is None else disorder_idler
    eng_s = _CouplingEngine(config, Species.SIGNAL, dis_s)
    eng_i = _CouplingEngine(config, Species.IDLER, dis_i)

    static_s = static_i = None
    if weight_modes == WEIGHT_MODE_STATIC:
        dark = np.zeros(n, dtype=complex)
        static_s = _zero_mode_of(eng_s.matrix(dark))
        static_i = _zero_mode_of(eng_i.matrix(dark))

    populations = np.zeros((n_steps + 1, n))
    frob_norms = np.zeros(n_steps + 1)
    weights = np.zeros(n_steps + 1)
    history: list[BiphotonState] | None = [] if keep_history else None
    max_defect = 0.0

    def _weight(m: np.ndarray, lam_s, vecs_s, lam_i, vecs_i) -> float:
        total = float(np.sum(np.abs(m) ** 2))
        if total <= 0.0:
            return 0.0
        if weight_modes == WEIGHT_MODE_STATIC:
            phi_s, phi_i = static_s, static_i
        else:
            phi_s = _fix_sign(vecs_s[:, _zero_index(lam_s, vecs_s)])
            phi_i = _fix_sign(vecs_i[:, _zero_index(lam_i, vecs_i)])
        return float(abs(phi_i @ m @ phi_s) ** 2) / total

    m = np.zeros((n, n), dtype=complex)
    diag = np.diag_indices(n)
    if keep_history:
        history.append(BiphotonState(matrix=m, step=0, z=trajectory.states[0].z))
    for k in range(n_steps + 1):
        amps = trajectory.states[k].amplitudes
        lam_s, vecs_s = np.linalg.eigh(eng_s.matrix(amps))
        lam_i, vecs_i = np.linalg.eigh(eng_i.matrix(amps))

        populations[k] = site_populations(m)
        frob_norms[k] = float(np.linalg.norm(m))
        weights[k] = _weight(m, lam_s, vecs_s, lam_i, vecs_i)

        if k == n_steps:
            break
        u_s = (vecs_s * np.exp(-1j * lam_s * dz)) @ vecs_s.T
        u_i = (vecs_i * np.exp(-1j * lam_i * dz)) @ vecs_i.T
        if validate_propagators:
            defect = max(_unitarity_defect(u_i), _unitarity_defect(u_s))
            max_defect = max(max_defect, defect)
            if defect > UNITARITY_TOL:
                raise ContractViolationError(
                    f"propagator unitarity defect {defect:.3e} at step {k + 1} "
                    f"exceeds {UNITARITY_TOL:g}"
                )
        m = u_i @ m @ u_s.T
        m[diag] -= 1j * g * dz * amps**2
        if not np.all(np.isfinite(m.view(float))):
            raise NumericFailureError(
                f"biphoton update produced non-finite amplitudes at step {k + 1}"
            )
        if keep_history:
            history.append(
                BiphotonState(matrix=m, step=k + 1, z=trajectory.states[k + 1].z)
            )

    final = BiphotonState(matrix=m, step=n_steps, z=trajectory.states[-1].z)
    return BiphotonRecord(
        z_grid=trajectory.z_grid(),
        populations=populations,
        frob_norms=frob_norms,
        weights=weights,
        final_state=final,
        weight_modes=weight_modes,
        max_unitarity_defect=max_defect,
        history=history,
    )
