"""Spectral diagnostics: zero modes, isolated levels, winding, overlaps.

All Hamiltonians here are real symmetric hopping matrices, so spectra are
real and eigenvectors can be kept real.  The chain is chiral (bipartite,
zero diagonal) up to the wrap bond of a periodic odd ring, which frustrates
the sublattice structure; pairing-sensitive checks therefore apply to open
chains, while defect diagnostics run on either boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dynamics import HamiltonianMatrix
from .errors import (
    ContractViolationError,
    DegenerateInputError,
    DimensionError,
    GaplessError,
    ParameterError,
)
from .lattice import Species

__all__ = [
    "SpectrumSnapshot",
    "WindingInput",
    "OverlapResult",
    "diagonalize",
    "winding_number",
    "isolated_modes",
    "gap_top",
    "overlap",
    "localization_profile",
    "defect_region_fraction",
]

DEFAULT_ISOLATION_FACTOR = 5.0

# residual and pairing tolerances, relative to the spectral norm of H
_RESIDUAL_RTOL = 1e-10


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    """Deterministic sign: the largest-magnitude entry is made positive."""
    idx = int(np.argmax(np.abs(vec)))
    return -vec if vec[idx] < 0 else vec.copy()


def _zero_index(lam: np.ndarray, vecs: np.ndarray) -> int:
    """Index of the zero mode: min |lambda|, ties broken by defect density."""
    n = lam.shape[0]
    norm = max(float(np.abs(lam).max()), 1.0)
    absl = np.abs(lam)
    candidates = np.flatnonzero(absl <= absl.min() + 1e-12 * norm)
    if candidates.size == 1:
        return int(candidates[0])
    half = (n - 1) // 2
    window = slice(max(half - 2, 0), min(half + 3, n))
    density = np.sum(vecs[window, :][:, candidates] ** 2, axis=0)
    return int(candidates[int(np.argmax(density))])


def _isolated_flags(eigenvalues: np.ndarray, factor: float) -> np.ndarray:
    if factor <= 1.0:
        raise ParameterError(f"isolation factor must exceed 1, got {factor}")
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size < 5:
        raise DegenerateInputError(
            f"isolation analysis needs at least 5 eigenvalues, got {lam.size}"
        )
    gaps = np.diff(lam)
    median = float(np.median(gaps))
    dist = np.empty_like(lam)
    dist[0] = gaps[0]
    dist[-1] = gaps[-1]
    dist[1:-1] = np.minimum(gaps[:-1], gaps[1:])
    return dist > factor * median


@dataclass(frozen=True, eq=False)
class SpectrumSnapshot:
    """Full spectrum of one instantaneous Hamiltonian plus tagged modes.

    Tagged eigenvectors (zero / max / min) are real unit vectors with the
    largest-magnitude entry positive; ``isolated`` flags every level whose
    distance to its nearest neighbour exceeds ``isolation_factor`` times
    the median adjacent spacing.
    """

    step: int
    eigenvalues: np.ndarray
    zero_mode: np.ndarray
    max_mode: np.ndarray
    min_mode: np.ndarray
    zero_index: int
    max_index: int
    min_index: int
    isolated: np.ndarray
    gap_top: float
    isolation_factor: float = DEFAULT_ISOLATION_FACTOR
    species: Species | None = None

    def __post_init__(self) -> None:
        lam = np.array(self.eigenvalues, dtype=float)
        if np.any(np.diff(lam) < 0):
            raise ParameterError("eigenvalues must be sorted ascending")
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        for name in ("zero_mode", "max_mode", "min_mode"):
            vec = np.array(getattr(self, name), dtype=float)
            if vec.shape != lam.shape:
                raise DimensionError(f"{name} length {vec.shape} != spectrum size")
            if abs(np.linalg.norm(vec) - 1.0) > 1e-8:
                raise ParameterError(f"{name} must be a unit vector")
            vec.setflags(write=False)
            object.__setattr__(self, name, vec)
        flags = np.array(self.isolated, dtype=bool)
        flags.setflags(write=False)
        object.__setattr__(self, "isolated", flags)

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.shape[0]

    def zero_eigenvalue(self) -> float:
        return float(self.eigenvalues[self.zero_index])


def diagonalize(
    H: HamiltonianMatrix | np.ndarray,
    *,
    step: int = 0,
    isolation_factor: float = DEFAULT_ISOLATION_FACTOR,
) -> SpectrumSnapshot:
    """Diagonalize a real symmetric Hamiltonian and tag its key modes.

    The zero mode is the eigenvalue of minimum |lambda|, ties broken by
    larger probability density on the defect region |j| <= 2; max/min are
    the extremal eigenvalues.  Raises ContractViolationError when the
    input is not symmetric or an eigenpair residual exceeds 1e-10 * ||H||.
    """
    species: Species | None = None
    if isinstance(H, HamiltonianMatrix):
        species = H.species
        matrix = H.matrix
    else:
        matrix = np.asarray(H, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {matrix.shape}")
        scale = max(float(np.abs(matrix).max()), 1.0)
        if float(np.abs(matrix - matrix.T).max()) > 1e-9 * scale:
            raise ContractViolationError("diagonalize requires a symmetric matrix")
    n = matrix.shape[0]
    if n < 2:
        raise DegenerateInputError(f"need at least 2 sites, got {n}")

    lam, vecs = np.linalg.eigh(matrix)
    norm = max(float(np.abs(lam).max()), 1.0)
    residual = np.abs(matrix @ vecs - vecs * lam).max()
    if residual > _RESIDUAL_RTOL * norm:
        raise ContractViolationError(
            f"eigenpair residual {residual:.3e} exceeds {_RESIDUAL_RTOL:g} * ||H||"
        )

    zero_index = _zero_index(lam, vecs)
    # isolation is meaningless for tiny spectra; flag nothing below 5 levels
    if n >= 5:
        flags = _isolated_flags(lam, isolation_factor)
    else:
        if isolation_factor <= 1.0:
            raise ParameterError(
                f"isolation factor must exceed 1, got {isolation_factor}"
            )
        flags = np.zeros(n, dtype=bool)
    return SpectrumSnapshot(
        step=step,
        eigenvalues=lam,
        zero_mode=_fix_sign(vecs[:, zero_index]),
        max_mode=_fix_sign(vecs[:, n - 1]),
        min_mode=_fix_sign(vecs[:, 0]),
        zero_index=zero_index,
        max_index=n - 1,
        min_index=0,
        isolated=flags,
        gap_top=float(lam[-1] - lam[-2]),
        isolation_factor=isolation_factor,
        species=species,
    )


@dataclass(frozen=True)
class WindingInput:
    """Bulk two-band hopping pair (u intra-cell, v inter-cell) plus k grid."""

    u: float
    v: float
    n_k: int = 256

    def __post_init__(self) -> None:
        if self.u <= 0.0 or self.v <= 0.0:
            raise ParameterError(
                f"hoppings must be positive, got u={self.u}, v={self.v}"
            )
        if self.u == self.v:
            raise GaplessError("winding undefined at u = v (gap closes)")
        if self.n_k < 64:
            raise ParameterError(f"n_k must be at least 64, got {self.n_k}")


def winding_number(inp: WindingInput) -> int:
    """Winding of the off-diagonal bulk block h(k) around the origin.

    Discretized as the sum of principal-branch phase increments of h(k)
    over one Brillouin zone, divided by 2 pi and rounded; the orientation
    is fixed so that u < v gives +1.
    """
    k = np.linspace(-np.pi, np.pi, inp.n_k, endpoint=False)
    h = inp.u + inp.v * np.exp(1j * k)
    increments = np.angle(np.roll(h, -1) / h)
    return int(round(float(increments.sum()) / (2.0 * np.pi)))


def isolated_modes(
    snapshot: SpectrumSnapshot, factor: float | None = None
) -> list[int]:
    """Indices of levels separated from the rest of the spectrum.

    A level is isolated iff its distance to the nearest other eigenvalue
    exceeds ``factor`` times the median adjacent spacing.
    """
    use = snapshot.isolation_factor if factor is None else factor
    return [int(i) for i in np.flatnonzero(_isolated_flags(snapshot.eigenvalues, use))]


def gap_top(snapshot: SpectrumSnapshot) -> float:
    """Gap between the largest eigenvalue and the next one below (1/m)."""
    return snapshot.gap_top


class OverlapResult(NamedTuple):
    inner: float
    density: float


def overlap(mode_a: np.ndarray, mode_b: np.ndarray) -> OverlapResult:
    """Two overlap diagnostics between unit vectors.

    ``inner`` = |<a|b>| vanishes between distinct eigenvectors of one
    Hamiltonian; ``density`` = sum_j |a_j| |b_j| measures shared spatial
    support and is the quantity used for qualitative mode-overlap claims.
    """
    a = np.asarray(mode_a, dtype=float)
    b = np.asarray(mode_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"mode shapes differ: {a.shape} vs {b.shape}")
    for name, vec in (("mode_a", a), ("mode_b", b)):
        if abs(np.linalg.norm(vec) - 1.0) > 1e-8:
            raise ParameterError(f"{name} must be a unit vector")
    return OverlapResult(
        inner=float(abs(np.dot(a, b))),
        density=float(np.sum(np.abs(a) * np.abs(b))),
    )


def localization_profile(mode: np.ndarray) -> np.ndarray:
    """Per-site probabilities |v_j|^2 of a unit vector."""
    vec = np.asarray(mode, dtype=float)
    if vec.ndim != 1:
        raise DimensionError(f"mode must be a vector, got shape {vec.shape}")
    if abs(np.linalg.norm(vec) - 1.0) > 1e-8:
        raise ParameterError("mode must be a unit vector")
    return vec**2


def defect_region_fraction(
    weights: np.ndarray, *, radius: int = 2
) -> float:
    """Fraction of a site-indexed non-negative distribution within |j| <= radius.

    ``weights`` runs over sites -N..N; a zero-total input yields 0.0.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size % 2 == 0:
        raise DimensionError(
            f"weights must cover an odd-length site range, got shape {w.shape}"
        )
    if radius < 0:
        raise ParameterError(f"radius must be non-negative, got {radius}")
    total = float(w.sum())
    if total <= 0.0:
        return 0.0
    half = (w.size - 1) // 2
    lo, hi = max(half - radius, 0), min(half + radius, w.size - 1)
    return float(w[lo : hi + 1].sum()) / total
