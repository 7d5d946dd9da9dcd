"""Deterministic artifact writers: CSV tables, binary dump, JSON manifest.

Every float is printed with 17 significant digits so values round-trip
exactly; NaN cells (failed sweep cells) are written as empty strings.  The
manifest carries the schema version, the fully resolved configuration, all
seeds, and a sha256 per artifact, and contains no timestamps, so repeated
runs produce byte-identical trees.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .biphoton import BiphotonRecord
from .ensemble import AggregateResult, EvolutionResult, SweepResult
from .lattice import LatticeConfig
from .spectral import SpectrumSnapshot

__all__ = [
    "SCHEMA_VERSION",
    "fmt",
    "sha256_file",
    "write_pump_intensity",
    "write_biphoton_population",
    "write_biphoton_scalars",
    "write_final_state",
    "write_spectrum",
    "write_modes",
    "write_heatmap",
    "write_disorder_stats",
    "write_disorder_series",
    "write_manifest",
]

SCHEMA_VERSION = 1


def fmt(value) -> str:
    """17-significant-digit decimal, empty string for missing cells."""
    v = float(value)
    if math.isnan(v):
        return ""
    return f"{v:.17g}"


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_pump_intensity(out_dir: Path, result: EvolutionResult, config: LatticeConfig) -> str:
    name = "pump_intensity.csv"
    sites = config.sites()
    rows = []
    for k, z in enumerate(result.z_grid):
        zs = fmt(z)
        row_int = result.pump_intensities[k]
        rows.extend(
            [k, zs, int(site), fmt(row_int[off])] for off, site in enumerate(sites)
        )
    _write_rows(out_dir / name, ["step", "z_m", "site", "intensity_w"], rows)
    return name


def write_biphoton_population(
    out_dir: Path, record: BiphotonRecord, config: LatticeConfig
) -> str:
    name = "biphoton_population.csv"
    sites = config.sites()
    rows = []
    for k, z in enumerate(record.z_grid):
        zs = fmt(z)
        pops = record.populations[k]
        rows.extend(
            [k, zs, int(site), fmt(pops[off])] for off, site in enumerate(sites)
        )
    _write_rows(out_dir / name, ["step", "z_m", "site", "population"], rows)
    return name


def write_biphoton_scalars(out_dir: Path, record: BiphotonRecord) -> str:
    name = "biphoton_scalars.csv"
    rows = [
        [k, fmt(z), fmt(record.frob_norms[k]), fmt(record.weights[k])]
        for k, z in enumerate(record.z_grid)
    ]
    _write_rows(out_dir / name, ["step", "z_m", "frob_norm", "topo_weight"], rows)
    return name


def write_final_state(out_dir: Path, record: BiphotonRecord) -> str:
    """Little-endian complex128 dump, row-major with the idler index major."""
    name = "final_state.bin"
    matrix = np.ascontiguousarray(record.final_state.matrix, dtype="<c16")
    (out_dir / name).write_bytes(matrix.tobytes())
    return name


def _tags_for(snapshot: SpectrumSnapshot) -> dict[int, str]:
    tags: dict[int, str] = {}
    for idx, tag in (
        (snapshot.zero_index, "zero"),
        (snapshot.max_index, "max"),
        (snapshot.min_index, "min"),
    ):
        tags[idx] = f"{tags[idx]}+{tag}" if idx in tags else tag
    return tags


def write_spectrum(out_dir: Path, snapshots) -> str:
    name = "spectrum.csv"
    rows = []
    for snap in snapshots:
        tags = _tags_for(snap)
        for i, lam in enumerate(snap.eigenvalues):
            rows.append(
                [snap.step, i, fmt(lam), int(bool(snap.isolated[i])), tags.get(i, "")]
            )
    _write_rows(
        out_dir / name,
        ["step", "mode_index", "eigenvalue_per_m", "is_isolated", "tag"],
        rows,
    )
    return name


def write_modes(out_dir: Path, snapshots, config: LatticeConfig) -> str:
    name = "modes.csv"
    sites = config.sites()
    rows = []
    for snap in snapshots:
        for off, site in enumerate(sites):
            rows.append(
                [
                    snap.step,
                    int(site),
                    fmt(snap.zero_mode[off]),
                    fmt(snap.max_mode[off]),
                    fmt(snap.min_mode[off]),
                ]
            )
    _write_rows(out_dir / name, ["step", "site", "zero", "max", "min"], rows)
    return name


def write_heatmap(
    out_dir: Path, name: str, row_label: str, row_values, grid: np.ndarray
) -> str:
    """Grid CSV: one row per sweep value, one column per step; NaN -> empty."""
    header = [row_label] + [str(k) for k in range(grid.shape[1])]
    rows = [
        [fmt(value)] + [fmt(cell) for cell in grid[i]]
        for i, value in enumerate(row_values)
    ]
    _write_rows(out_dir / name, header, rows)
    return name


def write_disorder_stats(out_dir: Path, agg: AggregateResult) -> str:
    """Final-step weight statistics per (eta, power) cell."""
    name = "disorder_stats.csv"
    se = agg.final_std_error()
    rows = []
    for ei, eta in enumerate(agg.etas):
        for pi, power in enumerate(agg.powers):
            rows.append(
                [
                    fmt(eta),
                    fmt(power),
                    int(agg.counts[ei, pi]),
                    fmt(agg.mean[ei, pi, -1]),
                    fmt(agg.variance[ei, pi, -1]),
                    fmt(agg.minimum[ei, pi, -1]),
                    fmt(agg.maximum[ei, pi, -1]),
                    fmt(se[ei, pi]),
                ]
            )
    _write_rows(
        out_dir / name,
        [
            "eta",
            "power_w",
            "n",
            "final_mean",
            "final_variance",
            "final_min",
            "final_max",
            "final_std_error",
        ],
        rows,
    )
    return name


def write_disorder_series(out_dir: Path, agg: AggregateResult) -> str:
    """Per-step aggregated weight statistics in long format."""
    name = "disorder_series.csv"
    rows = []
    for ei, eta in enumerate(agg.etas):
        for pi, power in enumerate(agg.powers):
            for k, z in enumerate(agg.z_grid):
                rows.append(
                    [
                        fmt(eta),
                        fmt(power),
                        k,
                        fmt(z),
                        fmt(agg.mean[ei, pi, k]),
                        fmt(agg.variance[ei, pi, k]),
                        fmt(agg.minimum[ei, pi, k]),
                        fmt(agg.maximum[ei, pi, k]),
                    ]
                )
    _write_rows(
        out_dir / name,
        ["eta", "power_w", "step", "z_m", "mean", "variance", "minimum", "maximum"],
        rows,
    )
    return name


def write_manifest(
    out_dir: Path,
    command: str,
    config_dict: dict,
    artifact_names,
    *,
    seeds=None,
    errors=None,
) -> str:
    """Companion manifest hashing every artifact; no timestamps, sorted keys."""
    artifacts = {}
    for name in sorted(artifact_names):
        path = out_dir / name
        artifacts[name] = {
            "sha256": sha256_file(path),
            "bytes": path.stat().st_size,
        }
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "nlssh", "version": __version__},
        "command": command,
        "config": config_dict,
        "artifacts": artifacts,
    }
    if seeds is not None:
        manifest["seeds"] = seeds
    if errors:
        manifest["errors"] = errors
    payload = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    (out_dir / "manifest.json").write_text(payload, encoding="utf-8")
    return "manifest.json"
