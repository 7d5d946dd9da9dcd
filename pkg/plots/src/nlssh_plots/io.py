"""Readers for the simulator's run artifacts.

A run directory holds ``manifest.json`` plus the CSV tables it hashes.
Loaders here verify the manifest's schema version and each file's sha256
before parsing, turn empty cells into NaN, and count them, so renderers
can mask exactly the cells the producer left blank.  Nothing in this
module ever writes to the input directory.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ArtifactError, EmptyDataError, MissingArtifactError, SchemaMismatchError

__all__ = [
    "SUPPORTED_SCHEMA_VERSION",
    "DisorderSeries",
    "DisorderStats",
    "Heatmap",
    "ModesTable",
    "ScalarSeries",
    "SiteGrid",
    "SpectrumTable",
    "artifact_path",
    "load_disorder_series",
    "load_disorder_stats",
    "load_heatmap",
    "load_manifest",
    "load_modes",
    "load_scalars",
    "load_site_table",
    "load_spectrum",
]

SUPPORTED_SCHEMA_VERSION = 1


def load_manifest(input_dir: Path) -> dict:
    """Parse ``manifest.json`` and pin its schema version."""
    path = Path(input_dir) / "manifest.json"
    if not path.is_file():
        raise MissingArtifactError(f"no manifest.json in {input_dir}")
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ArtifactError(f"manifest.json is not valid JSON: {err}") from err
    version = manifest.get("schema_version")
    if version != SUPPORTED_SCHEMA_VERSION:
        raise SchemaMismatchError(
            f"manifest schema_version {version!r} is not supported "
            f"(this reader understands {SUPPORTED_SCHEMA_VERSION})"
        )
    return manifest


def artifact_path(input_dir: Path, manifest: dict, name: str) -> Path:
    """Resolve one artifact listed in the manifest, verifying its hash."""
    entry = manifest.get("artifacts", {}).get(name)
    if entry is None:
        raise MissingArtifactError(f"manifest lists no artifact {name!r}")
    path = Path(input_dir) / name
    if not path.is_file():
        raise MissingArtifactError(f"artifact {name!r} is listed but missing")
    data = path.read_bytes()
    if len(data) != entry["bytes"]:
        raise ArtifactError(
            f"artifact {name!r} is {len(data)} bytes, manifest says {entry['bytes']}"
        )
    digest = hashlib.sha256(data).hexdigest()
    if digest != entry["sha256"]:
        raise ArtifactError(f"artifact {name!r} fails its manifest checksum")
    return path


def _read_rows(path: Path, header: list[str]) -> list[list[str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise ArtifactError(f"{path.name} has no header row") from None
        if got != header:
            raise ArtifactError(
                f"{path.name} header {got} does not match expected {header}"
            )
        rows = list(reader)
    if not rows:
        raise EmptyDataError(f"{path.name} holds no data rows")
    return rows


def _cell(value: str) -> float:
    return math.nan if value == "" else float(value)


class SiteGrid(NamedTuple):
    """Long-format (step, z, site, value) table pivoted to sites x steps."""

    z: np.ndarray
    sites: np.ndarray
    values: np.ndarray
    null_count: int


def load_site_table(path: Path, value_column: str) -> SiteGrid:
    rows = _read_rows(path, ["step", "z_m", "site", value_column])
    steps = sorted({int(r[0]) for r in rows})
    sites = sorted({int(r[2]) for r in rows})
    step_at = {s: i for i, s in enumerate(steps)}
    site_at = {s: i for i, s in enumerate(sites)}
    z = np.full(len(steps), math.nan)
    values = np.full((len(sites), len(steps)), math.nan)
    nulls = 0
    for step, z_m, site, value in rows:
        k = step_at[int(step)]
        z[k] = float(z_m)
        values[site_at[int(site)], k] = _cell(value)
        nulls += value == ""
    return SiteGrid(z=z, sites=np.array(sites), values=values, null_count=nulls)


class ScalarSeries(NamedTuple):
    z: np.ndarray
    frob_norm: np.ndarray
    topo_weight: np.ndarray
    null_count: int


def load_scalars(path: Path) -> ScalarSeries:
    rows = _read_rows(path, ["step", "z_m", "frob_norm", "topo_weight"])
    nulls = sum(r[2] == "" for r in rows) + sum(r[3] == "" for r in rows)
    return ScalarSeries(
        z=np.array([float(r[1]) for r in rows]),
        frob_norm=np.array([_cell(r[2]) for r in rows]),
        topo_weight=np.array([_cell(r[3]) for r in rows]),
        null_count=nulls,
    )


class SpectrumTable(NamedTuple):
    """One row per (recorded step, mode index)."""

    steps: np.ndarray
    mode_index: np.ndarray
    eigenvalues: np.ndarray
    isolated: np.ndarray
    null_count: int


def load_spectrum(path: Path) -> SpectrumTable:
    rows = _read_rows(
        path, ["step", "mode_index", "eigenvalue_per_m", "is_isolated", "tag"]
    )
    nulls = sum(r[2] == "" for r in rows)
    return SpectrumTable(
        steps=np.array([int(r[0]) for r in rows]),
        mode_index=np.array([int(r[1]) for r in rows]),
        eigenvalues=np.array([_cell(r[2]) for r in rows]),
        isolated=np.array([r[3] == "1" for r in rows]),
        null_count=nulls,
    )


class ModesTable(NamedTuple):
    """Tagged eigenmode amplitudes per (recorded step, site)."""

    steps: np.ndarray
    sites: np.ndarray
    zero: np.ndarray
    max: np.ndarray
    min: np.ndarray
    null_count: int


def load_modes(path: Path) -> ModesTable:
    rows = _read_rows(path, ["step", "site", "zero", "max", "min"])
    nulls = sum(cell == "" for r in rows for cell in r[2:])
    return ModesTable(
        steps=np.array([int(r[0]) for r in rows]),
        sites=np.array([int(r[1]) for r in rows]),
        zero=np.array([_cell(r[2]) for r in rows]),
        max=np.array([_cell(r[3]) for r in rows]),
        min=np.array([_cell(r[4]) for r in rows]),
        null_count=nulls,
    )


class Heatmap(NamedTuple):
    """Sweep grid: one row per swept value, one column per step."""

    row_label: str
    row_values: np.ndarray
    grid: np.ndarray
    null_count: int


def load_heatmap(path: Path) -> Heatmap:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ArtifactError(f"{path.name} has no header row") from None
        rows = list(reader)
    if not header or header[1:] != [str(k) for k in range(len(header) - 1)]:
        raise ArtifactError(f"{path.name} header is not a step-indexed grid")
    if not rows:
        raise EmptyDataError(f"{path.name} holds no data rows")
    values = np.array([float(r[0]) for r in rows])
    grid = np.array([[_cell(c) for c in r[1:]] for r in rows])
    nulls = sum(c == "" for r in rows for c in r[1:])
    return Heatmap(
        row_label=header[0], row_values=values, grid=grid, null_count=nulls
    )


class DisorderStats(NamedTuple):
    """Final-step statistics, one row per (eta, power) cell."""

    etas: np.ndarray
    powers: np.ndarray
    counts: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    minimum: np.ndarray
    maximum: np.ndarray
    std_error: np.ndarray
    null_count: int


def load_disorder_stats(path: Path) -> DisorderStats:
    rows = _read_rows(
        path,
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
    )
    nulls = sum(cell == "" for r in rows for cell in r[3:])
    return DisorderStats(
        etas=np.array([float(r[0]) for r in rows]),
        powers=np.array([float(r[1]) for r in rows]),
        counts=np.array([int(r[2]) for r in rows]),
        mean=np.array([_cell(r[3]) for r in rows]),
        variance=np.array([_cell(r[4]) for r in rows]),
        minimum=np.array([_cell(r[5]) for r in rows]),
        maximum=np.array([_cell(r[6]) for r in rows]),
        std_error=np.array([_cell(r[7]) for r in rows]),
        null_count=nulls,
    )


class DisorderSeries(NamedTuple):
    """Per-step ensemble statistics pivoted to (eta, power, step)."""

    etas: np.ndarray
    powers: np.ndarray
    z: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    minimum: np.ndarray
    maximum: np.ndarray
    null_count: int


def load_disorder_series(path: Path) -> DisorderSeries:
    rows = _read_rows(
        path,
        ["eta", "power_w", "step", "z_m", "mean", "variance", "minimum", "maximum"],
    )
    etas = sorted({float(r[0]) for r in rows})
    powers = sorted({float(r[1]) for r in rows})
    steps = sorted({int(r[2]) for r in rows})
    eta_at = {e: i for i, e in enumerate(etas)}
    power_at = {p: i for i, p in enumerate(powers)}
    step_at = {s: i for i, s in enumerate(steps)}
    shape = (len(etas), len(powers), len(steps))
    z = np.full(len(steps), math.nan)
    stats = {name: np.full(shape, math.nan) for name in ("mean", "variance", "minimum", "maximum")}
    nulls = 0
    for eta, power, step, z_m, *cells in rows:
        idx = (eta_at[float(eta)], power_at[float(power)], step_at[int(step)])
        z[step_at[int(step)]] = float(z_m)
        for name, cell in zip(("mean", "variance", "minimum", "maximum"), cells):
            stats[name][idx] = _cell(cell)
            nulls += cell == ""
    return DisorderSeries(
        etas=np.array(etas), powers=np.array(powers), z=z, null_count=nulls, **stats
    )
