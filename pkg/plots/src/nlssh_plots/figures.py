"""The four figure kinds rendered from run artifacts.

Output is deterministic: the Agg backend, a perceptually uniform colormap
(viridis) normalized to each panel's maximum, fixed figure geometry, and
no metadata timestamps, so re-rendering reproduces the image bytes.
Cells the producer left empty are drawn in flat gray, never interpolated;
:class:`RenderResult` reports how many, which must equal the CSV null
count.  Input directories are only ever read.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import io
from .errors import ArtifactError, ParameterError

__all__ = ["FIGURE_KINDS", "FigureSpec", "RenderResult", "render"]

FIGURE_KINDS = ("propagation", "spectrum", "heatmap", "disorder")

_MODE_FOR = {
    "propagation": "evolve",
    "spectrum": "spectrum",
    "heatmap": "sweep",
    "disorder": "disorder",
}

_COLORMAP = "viridis"
_MASK_COLOR = "0.85"
_DPI = 150


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: a figure kind, a run directory, and an image path.

    ``x_label`` and ``y_label`` override the kind's default axis labels on
    every panel; ``value_range`` overrides the per-panel max normalization
    of heat maps with a fixed (vmin, vmax).
    """

    kind: str
    input_dir: Path
    output_path: Path
    x_label: str | None = None
    y_label: str | None = None
    value_range: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise ParameterError(
                f"kind must be one of {FIGURE_KINDS}, got {self.kind!r}"
            )
        object.__setattr__(self, "input_dir", Path(self.input_dir))
        object.__setattr__(self, "output_path", Path(self.output_path))
        if self.value_range is not None:
            lo, hi = self.value_range
            if not lo < hi:
                raise ParameterError("value_range must satisfy vmin < vmax")


class RenderResult(NamedTuple):
    path: Path
    masked_cells: int


def render(spec: FigureSpec) -> RenderResult:
    """Validate the run directory and write the figure image."""
    manifest = io.load_manifest(spec.input_dir)
    want = _MODE_FOR[spec.kind]
    command = manifest.get("command")
    if command != want:
        raise ArtifactError(
            f"input directory holds a {command!r} run; "
            f"{spec.kind} figures need {want!r}"
        )
    fig, masked = _RENDERERS[spec.kind](spec, manifest)
    out = spec.output_path
    out.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Software": None} if out.suffix == ".png" else None
    fig.savefig(out, dpi=_DPI, metadata=metadata)
    plt.close(fig)
    return RenderResult(path=out, masked_cells=masked)


def _labels(spec: FigureSpec, ax, x_default: str, y_default: str) -> None:
    ax.set_xlabel(spec.x_label if spec.x_label is not None else x_default)
    ax.set_ylabel(spec.y_label if spec.y_label is not None else y_default)


def _masked_image(spec: FigureSpec, ax, grid: np.ndarray, extent) -> None:
    data = np.ma.masked_invalid(grid)
    cmap = plt.get_cmap(_COLORMAP).copy()
    cmap.set_bad(_MASK_COLOR)
    if spec.value_range is not None:
        vmin, vmax = spec.value_range
    else:
        peak = float(data.max()) if data.count() else 1.0
        vmin, vmax = 0.0, peak if peak > 0 else 1.0
    image = ax.imshow(
        data,
        cmap=cmap,
        vmin=vmin,
        vmax=vmax,
        origin="lower",
        aspect="auto",
        interpolation="nearest",
        extent=extent,
    )
    ax.figure.colorbar(image, ax=ax, fraction=0.046, pad=0.04)


def _render_propagation(spec: FigureSpec, manifest: dict):
    """Pump intensity and pair population over sites and distance."""
    panels = [
        ("pump_intensity.csv", "intensity_w", "pump intensity (W)"),
        ("biphoton_population.csv", "population", "photon pair population"),
    ]
    power = manifest["config"]["experiment"]["power_w"]
    fig, axes = plt.subplots(1, 2, figsize=(10.0, 4.0), constrained_layout=True)
    masked = 0
    for ax, (name, column, title) in zip(axes, panels):
        table = io.load_site_table(
            io.artifact_path(spec.input_dir, manifest, name), column
        )
        masked += table.null_count
        z_cm = table.z * 100.0
        extent = (
            z_cm[0],
            z_cm[-1],
            table.sites[0] - 0.5,
            table.sites[-1] + 0.5,
        )
        _masked_image(spec, ax, table.values, extent)
        ax.set_title(title)
        _labels(spec, ax, "z (cm)", "waveguide")
    fig.suptitle(f"propagation at {power:g} W")
    return fig, masked


def _render_spectrum(spec: FigureSpec, manifest: dict):
    """Eigenvalue ladder per recorded step plus zero-mode profiles."""
    spectrum = io.load_spectrum(
        io.artifact_path(spec.input_dir, manifest, "spectrum.csv")
    )
    modes = io.load_modes(io.artifact_path(spec.input_dir, manifest, "modes.csv"))
    fig, (ax_levels, ax_profile) = plt.subplots(
        1, 2, figsize=(10.0, 4.0), constrained_layout=True
    )
    steps = np.unique(spectrum.steps)
    ax_levels.scatter(
        spectrum.steps, spectrum.eigenvalues, s=4, color="#3b528b", label="level"
    )
    iso = spectrum.isolated
    if iso.any():
        ax_levels.scatter(
            spectrum.steps[iso],
            spectrum.eigenvalues[iso],
            s=36,
            facecolors="none",
            edgecolors="crimson",
            label="isolated",
        )
    ax_levels.set_xticks(steps)
    ax_levels.legend(loc="upper left", fontsize="small")
    ax_levels.set_title("eigenvalues per recorded step")
    _labels(spec, ax_levels, "step", "eigenvalue (1/m)")

    for step, style in ((steps[0], "--"), (steps[-1], "-")):
        sel = modes.steps == step
        ax_profile.plot(
            modes.sites[sel],
            modes.zero[sel] ** 2,
            style,
            color="#21918c",
            label=f"step {step}",
        )
    ax_profile.legend(loc="upper right", fontsize="small")
    ax_profile.set_title("zero-mode density")
    _labels(spec, ax_profile, "waveguide", "|amplitude|^2")
    return fig, spectrum.null_count + modes.null_count


def _heatmap_order(manifest: dict) -> list[str]:
    names = [
        n for n in manifest.get("artifacts", {}) if n.endswith("_heatmap.csv")
    ]
    preferred = ["weight_heatmap.csv", "gap_heatmap.csv"]
    head = [n for n in preferred if n in names]
    return head + sorted(n for n in names if n not in head)


def _render_heatmap(spec: FigureSpec, manifest: dict):
    """One panel per swept observable, powers over steps."""
    names = _heatmap_order(manifest)
    if not names:
        raise ArtifactError("manifest lists no *_heatmap.csv artifacts")
    fig, axes = plt.subplots(
        1, len(names), figsize=(5.0 * len(names), 4.0), constrained_layout=True
    )
    masked = 0
    for ax, name in zip(np.atleast_1d(axes), names):
        table = io.load_heatmap(io.artifact_path(spec.input_dir, manifest, name))
        masked += table.null_count
        n_rows, n_cols = table.grid.shape
        extent = (-0.5, n_cols - 0.5, -0.5, n_rows - 0.5)
        _masked_image(spec, ax, table.grid, extent)
        stride = max(1, -(-n_rows // 10))
        ax.set_yticks(range(0, n_rows, stride))
        ax.set_yticklabels(f"{v:g}" for v in table.row_values[::stride])
        ax.set_title(name.removesuffix("_heatmap.csv").replace("_", " "))
        _labels(spec, ax, "step", f"{table.row_label} (W)".replace("_w (W)", " (W)"))
    return fig, masked


def _render_disorder(spec: FigureSpec, manifest: dict):
    """Mean weight along propagation with a spread band per disorder level."""
    series = io.load_disorder_series(
        io.artifact_path(spec.input_dir, manifest, "disorder_series.csv")
    )
    stats = io.load_disorder_stats(
        io.artifact_path(spec.input_dir, manifest, "disorder_stats.csv")
    )
    fig, (ax_series, ax_final) = plt.subplots(
        1, 2, figsize=(10.0, 4.0), constrained_layout=True
    )
    colors = plt.get_cmap(_COLORMAP)(np.linspace(0.0, 0.85, len(series.etas)))
    z_cm = series.z * 100.0
    many_powers = len(series.powers) > 1
    for ei, eta in enumerate(series.etas):
        for pi, power in enumerate(series.powers):
            mean = series.mean[ei, pi]
            band = np.sqrt(series.variance[ei, pi])
            label = f"eta={eta:g}" + (f", {power:g} W" if many_powers else "")
            ax_series.plot(z_cm, mean, color=colors[ei], label=label)
            ax_series.fill_between(
                z_cm, mean - band, mean + band, color=colors[ei], alpha=0.25, lw=0
            )
    ax_series.legend(loc="upper left", fontsize="small")
    ax_series.set_title("weight along propagation")
    _labels(spec, ax_series, "z (cm)", "topological weight")

    for power in np.unique(stats.powers):
        sel = stats.powers == power
        ax_final.errorbar(
            stats.etas[sel],
            stats.mean[sel],
            yerr=stats.std_error[sel],
            marker="o",
            capsize=3,
            label=f"{power:g} W" if many_powers else None,
        )
    if many_powers:
        ax_final.legend(loc="upper right", fontsize="small")
    ax_final.set_title("final weight vs disorder")
    _labels(spec, ax_final, "coupling spread eta", "final topological weight")
    return fig, series.null_count + stats.null_count


_RENDERERS = {
    "propagation": _render_propagation,
    "spectrum": _render_spectrum,
    "heatmap": _render_heatmap,
    "disorder": _render_disorder,
}
