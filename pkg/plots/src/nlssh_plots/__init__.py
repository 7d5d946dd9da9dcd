"""Figure rendering for simulator run artifacts.

Reads the CSV/JSON files a run directory holds and draws the four figure
kinds: propagation heat maps, spectrum panels, sweep heat maps, and
disorder statistics curves.
"""

from .errors import (
    ArtifactError,
    EmptyDataError,
    MissingArtifactError,
    ParameterError,
    PlotError,
    SchemaMismatchError,
)
from .figures import FIGURE_KINDS, FigureSpec, RenderResult, render
from .io import SUPPORTED_SCHEMA_VERSION, load_manifest

__version__ = "0.1.0"

__all__ = [
    "ArtifactError",
    "EmptyDataError",
    "FIGURE_KINDS",
    "FigureSpec",
    "MissingArtifactError",
    "ParameterError",
    "PlotError",
    "RenderResult",
    "SchemaMismatchError",
    "SUPPORTED_SCHEMA_VERSION",
    "load_manifest",
    "render",
    "__version__",
]
