"""Exception hierarchy for artifact loading and rendering.

Everything raised on purpose derives from :class:`PlotError`, so the CLI
scripts can distinguish expected failures from genuine bugs with a single
except clause.
"""


class PlotError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(PlotError, ValueError):
    """A figure specification field is outside its accepted range."""


class MissingArtifactError(PlotError, FileNotFoundError):
    """A required artifact file is absent from the input directory."""


class SchemaMismatchError(PlotError):
    """The manifest's schema_version differs from the supported one."""


class ArtifactError(PlotError, ValueError):
    """An artifact is malformed or disagrees with its manifest entry."""


class EmptyDataError(PlotError, ValueError):
    """An artifact parsed cleanly but holds no data rows to draw."""
