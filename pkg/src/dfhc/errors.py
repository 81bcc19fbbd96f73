"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 2, DataError (and
subclasses) -> 3, DivergenceError -> 4.
"""


class DfhcError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(DfhcError):
    """Invalid or inconsistent configuration / manifest / spec input."""


class DataError(DfhcError):
    """Input data cannot be processed (shape, range, file contents)."""


class DataQualityError(DataError):
    """Non-finite or otherwise unusable values inside a series."""


class GeometryError(DataError):
    """No valid fold geometry exists, or raster shapes do not match a plan."""


class DivergenceError(DfhcError):
    """Training produced a non-finite loss."""
