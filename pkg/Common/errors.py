"""
Exception types shared by the placement library and the CLI.
"""


class PlacementError(Exception):
    """Base class for every error raised on purpose by this package."""


class InvalidInputError(PlacementError, ValueError):
    """Arguments to a library operation violate its preconditions."""


class DegenerateGeometryError(InvalidInputError):
    """Coincident nodes or an ECEF vector at the Earth centre."""


class ConfigError(PlacementError, ValueError):
    """
    Invalid run configuration.

    :param message: Human readable reason.
    :param field: Dotted config path of the offending field, if known.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class InputFileError(PlacementError):
    """A CSV or JSON input file could not be parsed."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = path or "<input>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")


class NoFeasibleSolutionError(PlacementError):
    """No Pareto front member satisfies the selection preferences."""
