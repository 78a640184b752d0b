"""Exception types shared across the package."""


class VolbandError(Exception):
    """Base class for errors raised by volband."""


class DomainError(VolbandError, ValueError):
    """An argument lies outside the domain of a density or transform."""


class DimensionError(VolbandError, ValueError):
    """Array lengths or layouts are inconsistent."""


class InvalidPartitionError(VolbandError, ValueError):
    """A bin partition cannot be built from the requested sizes."""


class DataError(VolbandError, ValueError):
    """Input data could not be parsed or violates the record contract."""


class NumericalError(VolbandError, ArithmeticError):
    """A numerical procedure broke down (blow-up, degenerate proposal)."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
