"""
Exception hierarchy for the harmonic application.

Every error raised by the numerical library derives from `HarmonicError`, so callers
(the CLI, Celery tasks, DRF views) can catch the whole family in one place and map it
to an exit code or an HTTP status.
"""


class HarmonicError(Exception):
    """Base class for all library errors."""


class ShapeError(HarmonicError):
    """Raised when grids, matrix sizes or array layouts do not match."""


class DomainError(HarmonicError):
    """Raised when an argument lies outside the domain of an operation."""


class NotPSDError(DomainError):
    """Raised when a matrix expected to be positive semidefinite is not."""


class BandError(HarmonicError):
    """Raised when a field is not band-limited strictly below the Nyquist frequency."""


class DegeneracyError(HarmonicError):
    """Raised when a test symbol fails the nondegeneracy condition that was requested."""


class ConditioningError(HarmonicError):
    """Raised when a computation would divide by (numerically) vanishing quantities."""


class AccuracyError(HarmonicError):
    """Raised when a quadrature cannot reach the requested accuracy within its budget."""


class UnsupportedError(HarmonicError):
    """Raised for inputs that are valid mathematically but not implemented."""


class ConfigurationError(HarmonicError):
    """Raised for invalid experiment configurations or unknown experiment kinds."""


class InvariantViolation(HarmonicError):
    """Raised when an exact identity or closed-form check fails during a run."""


class ReportIOError(HarmonicError):
    """Raised when a report cannot be written; carries the offending path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
