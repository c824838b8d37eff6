"""Exception types shared across the toolkit.

Every error raised by the library derives from :class:`ThermoworkError` so
callers (and the CLI) can separate library failures from programming bugs.
"""


class ThermoworkError(Exception):
    """Base class for all toolkit errors."""


class NonSquare(ThermoworkError):
    """Matrix operation requires a square matrix."""


class NonHermitian(ThermoworkError):
    """Matrix fails the Hermiticity tolerance check."""


class DimensionMismatch(ThermoworkError):
    """Operands have incompatible dimensions."""


class NegativeEigenvalue(ThermoworkError):
    """Matrix expected to be positive semidefinite has a negative eigenvalue."""


class InvariantViolation(ThermoworkError):
    """A constructed value violates one of its declared invariants."""


class InvalidBeta(ThermoworkError):
    """Inverse temperature must be positive and finite."""


class InvalidRank(ThermoworkError):
    """Requested rank is outside 1..dim."""


class InvalidDistribution(ThermoworkError):
    """Probability vector is negative or not normalized."""


class LambdaOutOfRange(ThermoworkError):
    """Isotropic mixing parameter outside the positivity range."""


class NotPure(ThermoworkError):
    """Operation requires a pure state."""


class WrongDimension(ThermoworkError):
    """Operation restricted to a specific subsystem dimension."""


class DimensionTooLarge(ThermoworkError):
    """Operation restricted to desk-scale dimensions."""


class ParseError(ThermoworkError):
    """Input file could not be parsed against its schema."""
