"""Exception hierarchy. Each error carries the CLI exit code it maps to."""


class QmsaError(Exception):
    """Base class for all qmsa errors."""

    exit_code = 1


class InvalidInputError(QmsaError, ValueError):
    """Input violates a type invariant (alphabet, shape, uniqueness, ...)."""

    exit_code = 2


class ResourceCapError(QmsaError):
    """A qubit or enumeration cap would be exceeded."""

    exit_code = 3


class InternalCheckError(QmsaError):
    """An internal consistency assertion failed."""

    exit_code = 4


class OptimizationError(InternalCheckError):
    """The classical optimizer received a non-finite objective value."""
