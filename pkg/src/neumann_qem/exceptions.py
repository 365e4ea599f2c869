"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class QEMError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ParameterError(QEMError, ValueError):
    """An argument is outside its admissible range."""

    exit_code = 2


class StructuralError(ParameterError):
    """Operands have incompatible shapes or qubit counts."""


class DistributionError(ParameterError):
    """A probability vector or stochastic matrix is malformed."""


class MethodInapplicableError(QEMError):
    """The noise resistance is not below 1, so the truncated series cannot be bounded."""

    exit_code = 3


class ResourceLimitError(QEMError):
    """The requested object or shot budget exceeds the configured cap."""

    exit_code = 4


class OracleMismatchError(QEMError):
    """Two independent exact evaluations of the same quantity disagree."""
