"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, bad data or
file formats exit 2, numerical failures exit 3.
"""


class RalmError(Exception):
    """Base class for all package errors."""


class DataError(RalmError, ValueError):
    """Invalid input data: bad files, malformed rows, inconsistent shapes."""


class FormatError(DataError):
    """A container file failed structural validation."""


class OutOfBoundsError(DataError):
    """A position lies outside the cabin/grid domain."""


class NoInformationError(RalmError, ValueError):
    """A likelihood field carries no usable information (all zero)."""


class NumericalError(RalmError, ArithmeticError):
    """Non-finite gradients or losses during optimisation."""


class DegenerateBearingWarning(UserWarning):
    """Bearing requested between coincident points; 0.0 returned."""
