"""Exception types shared across the package.

Split by remediation: ``DataError`` means the inputs (files, flags, column
layouts, misaligned series) need fixing, ``SolverError`` means the numerical
solve itself failed. The CLI maps them to exit codes 2 and 3.
"""


class VoltgridError(Exception):
    """Base class for all package errors."""


class DataError(VoltgridError):
    """Bad or inconsistent input data or configuration."""


class SolverError(VoltgridError):
    """Numerical failure inside the integral-equation solver."""
