"""Exception types shared across the package."""


class LatspecError(Exception):
    """Base class for package errors."""


class DomainSizeError(LatspecError):
    """Requested domain exceeds the configured site budget."""


class ConfigError(LatspecError):
    """Invalid experiment configuration (maps to CLI exit code 2)."""


class NumericalError(LatspecError):
    """Hard numerical failure inside an operation (maps to CLI exit code 3)."""

    def __init__(self, message, op=None):
        super().__init__(message)
        self.op = op


class SolverError(NumericalError):
    """Linear solve failed to meet its residual contract."""

    def __init__(self, message, residual=None, op=None):
        super().__init__(message, op=op)
        self.residual = residual


class ConeGuardError(NumericalError):
    """Propagation time too long for the truncation box."""

    def __init__(self, message, required_extent=None, op=None):
        super().__init__(message, op=op)
        self.required_extent = required_extent


class WindowError(NumericalError):
    """Empty scaling window: the truncation is too small for the request."""
