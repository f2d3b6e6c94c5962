"""Exception types raised across the package."""


class InvalidConfigError(ValueError):
    """Physical parameters out of their valid domain."""


class ResolutionError(ValueError):
    """Time grid too coarse to resolve the trap oscillation."""


class SingularityError(ArithmeticError):
    """Nonlinear integration hit a singular point (rho -> 0 or 1 + lambda*xi -> 0)."""


class InsufficientSignalError(RuntimeError):
    """Excess energies too small (or zero) to fit a power law."""


class ConfigParseError(ValueError):
    """Malformed run configuration; carries the offending line number."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
