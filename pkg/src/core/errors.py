# src/core/errors.py

from typing import Optional


class AlphaportError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(AlphaportError):
    pass


class NetlistSyntaxError(AlphaportError):
    """Raised by the netlist reader; carries the 1-based line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CircuitError(AlphaportError):
    """Invalid circuit, builder parameters or mesh basis."""


class CharacteristicError(AlphaportError):
    pass


class DomainError(AlphaportError, ValueError):
    """Argument outside the positivity convention (e.g. v < 0)."""


class SingularSlopeError(AlphaportError):
    pass


class ConvergenceError(AlphaportError):
    """Newton iteration did not converge. For valid inputs this is a bug signal."""

    def __init__(self, message: str, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")


class FitError(AlphaportError):
    """Ill-conditioned least-squares series fit."""

    def __init__(self, message: str, condition: float):
        self.condition = condition
        super().__init__(f"{message} (condition number {condition:.3e})")
