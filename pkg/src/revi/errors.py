"""Exception hierarchy."""


class ReviError(Exception):
    """Base class for all library errors."""


class DimensionError(ReviError, ValueError):
    """Vector dimensions do not match."""


class InfeasibleError(ReviError, ValueError):
    """A point lies outside the feasible set it was declared on."""


class NumericError(ReviError, ArithmeticError):
    """A computation produced NaN/Inf or an undefined normalization."""


class UnsupportedGeometryError(ReviError):
    """The prox kernel cannot handle the requested feasible set."""


class MisuseError(ReviError):
    """An operation was called on a problem lacking what it needs."""


class ConvergenceError(ReviError):
    """An inner iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class LineSearchError(ReviError):
    """The adaptive step search exhausted its trial budget."""

    def __init__(self, message, last_L, residual, run=None):
        super().__init__(message)
        self.last_L = last_L
        self.residual = residual
        # partial trace up to the failing iteration
        self.run = run
