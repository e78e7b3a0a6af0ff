"""Exception hierarchy shared by the library and the command line."""


class KSubmaxError(Exception):
    """Base class for all errors raised by ksubmax."""


class InstanceError(KSubmaxError, ValueError):
    """An instance, vector or parameter failed validation."""


class BudgetExceededError(KSubmaxError):
    """An exhaustive computation would exceed its enumeration budget."""


class InternalInvariantError(KSubmaxError, RuntimeError):
    """A guarantee that must hold on valid monotone input was violated."""


class LPInfeasibleError(InternalInvariantError):
    pass


class SupportOverflowError(InternalInvariantError):
    pass


class NumericalError(InternalInvariantError):
    """The simplex solver could not produce a point within tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals
