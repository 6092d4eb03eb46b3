"""Exception hierarchy shared by every module.

The CLI maps each family onto a distinct exit code, so library code should
raise the most specific class that applies.
"""


class VMGammaError(Exception):
    """Base class for all package errors."""


class ValidationError(VMGammaError, ValueError):
    """A parameter or configuration violates a structural invariant."""


class DomainError(VMGammaError, ValueError):
    """An argument lies outside the domain of a numerical operation."""


class ConvergenceError(VMGammaError, RuntimeError):
    """An iterative or adaptive routine failed to reach its tolerance."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class LatticeError(DomainError):
    """The lattice geometry cannot produce a valid transition kernel."""
