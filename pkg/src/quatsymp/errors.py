"""Exception types shared across the package."""


class QuatsympError(Exception):
    """Base class for all package-specific errors."""


class StructureError(QuatsympError):
    """An input matrix violates a required algebraic structure."""


class ExceptionalMatrixError(QuatsympError):
    """det(I - M) or det(I + M) is too close to zero for a Cayley-type solve."""


class ConditioningError(QuatsympError):
    """A linear solve is too ill-conditioned to trust."""


class ConvergenceError(QuatsympError):
    """An implicit solver failed to reach the requested tolerance."""

    def __init__(self, message, residual=None, step_index=None):
        super().__init__(message)
        self.residual = residual
        self.step_index = step_index


class DomainError(QuatsympError):
    """A state left the domain of definition of a Hamiltonian system."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index
