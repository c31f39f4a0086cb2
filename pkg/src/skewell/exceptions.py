"""Exception types raised across the package."""


class SkewellError(Exception):
    """Base class for all package errors."""


class DomainError(SkewellError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class FactorizationError(DomainError):
    """A dispersion matrix is not symmetric positive definite."""


class NumericError(SkewellError, ArithmeticError):
    """A numerical procedure failed to produce a finite or converged value.

    Attributes
    ----------
    partial : float or None
        Best available value when the failure is a non-convergence.
    index : int or None
        Offending observation index, when the failure is row-specific.
    """

    def __init__(self, message, partial=None, index=None):
        super().__init__(message)
        self.partial = partial
        self.index = index


class SymmetryError(SkewellError):
    """A perturbation spec failed its central-symmetry probe check."""


class MomentError(DomainError):
    """A moment was requested for degrees of freedom where it does not exist."""
