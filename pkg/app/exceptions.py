"""Defines custom exception classes for the toolkit.

The command-line driver maps the three families onto exit codes:
SpecError -> 2, NumericalError -> 3, ChainViolationError -> 4.
"""

class MeanWidthError(Exception):
    """Base class of every error raised by the toolkit."""
    pass

class SpecError(MeanWidthError):
    """Raised when a body, Hamiltonian or run specification is invalid."""
    pass

class QuadratureError(SpecError):
    """Raised when quadrature rule parameters are out of range."""
    pass

class NumericalError(MeanWidthError):
    """Raised when a computation produces a non-finite or inconsistent result."""
    pass

class EvaluationError(NumericalError):
    """Raised when an integrand is non-finite at a quadrature node."""
    pass

class FlowError(NumericalError):
    """Raised when a Hamiltonian trajectory leaves the finite range."""
    pass

class SymplecticError(NumericalError):
    """Raised when a matrix fails a symplectic validity or decomposition check."""
    pass

class ChainViolationError(MeanWidthError):
    """Raised when an asserted inequality chain fails beyond tolerance."""
    pass
