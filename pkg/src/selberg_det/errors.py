"""Exception types shared across the package.

Every error raised by the numerical routines derives from ``SelbergDetError``
so callers (the CLI in particular) can map failures onto exit codes.
"""


class SelbergDetError(Exception):
    """Base class for all package errors."""


class DomainError(SelbergDetError, ValueError):
    """Argument outside the region where an operation is defined."""


class PoleError(DomainError):
    """Argument sits on a pole of the function being evaluated."""


class ConvergenceError(SelbergDetError, ArithmeticError):
    """An iterative or quadrature routine failed to reach its tolerance."""


class TailError(ConvergenceError):
    """The analytic tail bound of a truncated sum exceeds the tolerance."""


class CapacityError(SelbergDetError):
    """A configured size limit would be exceeded."""


class NonPrimitiveError(DomainError):
    """A cycle is a proper power of a shorter cycle."""


class InvalidCosetAction(SelbergDetError):
    """Coset permutations do not define a valid action."""


class WordTranslationError(SelbergDetError):
    """A group word violates the relations of its presentation."""


class ValidationError(SelbergDetError):
    """A descriptor failed validation on load."""


class FitError(SelbergDetError):
    """A least-squares fit was ill-conditioned or underdetermined."""


class NumericalOverflowError(SelbergDetError, OverflowError):
    """A result is not representable as a finite double."""


class IllConditionedError(FitError):
    """The design matrix of a fit is too ill-conditioned to trust."""


class MissingDivisorError(DomainError):
    """Level data lacks an entry for some divisor of the level."""


class UsageError(SelbergDetError):
    """Command-line arguments are malformed or inconsistent."""


class DataError(SelbergDetError):
    """An input file (descriptor or config) is malformed."""
