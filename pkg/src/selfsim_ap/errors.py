"""Exception hierarchy shared by every module."""


class APError(Exception):
    """Base class for all library errors."""


class DomainError(APError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class InfeasibleError(DomainError):
    """The contraction ratio is below 1/(2n-1); no (n+1)-term progression exists."""


class NormalizationError(DomainError):
    """Translation vector violates 0 = b_1 < ... < b_n = 1 - lambda."""


class ParseError(APError, ValueError):
    """Text could not be read as an exact rational."""


class BudgetError(APError, RuntimeError):
    """A configured node or memory budget was exhausted."""
