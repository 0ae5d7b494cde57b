"""Exception types shared across the package."""


class SBAFError(Exception):
    """Base class for errors raised by sbafnet."""


class DomainError(SBAFError, ValueError):
    """An input lies outside the set on which a function is defined."""


class DataError(SBAFError, ValueError):
    """A dataset file or table is malformed."""


class TrainingError(SBAFError, ArithmeticError):
    """Training produced a non-finite loss, gradient or parameter."""


class OracleError(SBAFError, ArithmeticError):
    """A finite-difference evaluation produced a non-finite value."""
