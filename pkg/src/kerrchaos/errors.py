"""Exception hierarchy shared by all modules."""


class KerrChaosError(Exception):
    """Base class for errors raised by kerrchaos."""


class InvalidParameterError(KerrChaosError, ValueError):
    pass


class InvalidDimensionError(InvalidParameterError):
    pass


class DimensionMismatchError(KerrChaosError, ValueError):
    pass


class TruncationError(KerrChaosError, ArithmeticError):
    """Population reached the top of the truncated Fock space."""


class InsufficientDataError(KerrChaosError, ValueError):
    pass


class DomainError(KerrChaosError, ValueError):
    """Input outside the domain of a transform (e.g. log of a non-positive value)."""


class RadiusTooSmallError(KerrChaosError):
    """No neighbours found within the requested radius."""


class IndeterminateError(KerrChaosError):
    """Not enough information to decide a classification."""
