"""Exception types shared across the package."""


class LltLabError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(LltLabError, ValueError):
    """A caller-supplied parameter is out of range or malformed."""


class UnsupportedError(LltLabError):
    """A mathematically meaningful rejection: the operation's hypotheses
    are not satisfied by the given input (infinite moment, discontinuous
    density, non-decaying tail, ...).  This is a signal, not a crash."""


class InconsistentCfError(LltLabError):
    """A characteristic-function evaluation is not Hermitian: the inverse
    transform produced an imaginary part too large to be roundoff."""


class UnknownDistributionError(InvalidParameterError):
    """A distribution spec string could not be resolved."""
