"""Exception types shared across the package."""


class AdaptError(Exception):
    """Base class for all package errors."""


class DomainError(AdaptError, ValueError):
    """A parameter lies outside its admissible range."""


class NotHermitian(AdaptError, ValueError):
    pass


class NotPSD(AdaptError, ValueError):
    pass


class InvalidState(AdaptError, ValueError):
    """Matrix violates a density-matrix invariant (Hermiticity, trace, positivity)."""


class InvalidChannel(AdaptError, ValueError):
    """Kraus set is not trace preserving."""


class ZeroSuccess(AdaptError):
    """A filter annihilated the state; the success rate is numerically zero."""


class NoFeasiblePoint(AdaptError):
    """No candidate in the search space satisfied the success-rate constraint."""
