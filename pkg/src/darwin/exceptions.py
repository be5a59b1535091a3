"""Exception types raised by the darwin package."""

from sklearn.exceptions import NotFittedError  # re-exported: raised by check_is_fitted

__all__ = ["DataError", "DegenerateEstimateError", "NoStabilityBoundaryError", "NotFittedError", "PathOverflowError"]


class DataError(ValueError):
    """Input data violate a series invariant (zeros, non-finite values, length)."""


class DegenerateEstimateError(ValueError):
    """An estimator has zero variance (all ratios or log-ratios identical)."""


class NoStabilityBoundaryError(ValueError):
    """No sign change of the Lyapunov exponent was found while bracketing."""


class PathOverflowError(OverflowError):
    """A level exp(logabs) is outside the floating point range."""
