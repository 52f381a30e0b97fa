"""Exception hierarchy.

Every error raised deliberately by the library derives from
:class:`WeightedGTError`; most also subclass :class:`ValueError` so callers
that only care about bad input can catch that.
"""

from __future__ import annotations


class WeightedGTError(Exception):
    """Base class for all library errors."""


class NonPositiveWeight(WeightedGTError, ValueError):
    pass


class TooFewNodes(WeightedGTError, ValueError):
    pass


class DimensionMismatch(WeightedGTError, ValueError):
    pass


class BadDimensions(WeightedGTError, ValueError):
    pass


class BadProbability(WeightedGTError, ValueError):
    pass


class BadRadius(WeightedGTError, ValueError):
    pass


class InfeasibleAverageDegree(WeightedGTError, ValueError):
    pass


class GraphicalityFailure(WeightedGTError):
    """The degree sequence cannot be realized as a simple graph."""


class Disconnected(WeightedGTError, ValueError):
    pass


class BadLaziness(WeightedGTError, ValueError):
    pass


class DetailedBalanceViolation(WeightedGTError, ValueError):
    pass


class EigensolverFailure(WeightedGTError, RuntimeError):
    pass


class RhoOutOfRange(WeightedGTError, ValueError):
    pass


class StepTooLarge(WeightedGTError, ValueError):
    """Step size violates a positivity constant (C1 or C2 <= 0)."""


class BadRange(WeightedGTError, ValueError):
    pass


class NonFinite(WeightedGTError, FloatingPointError):
    """Optimizer state became inf/nan; usually the step size is too large."""

    def __init__(self, message: str, t: int | None = None):
        super().__init__(message)
        self.t = t


class ConfigError(WeightedGTError, ValueError):
    pass
