"""Exception types raised by the estimators.

All of them derive from :class:`EstimationError`, which is itself a
``ValueError`` so callers that only care about bad input can catch that.
"""


class EstimationError(ValueError):
    """Base class for every error raised by this package."""


class DimensionMismatch(EstimationError):
    pass


class EmptyNeighborhood(EstimationError):
    pass


class InvalidLevel(EstimationError):
    pass


class DegeneratePhi(EstimationError):
    pass


class DegenerateGrid(EstimationError):
    pass


class InvalidExtrapolation(EstimationError):
    pass


class InvalidAnchor(EstimationError):
    pass


class UnstableConfiguration(EstimationError):
    pass


class InvalidConfiguration(EstimationError):
    pass


class DataFormatError(EstimationError):
    pass
