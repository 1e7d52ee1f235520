"""Exception types shared across the package."""


class GossipBanditsError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(GossipBanditsError, ValueError):
    """Vector length is wrong or two inputs disagree in dimension."""


class InvalidPopulationError(GossipBanditsError, ValueError):
    """Population counts are empty, negative, or inconsistent with n."""


class WrongFamilyError(GossipBanditsError, TypeError):
    """Operation called on an algorithm family that does not support it."""


class WrongModeError(GossipBanditsError, ValueError):
    """Population state is in the wrong representation for the operation."""


class InvalidRewardError(GossipBanditsError, ValueError):
    """Reward value lies outside the support the family/model declares."""


class InvalidParameterError(GossipBanditsError, ValueError):
    """Numeric parameter outside its documented range."""


class ScheduleExhaustedError(GossipBanditsError, IndexError):
    """A scripted reward schedule has no entry for the requested round."""


class InvalidEpochingError(GossipBanditsError, ValueError):
    """Horizon is not divisible into epochs of the requested length."""


class InvalidInputError(GossipBanditsError, ValueError):
    """Inputs to an aggregation are misaligned (for example length mismatch)."""
