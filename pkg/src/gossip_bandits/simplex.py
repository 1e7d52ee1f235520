"""Core value types: simplex points, reward/mean vectors, population counts.

All types are immutable after construction (arrays are copied and marked
read-only), so instances can be shared freely between threads.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, InvalidPopulationError, InvalidRewardError

# Tolerance on |sum(masses) - 1|.  Multiplicative zero-sum updates preserve
# the simplex analytically, so thousands of steps stay well inside this.
SIMPLEX_ATOL = 1e-9


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    if arr.ndim != 1:
        raise InvalidDimensionError(f"expected a 1-d vector, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ActionDistribution:
    """A point on the probability simplex: fraction of agents per arm."""

    masses: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "masses", _frozen_array(self.masses, np.float64))
        if self.m < 2:
            raise InvalidDimensionError(f"need at least 2 arms, got {self.m}")
        if np.any(self.masses < 0):
            raise InvalidDimensionError("masses must be non-negative")
        total = float(self.masses.sum())
        if abs(total - 1.0) > SIMPLEX_ATOL:
            raise InvalidDimensionError(f"masses sum to {total!r}, not 1")

    @property
    def m(self) -> int:
        return self.masses.shape[0]


@dataclass(frozen=True, eq=False)
class RewardVector:
    """One realized reward per arm, with declared support bound sigma."""

    rewards: np.ndarray
    support: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rewards", _frozen_array(self.rewards, np.float64))
        if self.support <= 0:
            raise InvalidRewardError(f"support bound must be positive, got {self.support}")
        if np.any(np.abs(self.rewards) > self.support + 1e-12):
            raise InvalidRewardError(
                f"rewards exceed declared support [-{self.support}, {self.support}]"
            )

    @property
    def m(self) -> int:
        return self.rewards.shape[0]


@dataclass(frozen=True, eq=False)
class MeanVector:
    """Per-arm mean rewards with the declared range for the reward setting."""

    means: np.ndarray
    low: float = 0.0
    high: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "means", _frozen_array(self.means, np.float64))
        if np.any(self.means < self.low - 1e-12) or np.any(self.means > self.high + 1e-12):
            raise InvalidRewardError(
                f"means outside declared range [{self.low}, {self.high}]"
            )

    @property
    def m(self) -> int:
        return self.means.shape[0]


@dataclass(frozen=True, eq=False)
class PopulationCounts:
    """Exact number of agents on each arm; counts sum to n."""

    counts: np.ndarray
    n: int

    def __post_init__(self):
        object.__setattr__(self, "counts", _frozen_array(self.counts, np.int64))
        object.__setattr__(self, "n", int(self.n))
        if self.n < 1:
            raise InvalidPopulationError(f"need n >= 1 agents, got {self.n}")
        if np.any(self.counts < 0):
            raise InvalidPopulationError("counts must be non-negative")
        if int(self.counts.sum()) != self.n:
            raise InvalidPopulationError(
                f"counts sum to {int(self.counts.sum())}, expected n={self.n}"
            )

    @property
    def m(self) -> int:
        return self.counts.shape[0]


def uniform_distribution(m: int) -> ActionDistribution:
    """The uniform point (1/m, ..., 1/m); the deterministic initial state."""
    if m < 2:
        raise InvalidDimensionError(f"need at least 2 arms, got {m}")
    return ActionDistribution(np.full(m, 1.0 / m))


def distribution_from_counts(c: PopulationCounts) -> ActionDistribution:
    """Realized arm shares counts/n."""
    if c.n <= 0:
        raise InvalidPopulationError("population is empty")
    return ActionDistribution(c.counts / c.n)


def l1_distance(a: ActionDistribution, b: ActionDistribution) -> float:
    """Total variation style L1 distance; at most 2 for two distributions."""
    if a.m != b.m:
        raise InvalidDimensionError(f"dimension mismatch: {a.m} vs {b.m}")
    return float(np.abs(a.masses - b.masses).sum())


def as_distribution(p) -> ActionDistribution:
    """Coerce an array-like to a validated ActionDistribution."""
    if isinstance(p, ActionDistribution):
        return p
    return ActionDistribution(np.asarray(p, dtype=np.float64))


def as_reward_array(g) -> np.ndarray:
    """Extract the plain reward array from a RewardVector or array-like."""
    if isinstance(g, RewardVector):
        return g.rewards
    return np.asarray(g, dtype=np.float64)
