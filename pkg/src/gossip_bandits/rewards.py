"""Per-round reward generation for the stationary, scripted-adversarial,
leader-punishing, and gradient-oracle settings.

Every model is immutable and draws from an explicit numpy Generator, so
concurrent rounds and runs never share RNG state.  One reward is drawn per
arm per round and is shared by every agent on that arm.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidDimensionError,
    InvalidParameterError,
    InvalidRewardError,
    ScheduleExhaustedError,
)
from .simplex import ActionDistribution, MeanVector, RewardVector, as_distribution


@dataclass(frozen=True, eq=False)
class ConvexFunctionSpec:
    """Diagonal quadratic f(p) = sum_j quad_j p_j^2 + linear_j p_j + constant."""

    quad: np.ndarray
    linear: np.ndarray
    constant: float = 0.0

    def __post_init__(self):
        q = np.array(self.quad, dtype=np.float64)
        b = np.array(self.linear, dtype=np.float64)
        if q.ndim != 1 or q.shape != b.shape:
            raise InvalidDimensionError("quad and linear coefficients must be equal-length vectors")
        if np.any(q < 0):
            raise InvalidParameterError("quadratic coefficients must be non-negative (convexity)")
        q.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "quad", q)
        object.__setattr__(self, "linear", b)

    @property
    def m(self) -> int:
        return self.quad.shape[0]


def three_arm_benchmark() -> ConvexFunctionSpec:
    """The built-in 3-arm objective used by the convex-optimization demo:
    f(p) = 3/5 p1^2 + 3/10 p2^2 - 5/6 p1 + 1/15 p3 + 44/15, minimized at
    (3/4, 1/9, 5/36) with gradients bounded by 5/6 on the simplex."""
    return ConvexFunctionSpec(
        quad=np.array([3.0 / 5.0, 3.0 / 10.0, 0.0]),
        linear=np.array([-5.0 / 6.0, 0.0, 1.0 / 15.0]),
        constant=44.0 / 15.0,
    )


def eval_convex(fn: ConvexFunctionSpec, p) -> float:
    pm = as_distribution(p).masses
    if pm.shape[0] != fn.m:
        raise InvalidDimensionError(f"function has {fn.m} coordinates, point has {pm.shape[0]}")
    return float(pm @ (fn.quad * pm) + fn.linear @ pm + fn.constant)


def gradient(fn: ConvexFunctionSpec, p) -> np.ndarray:
    pm = as_distribution(p).masses
    if pm.shape[0] != fn.m:
        raise InvalidDimensionError(f"function has {fn.m} coordinates, point has {pm.shape[0]}")
    return 2.0 * fn.quad * pm + fn.linear


def gradient_bound(fn: ConvexFunctionSpec) -> float:
    """Exact sup of ||grad f||_inf over the simplex.

    Each partial derivative 2 a_j p_j + b_j is linear in p_j alone with
    p_j in [0, 1], so the extreme values are at p_j in {0, 1}.
    """
    at_zero = np.abs(fn.linear)
    at_one = np.abs(2.0 * fn.quad + fn.linear)
    return float(np.maximum(at_zero, at_one).max())


def simplex_minimizer(fn: ConvexFunctionSpec) -> np.ndarray:
    """Exact minimizer of the diagonal quadratic over the simplex.

    Waterfilling on the KKT conditions: active coordinates share a common
    gradient value lam, with p_j = (lam - b_j) / (2 a_j) for a_j > 0 and
    linear coordinates (a_j = 0) absorbing mass only at lam = b_j.
    """
    a, b = fn.quad, fn.linear
    quad_ix = np.where(a > 0)[0]
    lin_ix = np.where(a == 0)[0]

    def quad_mass(lam: float) -> float:
        if quad_ix.size == 0:
            return 0.0
        return float(np.maximum(0.0, (lam - b[quad_ix]) / (2.0 * a[quad_ix])).sum())

    if lin_ix.size > 0:
        lam_cap = float(b[lin_ix].min())
        if quad_mass(lam_cap) <= 1.0:
            # linear coordinates with the smallest slope soak up the slack
            p = np.zeros(fn.m)
            if quad_ix.size:
                p[quad_ix] = np.maximum(0.0, (lam_cap - b[quad_ix]) / (2.0 * a[quad_ix]))
            slack = 1.0 - p.sum()
            sinks = lin_ix[np.isclose(b[lin_ix], lam_cap)]
            p[sinks] += slack / sinks.size
            return p
    # otherwise the optimum uses quadratic coordinates only; the total mass
    # is piecewise linear and increasing in lam, so solve exactly segment
    # by segment over the sorted breakpoints b_j.
    bps = np.sort(b[quad_ix])
    lam = None
    for i, bp in enumerate(bps):
        hi = bps[i + 1] if i + 1 < bps.size else None
        active = quad_ix[b[quad_ix] <= bp]
        inv = (1.0 / (2.0 * a[active])).sum()
        # mass(lam) = sum (lam - b_j) inv_j over active set
        const = (b[active] / (2.0 * a[active])).sum()
        cand = (1.0 + const) / inv
        if cand >= bp - 1e-15 and (hi is None or cand <= hi + 1e-15):
            lam = cand
            break
    if lam is None:  # numerical guard; the last segment always succeeds
        active = quad_ix
        inv = (1.0 / (2.0 * a[active])).sum()
        const = (b[active] / (2.0 * a[active])).sum()
        lam = (1.0 + const) / inv
    p = np.zeros(fn.m)
    p[quad_ix] = np.maximum(0.0, (lam - b[quad_ix]) / (2.0 * a[quad_ix]))
    return p


class RewardModel:
    """Base class; subclasses generate (g^t, mu^t) per round."""

    name = "abstract"
    sigma = 1.0  # declared support bound: |g_j| <= sigma
    mean_low = 0.0
    mean_high = 1.0

    @property
    def stationary(self) -> bool:
        return False

    def next_reward(self, t: int, p: ActionDistribution, stream: np.random.Generator):
        """Draw the round-t reward vector and return (g, mu)."""
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class StationaryBernoulli(RewardModel):
    """Fixed Bernoulli arms: g_j in {0, 1} with P(1) = mu_j."""

    means: MeanVector

    name = "bernoulli"

    def __post_init__(self):
        if not isinstance(self.means, MeanVector):
            object.__setattr__(self, "means", MeanVector(self.means, 0.0, 1.0))

    @property
    def stationary(self) -> bool:
        return True

    @property
    def m(self) -> int:
        return self.means.m

    def next_reward(self, t, p, stream):
        u = stream.random(self.m)
        g = (u < self.means.means).astype(np.float64)
        return RewardVector(g, support=self.sigma), self.means


@dataclass(frozen=True, eq=False)
class StationaryScaledBernoulli(RewardModel):
    """Two-point rewards {0, sigma} with P(sigma) = mu_j / sigma, so the
    arm mean is mu_j while the support is [0, sigma]."""

    means: MeanVector
    sigma: float = 1.0

    name = "scaled-bernoulli"

    def __post_init__(self):
        if self.sigma < 1.0:
            raise InvalidParameterError(f"support bound must be >= 1, got {self.sigma}")
        if not isinstance(self.means, MeanVector):
            object.__setattr__(self, "means", MeanVector(self.means, 0.0, 1.0))

    @property
    def stationary(self) -> bool:
        return True

    @property
    def m(self) -> int:
        return self.means.m

    def next_reward(self, t, p, stream):
        u = stream.random(self.m)
        g = np.where(u < self.means.means / self.sigma, self.sigma, 0.0)
        return RewardVector(g, support=self.sigma), self.means


@dataclass(frozen=True, eq=False)
class AdversarialScript(RewardModel):
    """Scheduled mean vectors (one per round) plus bounded uniform noise."""

    schedule: np.ndarray  # (rounds, m)
    noise_halfwidth: float = 0.0
    sigma: float = 1.0

    name = "adversarial-script"
    mean_low = -1.0
    mean_high = 1.0

    def __post_init__(self):
        sched = np.array(self.schedule, dtype=np.float64)
        if sched.ndim != 2:
            raise InvalidDimensionError("schedule must be a (rounds, arms) table")
        if np.any(np.abs(sched) > 1.0 + 1e-12):
            raise InvalidRewardError("scheduled means must lie in [-1, 1]")
        if self.noise_halfwidth < 0:
            raise InvalidParameterError("noise halfwidth must be non-negative")
        sched.flags.writeable = False
        object.__setattr__(self, "schedule", sched)

    @property
    def m(self) -> int:
        return self.schedule.shape[1]

    def next_reward(self, t, p, stream):
        if t >= self.schedule.shape[0]:
            raise ScheduleExhaustedError(
                f"schedule has {self.schedule.shape[0]} rounds, round {t} requested"
            )
        mu = self.schedule[t]
        g = mu.copy()
        if self.noise_halfwidth > 0:
            g = g + stream.uniform(-self.noise_halfwidth, self.noise_halfwidth, self.m)
        g = np.clip(g, -self.sigma, self.sigma)
        return RewardVector(g, support=self.sigma), MeanVector(mu, -1.0, 1.0)


@dataclass(frozen=True, eq=False)
class LeaderPunishing(RewardModel):
    """Adaptive adversary: each round the currently most-adopted arm gets
    mean -1 and every other arm gets +1 (ties broken by lowest index)."""

    noise_halfwidth: float = 0.0
    sigma: float = 1.0

    name = "leader-punishing"
    mean_low = -1.0
    mean_high = 1.0

    def __post_init__(self):
        if self.noise_halfwidth < 0:
            raise InvalidParameterError("noise halfwidth must be non-negative")

    def next_reward(self, t, p, stream):
        pm = as_distribution(p).masses
        mu = np.ones(pm.shape[0])
        mu[int(np.argmax(pm))] = -1.0
        g = mu.copy()
        if self.noise_halfwidth > 0:
            g = g + stream.uniform(-self.noise_halfwidth, self.noise_halfwidth, pm.shape[0])
        g = np.clip(g, -self.sigma, self.sigma)
        return RewardVector(g, support=self.sigma), MeanVector(mu, -1.0, 1.0)


@dataclass(frozen=True, eq=False)
class GradientOracle(RewardModel):
    """Rewards g^t = -grad f(p^t)/G + noise, turning the population into an
    implicit minimizer of f over the simplex.

    The noise is i.i.d. zero-mean Gaussian per coordinate (std noise_sd)
    clipped to [-clip, clip].  Metrics treat mu^t = -grad f(p^t)/G as the
    nominal mean; the clipping bias is negligible for noise_sd <= 3.
    """

    fn: ConvexFunctionSpec
    grad_bound: float = 0.0  # 0 means "compute exactly from fn"
    noise_sd: float = 0.0
    clip: float = 10.0

    name = "gradient-oracle"
    mean_low = -1.0
    mean_high = 1.0

    def __post_init__(self):
        if not 1.0 <= self.clip <= 10.0:
            raise InvalidParameterError(f"clip must lie in [1, 10], got {self.clip}")
        if self.noise_sd < 0:
            raise InvalidParameterError("noise_sd must be non-negative")
        if self.grad_bound == 0.0:
            object.__setattr__(self, "grad_bound", gradient_bound(self.fn))
        if self.grad_bound <= 0:
            raise InvalidParameterError("gradient bound must be positive")

    @property
    def sigma(self) -> float:
        return 1.0 + self.clip

    @property
    def m(self) -> int:
        return self.fn.m

    def next_reward(self, t, p, stream):
        mu = -gradient(self.fn, p) / self.grad_bound
        g = mu.copy()
        if self.noise_sd > 0:
            noise = np.clip(stream.normal(0.0, self.noise_sd, self.m), -self.clip, self.clip)
            g = g + noise
        return RewardVector(g, support=self.sigma), MeanVector(mu, -1.0, 1.0)


def next_reward(model: RewardModel, t: int, p, stream: np.random.Generator):
    """Draw (g^t, mu^t) from the model with an explicit substream."""
    return model.next_reward(t, as_distribution(p), stream)
