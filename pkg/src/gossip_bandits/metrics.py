"""Regret accounting, coupling-error statistics, convex-optimization error,
and closed-form bound calculators.

Population regret of a realized run is

    R(T) = max_j sum_t mu^t_j  -  sum_t <p^t, g^t>,

the gap between the best fixed arm's cumulative mean reward and the
population-weighted realized reward.  Expectations are estimated by
averaging reports across seeds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .mwu import CoupledTrajectory
from .population import TrajectoryRecord
from .potentials import ParameterCertificate
from .rewards import ConvexFunctionSpec, eval_convex, simplex_minimizer


@dataclass(frozen=True, eq=False)
class RegretReport:
    cumulative_regret: float
    per_round: np.ndarray  # regret increments against the overall best arm
    best_arm: int
    per_arm_regret: np.ndarray


def population_regret(trajectory: TrajectoryRecord, mean_log=None) -> RegretReport:
    """Regret of one realized run against its (logged or given) mean rewards."""
    mu = trajectory.mu if mean_log is None else np.asarray(mean_log, dtype=np.float64)
    T = trajectory.T
    if mu.shape != (T, trajectory.m):
        raise InvalidInputError(
            f"mean log shape {mu.shape} does not match {T} rounds x {trajectory.m} arms"
        )
    realized = np.einsum("tj,tj->t", trajectory.p[:T], trajectory.g)
    per_arm = mu.sum(axis=0) - realized.sum()
    best = int(np.argmax(per_arm))
    return RegretReport(
        cumulative_regret=float(per_arm[best]),
        per_round=mu[:, best] - realized,
        best_arm=best,
        per_arm_regret=per_arm,
    )


def regret_curve(trajectory: TrajectoryRecord) -> np.ndarray:
    """Prefix regret R(t) for t = 1..T (best fixed arm per prefix)."""
    T = trajectory.T
    realized = np.cumsum(np.einsum("tj,tj->t", trajectory.p[:T], trajectory.g))
    arm_cum = np.cumsum(trajectory.mu, axis=0)
    return arm_cum.max(axis=1) - realized


def coupling_error_sum(trajectory: CoupledTrajectory) -> float:
    """sum over rounds 1..T of ||p^t - q^t||_1 on the realized run (gaps
    measured before any epoch re-initialization)."""
    return float(trajectory.l1_pq[1:].sum())


@dataclass(frozen=True)
class BoundInputs:
    """Inputs to the closed-form MWU regret bound."""

    alpha1: float
    alpha2: float
    delta: float
    rho: float  # lower bound on the initial mass of the reference arm
    gamma: float  # probability with which the rho bound may fail
    T: int
    stationary: bool

    def validate(self):
        if not 0.0 < self.alpha1 <= self.alpha2:
            raise InvalidParameterError(
                f"need 0 < alpha1 <= alpha2, got {self.alpha1}, {self.alpha2}"
            )
        if not 0.0 < self.rho <= 1.0:
            raise InvalidParameterError(f"rho must lie in (0, 1], got {self.rho}")
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidParameterError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.delta < 0.0:
            raise InvalidParameterError(f"delta must be >= 0, got {self.delta}")
        if self.T < 1:
            raise InvalidParameterError(f"T must be >= 1, got {self.T}")
        if self.stationary and self.delta != 0.0:
            raise InvalidParameterError("the stationary branch requires delta = 0")


def mwu_regret_bound(inp: BoundInputs) -> float:
    """Closed-form regret bound for a zero-sum MWU process.

    Stationary (delta = 0):  6 log(1/rho) / alpha1 + gamma.
    Adversarial:  3 log(1/rho)/alpha1
                  + 2 (alpha2^2/alpha1 + (alpha2-alpha1)/alpha1
                       + delta*alpha2/alpha1) T + gamma.
    """
    inp.validate()
    if inp.stationary:
        return 6.0 * math.log(1.0 / inp.rho) / inp.alpha1 + inp.gamma
    a1, a2 = inp.alpha1, inp.alpha2
    drift = (a2 * a2 / a1) + (a2 - a1) / a1 + inp.delta * a2 / a1
    return 3.0 * math.log(1.0 / inp.rho) / a1 + 2.0 * drift * inp.T + inp.gamma


def coupling_error_bound(
    lipschitz_L: float, tau: int, D: int, sigma: float, m: int, n: int, c: float = 1.0
) -> float:
    """Explicit-constant estimation-error term of the epoch framework:

        kappa^tau * D * m * sigma * sqrt(3 c log n / n) + 2 m sigma T / n^c

    with kappa = 3 + L and T = D tau.  Conservative by construction.
    """
    if n < 3 * c * math.log(n):
        raise InvalidParameterError(f"need n >= 3c log n, got n={n}, c={c}")
    if tau < 1 or D < 1:
        raise InvalidParameterError("tau and D must be >= 1")
    kappa = 3.0 + lipschitz_L
    chernoff = math.sqrt(3.0 * c * math.log(n) / n)
    return kappa**tau * D * m * sigma * chernoff + 2.0 * m * sigma * (D * tau) / n**c


def epoch_regret_bound(
    cert: ParameterCertificate,
    floors,
    tau: int,
    D: int,
    sigma: float,
    m: int,
    n: int,
    c: float = 1.0,
    gamma: float = 0.0,
    stationary: bool = False,
) -> float:
    """Epoch-based regret bound: per-epoch MWU terms (mass floors rho^{d tau})
    plus the explicit coupling-error term; gamma is paid once."""
    floors = np.asarray(floors, dtype=np.float64)
    if floors.shape != (D,):
        raise InvalidParameterError(f"need one mass floor per epoch, got shape {floors.shape}")
    if np.any(floors <= 0.0) or np.any(floors > 1.0):
        raise InvalidParameterError("mass floors must lie in (0, 1]")
    approx = 0.0
    for rho in floors:
        inp = BoundInputs(
            alpha1=cert.alpha1,
            alpha2=cert.alpha2,
            delta=0.0 if stationary else cert.delta,
            rho=float(rho),
            gamma=0.0,
            T=tau,
            stationary=stationary,
        )
        approx += mwu_regret_bound(inp)
    est = coupling_error_bound(cert.lipschitz_L, tau, D, sigma, m, n, c)
    return approx + est + gamma


def convex_error(trajectory: TrajectoryRecord, fn: ConvexFunctionSpec) -> float:
    """f(average iterate) minus the exact simplex minimum of f."""
    T = trajectory.T
    if T < 1:
        raise InvalidInputError("need at least one round")
    p_avg = trajectory.p[:T].mean(axis=0)
    p_star = simplex_minimizer(fn)
    return eval_convex(fn, p_avg) - eval_convex(fn, p_star)


def mass_survival_horizon(n: int, m: int) -> int:
    """floor(4 log(n / 2m)): the horizon within which every arm keeps at
    least one agent with high probability under any reward sequence."""
    if n <= 2 * m:
        raise InvalidParameterError(f"need n > 2m, got n={n}, m={m}")
    return int(math.floor(4.0 * math.log(n / (2.0 * m))))
