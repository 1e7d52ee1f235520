"""The five local-algorithm families as potential-function families {F_j}.

Each family maps a simplex point p and a reward vector g to a potential
vector F(p, g) satisfying the zero-sum identity sum_j p_j F_j(p, g) = 0,
which is what lets the induced multiplicative updates stay on the simplex
without renormalization.  Families also expose agent-level decision
probabilities (adoption probability, pairwise comparison weights) and a
parameter certificate (alpha1, alpha2, delta, L) quantifying how well the
expected potential tracks the relative mean reward of an arm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import (
    InvalidDimensionError,
    InvalidParameterError,
    InvalidRewardError,
    WrongFamilyError,
)
from .simplex import as_distribution, as_reward_array


@dataclass(frozen=True)
class ParameterCertificate:
    """Constants under which a family satisfies the correlation/Lipschitz
    assumption: (alpha1/3)(mu_j - <q,mu> - delta) <= E[F_j] <=
    (alpha2/3)(mu_j - <q,mu> + delta), and F_j is L-Lipschitz in p (L1)."""

    alpha1: float
    alpha2: float
    delta: float
    lipschitz_L: float
    valid: bool
    validity_reason: str


@dataclass(frozen=True)
class LinearizationReport:
    """Worst-case slack of a two-sided linear bound over a verification grid."""

    beta: float
    grid_points: int
    lower_slack: float
    upper_slack: float

    SLACK_TOL = -1e-12

    @property
    def passed(self) -> bool:
        return self.lower_slack >= self.SLACK_TOL and self.upper_slack >= self.SLACK_TOL


class PotentialFamily:
    """Base class; subclasses are small frozen dataclasses."""

    kind = "abstract"  # "adoption" | "comparison" | "two-neighbor"
    name = "abstract"

    @property
    def is_adoption(self) -> bool:
        return self.kind == "adoption"

    @property
    def is_comparison(self) -> bool:
        return self.kind == "comparison"

    @property
    def is_two_neighbor(self) -> bool:
        return self.kind == "two-neighbor"

    # -- agent-level decision probabilities -------------------------------

    def adoption_probs(self, g) -> np.ndarray:
        raise WrongFamilyError(f"{self.name} is not an adoption family")

    def adoption_prob(self, g: float) -> float:
        return float(self.adoption_probs(np.asarray([g]))[0])

    def comparison_weights(self, g_own: float, g_other: float) -> tuple[float, float]:
        raise WrongFamilyError(f"{self.name} is not a single-neighbor comparison family")

    # -- population-level potentials --------------------------------------

    def potentials(self, p, g) -> np.ndarray:
        """F(p, g); zero-sum holds for every subclass by construction."""
        raise NotImplementedError

    def certificate(self, sigma: float | None = None) -> ParameterCertificate:
        raise NotImplementedError

    def _check_dims(self, p, g) -> tuple[np.ndarray, np.ndarray]:
        pm = as_distribution(p).masses
        ga = as_reward_array(g)
        if pm.shape != ga.shape:
            raise InvalidDimensionError(
                f"distribution has {pm.shape[0]} arms but rewards have {ga.shape[0]}"
            )
        return pm, ga


def _adoption_potentials(pm: np.ndarray, f: np.ndarray) -> np.ndarray:
    return f - float(pm @ f)


@dataclass(frozen=True)
class BetaAdopt(PotentialFamily):
    """Adopt the sampled neighbor's arm with probability beta on reward 1
    and 1-beta on reward 0; rewards must be binary."""

    beta: float

    kind = "adoption"
    name = "beta-adopt"

    def __post_init__(self):
        if not 0.5 < self.beta < 1.0:
            raise InvalidParameterError(f"beta-adopt needs beta in (0.5, 1), got {self.beta}")

    def adoption_probs(self, g) -> np.ndarray:
        ga = as_reward_array(g)
        if not np.all((ga == 0.0) | (ga == 1.0)):
            raise InvalidRewardError("beta-adopt rewards must be binary 0/1")
        return np.where(ga == 1.0, self.beta, 1.0 - self.beta)

    def potentials(self, p, g) -> np.ndarray:
        pm, ga = self._check_dims(p, g)
        return _adoption_potentials(pm, self.adoption_probs(ga))

    def certificate(self, sigma: float | None = None) -> ParameterCertificate:
        alpha = 3.0 * (2.0 * self.beta - 1.0)
        # alpha2 <= 1/4 holds up to and including the boundary beta = 13/24.
        valid = self.beta <= 13.0 / 24.0 + 1e-12
        reason = (
            "ok (alpha2 = 1/4 boundary included)"
            if valid
            else f"beta={self.beta} > 13/24 gives alpha2={alpha:.4g} > 1/4"
        )
        return ParameterCertificate(alpha, alpha, 0.0, 2.0, valid, reason)


@dataclass(frozen=True)
class DiscAdopt(PotentialFamily):
    """Adopt with probability beta*g; rewards live in [0, sigma]."""

    beta: float
    sigma: float = 1.0

    kind = "adoption"
    name = "disc-adopt"

    def __post_init__(self):
        if self.sigma < 1.0:
            raise InvalidParameterError(f"support bound must be >= 1, got {self.sigma}")
        if not 0.0 < self.beta <= 1.0 / self.sigma:
            raise InvalidParameterError(
                f"disc-adopt needs beta in (0, 1/sigma], got beta={self.beta} sigma={self.sigma}"
            )

    def adoption_probs(self, g) -> np.ndarray:
        ga = as_reward_array(g)
        if np.any(ga < -1e-12) or np.any(ga > self.sigma + 1e-12):
            raise InvalidRewardError(f"disc-adopt rewards must lie in [0, {self.sigma}]")
        return self.beta * ga

    def potentials(self, p, g) -> np.ndarray:
        pm, ga = self._check_dims(p, g)
        return _adoption_potentials(pm, self.adoption_probs(ga))

    def certificate(self, sigma: float | None = None) -> ParameterCertificate:
        s = self.sigma if sigma is None else float(sigma)
        # E[F_j] = beta * (mu_j - <p, mu>) exactly, so against the alpha/3
        # bracket the working constant is alpha = 3*beta; the unscaled
        # linear-response constant beta is reported alongside for reference.
        alpha = 3.0 * self.beta
        limit = min(1.0 / 12.0, 1.0 / s)
        valid = self.beta <= limit + 1e-12
        both = f"alpha=3*beta={alpha:.4g} (raw linear response beta={self.beta:.4g})"
        if valid:
            reason = f"ok; {both}"
        else:
            reason = f"beta={self.beta} > min(1/12, 1/sigma)={limit:.4g}; {both}"
        return ParameterCertificate(alpha, alpha, 0.0, 2.0, valid, reason)


@dataclass(frozen=True)
class SigmoidAdopt(PotentialFamily):
    """Adopt with probability sigmoid(beta*g); rewards may be signed."""

    beta: float

    kind = "adoption"
    name = "sigmoid-adopt"

    def __post_init__(self):
        if self.beta <= 0.0:
            raise InvalidParameterError(f"sigmoid-adopt needs beta > 0, got {self.beta}")

    def adoption_probs(self, g) -> np.ndarray:
        return expit(self.beta * as_reward_array(g))

    def potentials(self, p, g) -> np.ndarray:
        pm, ga = self._check_dims(p, g)
        return _adoption_potentials(pm, self.adoption_probs(ga))

    def certificate(self, sigma: float | None = None) -> ParameterCertificate:
        s = 1.0 if sigma is None else float(sigma)
        alpha = 0.75 * self.beta
        delta = 4.0 * self.beta * s
        limit = min(1.0 / (4.0 * s), 1.0 / 3.0)
        valid = self.beta <= limit + 1e-12
        reason = (
            "ok" if valid else f"beta={self.beta} > min(1/(4*sigma), 1/3) = {limit:.4g}"
        )
        return ParameterCertificate(alpha, alpha, delta, 2.0, valid, reason)


def _stable_scores(beta: float, ga: np.ndarray) -> np.ndarray:
    # exp(beta*g) up to a common factor; ratios are what matter everywhere.
    # The floor keeps far-behind arms from underflowing to exact 0, which
    # would make three-way score sums 0/0 for extreme beta*spread.
    if ga.size == 0:
        return ga
    return np.maximum(np.exp(beta * (ga - ga.max())), np.finfo(np.float64).tiny)


@dataclass(frozen=True)
class SoftmaxCompare(PotentialFamily):
    """Keep own arm vs. sampled neighbor's arm with odds exp(beta*reward)."""

    beta: float

    kind = "comparison"
    name = "softmax-compare"

    def __post_init__(self):
        if self.beta < 0.0:
            raise InvalidParameterError(f"softmax-compare needs beta >= 0, got {self.beta}")

    def comparison_weights(self, g_own: float, g_other: float) -> tuple[float, float]:
        rho_own = float(expit(self.beta * (g_own - g_other)))
        return rho_own, 1.0 - rho_own

    def switch_probs(self, g_own, g_other) -> np.ndarray:
        """Probability of moving to the neighbor's arm, vectorized."""
        return expit(self.beta * (as_reward_array(g_other) - as_reward_array(g_own)))

    def potentials(self, p, g) -> np.ndarray:
        pm, ga = self._check_dims(p, g)
        # (e^{bx}-e^{by})/(e^{bx}+e^{by}) = tanh(b(x-y)/2), overflow-free
        diffs = np.tanh(0.5 * self.beta * (ga[:, None] - ga[None, :]))
        return diffs @ pm

    def certificate(self, sigma: float | None = None) -> ParameterCertificate:
        s = 1.0 if sigma is None else float(sigma)
        alpha = 1.5 * self.beta
        delta = 4.0 * self.beta * s
        # beta <= 1/(4 sigma) keeps delta <= 1; beta <= 1/6 keeps alpha <= 1/4
        limit = min(1.0 / (4.0 * s), 1.0 / 6.0)
        valid = 0.0 < self.beta <= limit + 1e-12
        reason = (
            "ok" if valid else f"beta={self.beta} outside (0, min(1/(4*sigma), 1/6)] = (0, {limit:.4g}]"
        )
        return ParameterCertificate(alpha, alpha, delta, 2.0, valid, reason)


@dataclass(frozen=True)
class TwoNeighborSoftmax(PotentialFamily):
    """Softmax comparison over own arm plus two independently sampled
    neighbors (with replacement); the multiset of the three observed arms
    is scored by exp(beta*reward) per slot."""

    beta: float

    kind = "two-neighbor"
    name = "two-neighbor-softmax"

    def __post_init__(self):
        if self.beta < 0.0:
            raise InvalidParameterError(
                f"two-neighbor-softmax needs beta >= 0, got {self.beta}"
            )

    def potentials(self, p, g) -> np.ndarray:
        pm, ga = self._check_dims(p, g)
        h = _stable_scores(self.beta, ga)
        # F_j = sum_{k,l} p_k p_l (2 h_j - h_k - h_l) / (h_j + h_k + h_l):
        # expected relative growth of arm j when the observed slot multiset
        # is {j, k, l}.  The one formula also covers the k=l and k=j cells.
        num = 2.0 * h[:, None, None] - h[None, :, None] - h[None, None, :]
        den = h[:, None, None] + h[None, :, None] + h[None, None, :]
        return np.einsum("jkl,k,l->j", num / den, pm, pm)

    def certificate(self, sigma: float | None = None) -> ParameterCertificate:
        # No correlation constants are derived for this family; the
        # Lipschitz bound follows from entries bounded in [-1, 2].
        return ParameterCertificate(
            float("nan"),
            float("nan"),
            float("nan"),
            4.0,
            False,
            "no correlation certificate derived for the two-neighbor family",
        )


ALL_FAMILY_NAMES = (
    "beta-adopt",
    "disc-adopt",
    "sigmoid-adopt",
    "softmax-compare",
    "two-neighbor-softmax",
)


def make_family(name: str, beta: float, sigma: float = 1.0) -> PotentialFamily:
    """Construct a family by its CLI/config name."""
    if name == "beta-adopt":
        return BetaAdopt(beta)
    if name == "disc-adopt":
        return DiscAdopt(beta, sigma)
    if name == "sigmoid-adopt":
        return SigmoidAdopt(beta)
    if name == "softmax-compare":
        return SoftmaxCompare(beta)
    if name == "two-neighbor-softmax":
        return TwoNeighborSoftmax(beta)
    raise InvalidParameterError(f"unknown algorithm family: {name!r}")


# ---------------------------------------------------------------------------
# Module-level operation wrappers


def adoption_prob(family: PotentialFamily, g: float) -> float:
    """Probability that an agent adopts a sampled arm whose reward was g."""
    return family.adoption_prob(g)


def comparison_weights(family: PotentialFamily, g_own: float, g_other: float):
    """(rho_own, rho_other) for the pairwise comparison decision."""
    return family.comparison_weights(g_own, g_other)


def eval_potentials(family: PotentialFamily, p, g) -> np.ndarray:
    """The potential vector F(p, g) for any of the five families."""
    return family.potentials(p, g)


def zero_sum_residual(family: PotentialFamily, p, g) -> float:
    """sum_j p_j F_j(p, g); identically zero up to float rounding."""
    pm = as_distribution(p).masses
    return float(pm @ family.potentials(pm, g))


def certificate(family: PotentialFamily, sigma: float | None = None) -> ParameterCertificate:
    return family.certificate(sigma)


def verify_exp_linearization(beta: float, grid_points: int = 201) -> LinearizationReport:
    """Grid-check the linear envelope of the exponential comparison quotient.

    Over (x, y) in [-10, 10]^2 the quotient tanh(beta(x-y)/2) must satisfy

        (1/2 - 2 beta) beta |x - y|  <=  |tanh(beta (x-y)/2)|  <=  (beta/2) |x - y|

    for 0 < beta <= 1/4.  Returns the minimum slack of each side.
    """
    if not 0.0 < beta <= 0.25:
        raise InvalidParameterError(f"beta must lie in (0, 1/4], got {beta}")
    if grid_points < 2:
        raise InvalidParameterError("need at least 2 grid points")
    x = np.linspace(-10.0, 10.0, grid_points)
    d = np.abs(x[:, None] - x[None, :])
    mid = np.abs(np.tanh(0.5 * beta * d))
    lower = (0.5 - 2.0 * beta) * beta * d
    upper = 0.5 * beta * d
    return LinearizationReport(
        beta=beta,
        grid_points=grid_points,
        lower_slack=float((mid - lower).min()),
        upper_slack=float((upper - mid).min()),
    )


def verify_sigmoid_linearization(beta: float, grid_points: int = 201) -> LinearizationReport:
    """Grid-check the linear envelope of the sigmoid adoption function.

    For x in [0, 10]:   1/2 + (beta/4 - beta^2) x <= sigmoid(beta x) <= 1/2 + (beta/4) x
    and the mirrored inequalities on [-10, 0), for 0 < beta <= 1/4.
    """
    if not 0.0 < beta <= 0.25:
        raise InvalidParameterError(f"beta must lie in (0, 1/4], got {beta}")
    if grid_points < 2:
        raise InvalidParameterError("need at least 2 grid points")
    xs = np.linspace(0.0, 10.0, grid_points)
    sig = expit(beta * xs)
    low = 0.5 + (beta / 4.0 - beta * beta) * xs
    up = 0.5 + (beta / 4.0) * xs
    # sigmoid(-x) = 1 - sigmoid(x), so the negative half-interval mirrors
    # exactly; check it explicitly anyway.
    xneg = -xs[1:]
    sig_n = expit(beta * xneg)
    low_n = 0.5 + (beta / 4.0) * xneg
    up_n = 0.5 + (beta / 4.0 - beta * beta) * xneg
    lower_slack = min(float((sig - low).min()), float((sig_n - low_n).min()))
    upper_slack = min(float((up - sig).min()), float((up_n - sig_n).min()))
    return LinearizationReport(
        beta=beta, grid_points=grid_points, lower_slack=lower_slack, upper_slack=upper_slack
    )


def exp_quotient(beta: float, x: float, y: float) -> float:
    """(e^{beta x} - e^{beta y}) / (e^{beta x} + e^{beta y}) via tanh."""
    return math.tanh(0.5 * beta * (x - y))
