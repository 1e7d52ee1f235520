"""Executable invariant suite: every structural identity the simulator
relies on, checked numerically with measured margins.

Each check returns a CheckResult whose margin is positive when the check
passes with room to spare.  The CLI exposes these as `verify --tier quick`
(small replication counts) and `verify --tier full`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .mwu import mwu_step
from .population import (
    AGGREGATE,
    PER_AGENT,
    PopulationState,
    RoundRng,
    conditional_next,
    step_aggregate,
    step_per_agent,
)
from .potentials import (
    BetaAdopt,
    DiscAdopt,
    PotentialFamily,
    SigmoidAdopt,
    SoftmaxCompare,
    TwoNeighborSoftmax,
    verify_exp_linearization,
    verify_sigmoid_linearization,
    zero_sum_residual,
)
from .simplex import PopulationCounts

LINEARIZATION_BETAS = (0.01, 0.05, 0.1, 0.2, 0.25)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: margin={self.margin:.3e} ({self.detail})"


def default_families(sigma: float = 1.0) -> list[PotentialFamily]:
    """One representative of each family with certificate-range parameters."""
    return [
        BetaAdopt(13.0 / 24.0),
        DiscAdopt(1.0 / 12.0, sigma),
        SigmoidAdopt(0.2),
        SoftmaxCompare(0.15),
        TwoNeighborSoftmax(0.15),
    ]


def _random_inputs(family: PotentialFamily, m: int, rng: np.random.Generator):
    p = rng.dirichlet(np.ones(m))
    if isinstance(family, BetaAdopt):
        g = rng.integers(0, 2, m).astype(float)
    elif isinstance(family, DiscAdopt):
        g = rng.uniform(0.0, family.sigma, m)
    else:
        g = rng.uniform(-1.0, 1.0, m)
    return p, g


def check_zero_sum(
    trials: int = 10_000,
    seed: int = 1,
    families: list[PotentialFamily] | None = None,
    tol: float = 1e-10,
) -> CheckResult:
    """max |sum_j p_j F_j(p, g)| over random (family, p, g) triples."""
    rng = np.random.default_rng(seed)
    fams = families if families is not None else default_families()
    worst = 0.0
    for i in range(trials):
        family = fams[i % len(fams)]
        m = int(rng.integers(2, 17))
        p, g = _random_inputs(family, m, rng)
        worst = max(worst, abs(zero_sum_residual(family, p, g)))
    return CheckResult(
        "zero-sum identity", worst <= tol, tol - worst, f"max residual {worst:.3e} over {trials} triples"
    )


def check_simplex_invariance(
    steps: int = 1000, seed: int = 2, families=None, tol: float = 1e-8
) -> CheckResult:
    """Run the MWU process without renormalization and track sum drift and
    negativity across all families."""
    rng = np.random.default_rng(seed)
    fams = families if families is not None else default_families()
    worst_drift = 0.0
    min_mass = np.inf
    for family in fams:
        m = 6
        q = np.full(m, 1.0 / m)
        for _ in range(steps):
            _, g = _random_inputs(family, m, rng)
            q = mwu_step(q, g, family).masses
            worst_drift = max(worst_drift, abs(float(q.sum()) - 1.0))
            min_mass = min(min_mass, float(q.min()))
    ok = worst_drift <= tol and min_mass >= 0.0
    return CheckResult(
        "simplex invariance",
        ok,
        tol - worst_drift,
        f"max |sum-1| {worst_drift:.3e}, min mass {min_mass:.3e} over {steps} steps",
    )


def check_linearization(grid_points: int = 201) -> CheckResult:
    """Two-sided linear envelopes of the exponential quotient and sigmoid."""
    worst = np.inf
    for beta in LINEARIZATION_BETAS:
        for rep in (
            verify_exp_linearization(beta, grid_points),
            verify_sigmoid_linearization(beta, grid_points),
        ):
            worst = min(worst, rep.lower_slack, rep.upper_slack)
    return CheckResult(
        "linearization envelopes",
        worst >= -1e-12,
        worst + 1e-12,
        f"min slack {worst:.3e} on {grid_points}-point grids",
    )


def exact_bernoulli_potential_means(
    family: PotentialFamily, q: np.ndarray, mu: np.ndarray
) -> np.ndarray:
    """E_g[F(q, g)] computed exactly by enumerating all 2^m binary reward
    outcomes weighted by their Bernoulli probabilities."""
    m = mu.shape[0]
    outcomes = np.array(list(itertools.product((0.0, 1.0), repeat=m)))
    probs = np.prod(np.where(outcomes == 1.0, mu, 1.0 - mu), axis=1)
    F = np.stack([family.potentials(q, g) for g in outcomes])
    return probs @ F


def check_certificate_bracket(
    pairs: int = 100, seed: int = 3, max_m: int = 10, tol: float = 1e-9
) -> CheckResult:
    """Certificate condition (i) against the enumeration oracle.

    For Bernoulli rewards the exact E_g[F_j] must satisfy the signed
    two-sided bound (alpha1/3)(mu_j - <q,mu> - delta) <= E_g[F_j] <=
    (alpha2/3)(mu_j - <q,mu> + delta); for disc-adopt (delta = 0,
    alpha = 3 beta) both sides bind exactly up to 1e-12.
    """
    rng = np.random.default_rng(seed)
    families = [BetaAdopt(0.53), DiscAdopt(1.0 / 12.0), SigmoidAdopt(0.2), SoftmaxCompare(0.15)]
    worst = np.inf
    worst_exact = 0.0
    for _ in range(pairs):
        m = int(rng.integers(2, max_m + 1))
        q = rng.dirichlet(np.ones(m))
        mu = rng.uniform(0.0, 1.0, m)
        rel = mu - float(q @ mu)
        for family in families:
            cert = family.certificate(1.0)
            ef = exact_bernoulli_potential_means(family, q, mu)
            lower = cert.alpha1 / 3.0 * (rel - cert.delta)
            upper = cert.alpha2 / 3.0 * (rel + cert.delta)
            worst = min(worst, float((ef - lower).min()), float((upper - ef).min()))
            if isinstance(family, DiscAdopt):
                worst_exact = max(worst_exact, float(np.abs(ef - cert.alpha1 / 3.0 * rel).max()))
    ok = worst >= -tol and worst_exact <= 1e-12
    return CheckResult(
        "certificate bracket (enumeration oracle)",
        ok,
        worst + tol,
        f"min bracket slack {worst:.3e}, disc-adopt exactness {worst_exact:.3e} over {pairs} pairs",
    )


def _one_step_samples(
    family: PotentialFamily,
    counts: np.ndarray,
    g: np.ndarray,
    reps: int,
    mode: str,
    seed: int,
) -> np.ndarray:
    """Realized p^1 for `reps` independently seeded one-round simulations."""
    m = counts.shape[0]
    n = int(counts.sum())
    out = np.empty((reps, m))
    if mode == PER_AGENT:
        base = PopulationState(PER_AGENT, m, assignments=np.repeat(np.arange(m), counts))
        for r in range(reps):
            nxt = step_per_agent(base, g, family, RoundRng(seed + r, 0))
            out[r] = np.bincount(nxt.assignments, minlength=m) / n
    else:
        pc = PopulationCounts(counts, n)
        for r in range(reps):
            out[r] = step_aggregate(pc, g, family, RoundRng(seed + r, 0)).counts / n
    return out


def _family_test_point(family: PotentialFamily, m: int = 4):
    counts = np.array([800, 600, 400, 200], dtype=np.int64)
    if isinstance(family, BetaAdopt):
        g = np.array([1.0, 0.0, 1.0, 0.0])
    elif isinstance(family, DiscAdopt):
        g = np.array([0.9, 0.5, 0.2, 0.7])
    else:
        g = np.array([0.8, -0.3, 0.1, -0.9])
    return counts, g


def check_one_step_mean(
    reps: int = 10_000, seed: int = 4, families=None, z_limit: float = 5.0, n: int = 2000
) -> CheckResult:
    """Empirical mean of p^1 vs the closed-form conditional mean, per
    coordinate, in standard-error units (per-agent simulations)."""
    fams = families if families is not None else default_families()
    worst_z = 0.0
    for fi, family in enumerate(fams):
        counts, g = _family_test_point(family)
        counts = (counts * (n / counts.sum())).astype(np.int64)
        p0 = counts / counts.sum()
        predicted = conditional_next(p0, g, family).masses
        samples = _one_step_samples(family, counts, g, reps, PER_AGENT, seed + 1000 * fi)
        se = samples.std(axis=0, ddof=1) / np.sqrt(reps)
        z = np.abs(samples.mean(axis=0) - predicted) / se
        worst_z = max(worst_z, float(z.max()))
    return CheckResult(
        "one-step conditional mean",
        worst_z <= z_limit,
        z_limit - worst_z,
        f"max |z| {worst_z:.2f} over {reps} reps per family",
    )


def check_mode_equivalence(
    reps: int = 10_000, seed: int = 5, families=None, z_limit: float = 5.0
) -> CheckResult:
    """Per-agent vs aggregate one-step distributions: per-coordinate mean
    and variance agree within z_limit combined standard errors."""
    fams = families if families is not None else default_families()
    worst_z = 0.0
    for fi, family in enumerate(fams):
        counts, g = _family_test_point(family)
        pa = _one_step_samples(family, counts, g, reps, PER_AGENT, seed + 1000 * fi)
        ag = _one_step_samples(family, counts, g, reps, AGGREGATE, seed + 1000 * fi + 500)
        # means
        se = np.sqrt(pa.var(axis=0, ddof=1) / reps + ag.var(axis=0, ddof=1) / reps)
        worst_z = max(worst_z, float((np.abs(pa.mean(0) - ag.mean(0)) / se).max()))
        # variances, with distribution-free SEs from the fourth moment
        worst_z = max(worst_z, float((np.abs(pa.var(0, ddof=1) - ag.var(0, ddof=1)) / _var_se(pa, ag)).max()))
    return CheckResult(
        "mode equivalence",
        worst_z <= z_limit,
        z_limit - worst_z,
        f"max |z| {worst_z:.2f} over {reps}+{reps} reps per family",
    )


def _var_se(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    def se2(x):
        c = x - x.mean(axis=0)
        m4 = (c**4).mean(axis=0)
        v = x.var(axis=0, ddof=1)
        return (m4 - v**2) / x.shape[0]

    return np.sqrt(se2(a) + se2(b))


def run_suite(tier: str = "quick", seed: int = 1) -> list[CheckResult]:
    """Run all checks; `quick` shrinks the Monte-Carlo replication counts."""
    if tier not in ("quick", "full"):
        raise ValueError(f"tier must be 'quick' or 'full', got {tier!r}")
    mc = 2000 if tier == "quick" else 10_000
    zs = 3000 if tier == "quick" else 10_000
    return [
        check_zero_sum(trials=zs, seed=seed),
        check_simplex_invariance(steps=1000, seed=seed + 1),
        check_linearization(),
        check_certificate_bracket(pairs=100, seed=seed + 2),
        check_mode_equivalence(reps=mc, seed=seed + 3),
        check_one_step_mean(reps=mc, seed=seed + 4),
    ]
