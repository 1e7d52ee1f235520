"""Exact simulation of one synchronous gossip round for n agents on the
complete graph with self-loops.

Two interchangeable representations are supported:

* per-agent mode keeps one arm index per agent and is the ground-truth
  reference implementation;
* aggregate mode keeps only per-arm counts and replaces the n independent
  agent decisions with multinomial/binomial draws that have exactly the
  same distribution (O(m^2) work per round instead of O(n)).

All decisions in a round are based on the previous round's global state
(simultaneous update semantics).  Draw order within a round is fixed:
source arms ascending, then neighbor arms ascending, so runs are
bit-reproducible for a given seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, InvalidPopulationError, WrongModeError
from .potentials import PotentialFamily, _stable_scores
from .rewards import RewardModel
from .simplex import (
    ActionDistribution,
    PopulationCounts,
    as_distribution,
    as_reward_array,
    distribution_from_counts,
)

PER_AGENT = "per-agent"
AGGREGATE = "aggregate"
MEAN_FIELD = "mean-field"  # infinite-population surrogate (deterministic)
AUTO = "auto"

# per-agent simulation is the ground truth; the O(m^2) aggregate
# reformulation takes over by default once populations get large
AGGREGATE_DEFAULT_THRESHOLD = 10_000


def resolve_mode(mode: str, n: int) -> str:
    if mode == AUTO:
        return AGGREGATE if n > AGGREGATE_DEFAULT_THRESHOLD else PER_AGENT
    return mode


_PURPOSE_IDS = {"neighbor-sampling": 0, "adoption-coins": 1, "reward-draws": 2}


@dataclass(frozen=True)
class RoundRng:
    """Seeded substreams for one round.

    Each (master seed, round, purpose) triple maps to an independent
    generator, so the three draw purposes never interleave and trajectories
    are reproducible round by round regardless of the horizon.
    """

    master_seed: int
    round_index: int

    def stream(self, purpose: str) -> np.random.Generator:
        pid = _PURPOSE_IDS[purpose]
        seq = np.random.SeedSequence([int(self.master_seed), int(self.round_index), pid])
        return np.random.default_rng(seq)


@dataclass(frozen=True, eq=False)
class PopulationState:
    """Arm assignments for n agents, in per-agent or aggregate form."""

    mode: str
    m: int
    assignments: np.ndarray | None = None  # (n,) int64, per-agent mode
    counts: PopulationCounts | None = None  # aggregate mode

    def __post_init__(self):
        if self.mode == PER_AGENT:
            a = np.array(self.assignments, dtype=np.int64)
            if a.ndim != 1 or a.size < 1:
                raise InvalidPopulationError("need at least one agent")
            if np.any(a < 0) or np.any(a >= self.m):
                raise InvalidPopulationError(f"assignments must lie in [0, {self.m})")
            a.flags.writeable = False
            object.__setattr__(self, "assignments", a)
        elif self.mode == AGGREGATE:
            if not isinstance(self.counts, PopulationCounts):
                object.__setattr__(
                    self, "counts", PopulationCounts(self.counts, int(np.sum(self.counts)))
                )
            if self.counts.m != self.m:
                raise InvalidDimensionError("counts dimension disagrees with m")
        else:
            raise WrongModeError(f"unknown population mode {self.mode!r}")

    @property
    def n(self) -> int:
        if self.mode == PER_AGENT:
            return int(self.assignments.size)
        return self.counts.n

    def distribution(self) -> ActionDistribution:
        if self.mode == PER_AGENT:
            counts = np.bincount(self.assignments, minlength=self.m)
            return ActionDistribution(counts / self.n)
        return distribution_from_counts(self.counts)

    def to_counts(self) -> PopulationCounts:
        if self.mode == PER_AGENT:
            return PopulationCounts(np.bincount(self.assignments, minlength=self.m), self.n)
        return self.counts


def uniform_state(n: int, m: int, mode: str = AGGREGATE) -> PopulationState:
    """Deterministic uniform initialization; when m does not divide n the
    first n mod m arms carry one extra agent."""
    base, extra = divmod(n, m)
    counts = np.full(m, base, dtype=np.int64)
    counts[:extra] += 1
    if mode == AGGREGATE:
        return PopulationState(AGGREGATE, m, counts=PopulationCounts(counts, n))
    assignments = np.repeat(np.arange(m), counts)
    return PopulationState(PER_AGENT, m, assignments=assignments)


def conditional_next(p, g, family: PotentialFamily) -> ActionDistribution:
    """One-step conditional mean: p_j (1 + F_j(p, g)).

    The zero-sum identity makes the output a distribution without
    renormalization; entries are floored at 0 against ulp-level rounding.
    """
    pd = as_distribution(p)
    nxt = pd.masses * (1.0 + family.potentials(pd, g))
    return ActionDistribution(np.maximum(nxt, 0.0))


def _two_neighbor_scores(family: PotentialFamily, ga: np.ndarray) -> np.ndarray:
    return _stable_scores(family.beta, ga)


def step_per_agent(
    state: PopulationState, g, family: PotentialFamily, rng: RoundRng
) -> PopulationState:
    """Advance every agent one round, sampling neighbors uniformly over all
    n agents (self included)."""
    if state.mode != PER_AGENT:
        raise WrongModeError("step_per_agent needs a per-agent state")
    ga = as_reward_array(g)
    if ga.shape[0] != state.m:
        raise InvalidDimensionError(f"rewards have {ga.shape[0]} arms, state has {state.m}")
    a = state.assignments
    n = state.n
    nb = rng.stream("neighbor-sampling")
    coins = rng.stream("adoption-coins")

    if family.is_adoption:
        neighbor_arm = a[nb.integers(0, n, size=n)]
        accept = coins.random(n) < family.adoption_probs(ga)[neighbor_arm]
        new = np.where(accept, neighbor_arm, a)
    elif family.is_comparison:
        neighbor_arm = a[nb.integers(0, n, size=n)]
        p_switch = family.switch_probs(ga[a], ga[neighbor_arm])
        new = np.where(coins.random(n) < p_switch, neighbor_arm, a)
    elif family.is_two_neighbor:
        # two independent neighbors with replacement; the decision scores
        # the slot multiset {own, v, w}
        pair = nb.integers(0, n, size=(2, n))
        arm_v, arm_w = a[pair[0]], a[pair[1]]
        h = _two_neighbor_scores(family, ga)
        s_own, s_v, s_w = h[a], h[arm_v], h[arm_w]
        tot = s_own + s_v + s_w
        u = coins.random(n) * tot
        new = np.where(u < s_own, a, np.where(u < s_own + s_v, arm_v, arm_w))
    else:
        raise WrongModeError(f"unsupported family kind {family.kind!r}")
    return PopulationState(PER_AGENT, state.m, assignments=new)


def step_aggregate(
    counts: PopulationCounts, g, family: PotentialFamily, rng: RoundRng
) -> PopulationCounts:
    """Distributionally exact aggregate reformulation of step_per_agent.

    For each source arm (ascending) the agents on it are split by a
    multinomial over sampled-neighbor arms, then per neighbor arm
    (ascending) a binomial decides how many actually move.
    """
    ga = as_reward_array(g)
    if ga.shape[0] != counts.m:
        raise InvalidDimensionError(f"rewards have {ga.shape[0]} arms, counts have {counts.m}")
    m, n = counts.m, counts.n
    probs = counts.counts / n
    nb = rng.stream("neighbor-sampling")
    coins = rng.stream("adoption-coins")
    new = np.zeros(m, dtype=np.int64)

    if family.is_adoption or family.is_comparison:
        if family.is_adoption:
            f = family.adoption_probs(ga)
            move_prob = np.broadcast_to(f, (m, m)).copy()  # [src, dst]
        else:
            move_prob = family.switch_probs(ga[:, None], ga[None, :])
        np.fill_diagonal(move_prob, 0.0)  # moving to the own arm is a no-op
        for j in range(m):
            nj = int(counts.counts[j])
            if nj == 0:
                continue
            cells = nb.multinomial(nj, probs)
            movers = coins.binomial(cells, move_prob[j])
            new[j] += nj - int(movers.sum())
            new += movers
    elif family.is_two_neighbor:
        h = _two_neighbor_scores(family, ga)
        pair_probs = np.outer(probs, probs).ravel()
        for j in range(m):
            nj = int(counts.counts[j])
            if nj == 0:
                continue
            cells = nb.multinomial(nj, pair_probs).reshape(m, m)
            for k in range(m):
                for l in range(m):
                    c = int(cells[k, l])
                    if c == 0:
                        continue
                    w = np.array([h[j], h[k], h[l]])
                    tri = coins.multinomial(c, w / w.sum())
                    new[j] += tri[0]
                    new[k] += tri[1]
                    new[l] += tri[2]
    else:
        raise WrongModeError(f"unsupported family kind {family.kind!r}")

    if int(new.sum()) != n:
        raise InvalidPopulationError("agent count not conserved")
    return PopulationCounts(new, n)


def _step_state(state, g, family, rng):
    if state.mode == PER_AGENT:
        return step_per_agent(state, g, family, rng)
    return PopulationState(
        AGGREGATE, state.m, counts=step_aggregate(state.counts, g, family, rng)
    )


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Per-round log of one run: arm shares p^t for t = 0..T and the reward
    and mean vectors g^t, mu^t for the T played rounds."""

    p: np.ndarray  # (T+1, m)
    g: np.ndarray  # (T, m)
    mu: np.ndarray  # (T, m)
    n: int
    seed: int
    mode: str
    sigma: float

    @property
    def T(self) -> int:
        return self.g.shape[0]

    @property
    def m(self) -> int:
        return self.p.shape[1]


def run_trajectory(
    model: RewardModel,
    family: PotentialFamily,
    *,
    n: int,
    m: int,
    T: int,
    seed: int,
    mode: str = AUTO,
) -> TrajectoryRecord:
    """Run T rounds (reward draw, then simultaneous agent step) from the
    deterministic uniform start.

    mode "auto" picks per-agent simulation up to n = 10^4 and the aggregate
    reformulation beyond; "mean-field" replaces the random agent step by
    its conditional mean, giving the deterministic infinite-population
    surrogate.
    """
    if T < 0:
        raise InvalidDimensionError("T must be >= 0")
    if n < 1:
        raise InvalidPopulationError("need n >= 1")
    mode = resolve_mode(mode, n)
    if mode == MEAN_FIELD:
        state = None
        p_cur = np.full(m, 1.0 / m)
    else:
        state = uniform_state(n, m, mode)
        p_cur = state.distribution().masses

    p_log = np.empty((T + 1, m))
    g_log = np.empty((T, m))
    mu_log = np.empty((T, m))
    p_log[0] = p_cur
    for t in range(T):
        rr = RoundRng(seed, t)
        gv, mv = model.next_reward(t, ActionDistribution(p_cur), rr.stream("reward-draws"))
        g_log[t] = gv.rewards
        mu_log[t] = mv.means
        if mode == MEAN_FIELD:
            p_cur = conditional_next(p_cur, gv.rewards, family).masses
        else:
            state = _step_state(state, gv.rewards, family, rr)
            p_cur = state.distribution().masses
        p_log[t + 1] = p_cur
    return TrajectoryRecord(
        p=p_log, g=g_log, mu=mu_log, n=n, seed=seed, mode=mode, sigma=model.sigma
    )
