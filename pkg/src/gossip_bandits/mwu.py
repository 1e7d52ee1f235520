"""The centralized zero-sum multiplicative-weights process {q^t} and the
coupled three-trajectory construction (p, p-hat, q) with optional epochs.

The q process applies q_j <- q_j (1 + F_j(q, g)) each round.  Because the
family satisfies the zero-sum identity, the iterates stay on the simplex
with no renormalization, and a coordinate that reaches 0 stays 0.

A coupled run feeds the identical reward realization to the finite-n agent
process and to q.  With epoch length tau < T, q is re-initialized to the
current p at every round index d*tau (before that round's reward draw);
the logged L1 gap at those rounds is measured before the snap so the
series always reflects the error accumulated since the last epoch start.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidEpochingError, InvalidPopulationError
from .population import (
    AUTO,
    MEAN_FIELD,
    RoundRng,
    conditional_next,
    resolve_mode,
    uniform_state,
    _step_state,
)
from .potentials import PotentialFamily
from .rewards import RewardModel
from .simplex import ActionDistribution, as_distribution


def mwu_step(q, g, family: PotentialFamily) -> ActionDistribution:
    """One multiplicative update; output is on the simplex by zero-sum."""
    qd = as_distribution(q)
    nxt = qd.masses * (1.0 + family.potentials(qd, g))
    # F_j >= -1 analytically; the floor only guards ulp-level rounding
    return ActionDistribution(np.maximum(nxt, 0.0))


@dataclass(frozen=True, eq=False)
class CoupledTrajectory:
    """Round-indexed triples (p^t, p_hat^t, q^t) under one shared reward log.

    l1_pq[t] is ||p^t - q^t||_1 measured before any epoch re-initialization
    at round t; q[t] stores the process value actually used in round t
    (after the snap).
    """

    p: np.ndarray  # (T+1, m) realized agent shares
    p_hat: np.ndarray  # (T+1, m) one-step conditional means; p_hat[0] = p[0]
    q: np.ndarray  # (T+1, m) zero-sum MWU iterates
    g: np.ndarray  # (T, m)
    mu: np.ndarray  # (T, m)
    l1_pq: np.ndarray  # (T+1,)
    tau: int
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


def run_coupled(
    model: RewardModel,
    family: PotentialFamily,
    *,
    n: int,
    m: int,
    T: int,
    tau: int,
    seed: int,
    mode: str = AUTO,
) -> CoupledTrajectory:
    """Run the agent process and the MWU reference on one reward stream.

    tau must divide T; tau == T gives the single-epoch coupling.  mode
    "mean-field" replaces the agent step by its conditional mean, in which
    case p and q coincide for all t within each epoch.
    """
    if T < 1 or tau < 1 or T % tau != 0:
        raise InvalidEpochingError(f"T={T} must be a positive multiple of tau={tau}")
    if n < 1:
        raise InvalidPopulationError("need n >= 1")
    mode = resolve_mode(mode, n)

    if mode == MEAN_FIELD:
        state = None
        p_cur = np.full(m, 1.0 / m)
    else:
        state = uniform_state(n, m, mode)
        p_cur = state.distribution().masses
    q_cur = p_cur.copy()

    p_log = np.empty((T + 1, m))
    phat_log = np.empty((T + 1, m))
    q_log = np.empty((T + 1, m))
    g_log = np.empty((T, m))
    mu_log = np.empty((T, m))
    l1_log = np.empty(T + 1)

    p_log[0] = p_cur
    phat_log[0] = p_cur
    q_log[0] = q_cur
    l1_log[0] = 0.0

    for t in range(T):
        if t > 0:
            l1_log[t] = float(np.abs(p_cur - q_cur).sum())
            if t % tau == 0:
                q_cur = p_cur.copy()  # epoch boundary: snap before the draw
        q_log[t] = q_cur
        rr = RoundRng(seed, t)
        gv, mv = model.next_reward(t, ActionDistribution(p_cur), rr.stream("reward-draws"))
        ga = gv.rewards
        g_log[t] = ga
        mu_log[t] = mv.means
        q_cur = mwu_step(q_cur, ga, family).masses
        phat_log[t + 1] = conditional_next(p_cur, ga, family).masses
        if mode == MEAN_FIELD:
            p_cur = phat_log[t + 1]
        else:
            state = _step_state(state, ga, family, rr)
            p_cur = state.distribution().masses
        p_log[t + 1] = p_cur

    l1_log[T] = float(np.abs(p_cur - q_cur).sum())
    q_log[T] = q_cur
    return CoupledTrajectory(
        p=p_log,
        p_hat=phat_log,
        q=q_log,
        g=g_log,
        mu=mu_log,
        l1_pq=l1_log,
        tau=tau,
        n=n,
        seed=seed,
        mode=mode,
        sigma=model.sigma,
    )
