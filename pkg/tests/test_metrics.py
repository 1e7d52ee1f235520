import math

import numpy as np
import pytest

from gossip_bandits import (
    BoundInputs,
    DiscAdopt,
    InvalidInputError,
    InvalidParameterError,
    TrajectoryRecord,
    convex_error,
    coupling_error_bound,
    epoch_regret_bound,
    mass_survival_horizon,
    mwu_regret_bound,
    mwu_step,
    population_regret,
    regret_curve,
    three_arm_benchmark,
    uniform_distribution,
)


def make_traj(p_rows, g_rows, mu_rows, n=100):
    p = np.asarray(p_rows, dtype=float)
    g = np.asarray(g_rows, dtype=float)
    mu = np.asarray(mu_rows, dtype=float)
    return TrajectoryRecord(p=p, g=g, mu=mu, n=n, seed=0, mode="aggregate", sigma=1.0)


# ---------------------------------------------------------------------------
# population regret


def test_optimal_play_has_zero_regret():
    T, m = 10, 3
    best = np.array([1.0, 0.0, 0.0])
    mu = np.tile([0.9, 0.5, 0.1], (T, 1))
    traj = make_traj(np.tile(best, (T + 1, 1)), mu, mu)
    rep = population_regret(traj)
    assert rep.cumulative_regret == pytest.approx(0.0)
    assert rep.best_arm == 0


def test_single_round_example():
    traj = make_traj([[0.5, 0.5], [0.5, 0.5]], [[1.0, 0.0]], [[1.0, 0.0]])
    rep = population_regret(traj)
    assert rep.cumulative_regret == pytest.approx(0.5)


def test_frozen_uniform_example():
    T = 10
    mu = np.tile([0.9, 0.1], (T, 1))
    traj = make_traj(np.tile([0.5, 0.5], (T + 1, 1)), mu, mu)
    rep = population_regret(traj)
    assert rep.cumulative_regret == pytest.approx(10 * (0.9 - 0.5))


def test_cumulative_is_max_of_per_arm():
    rng = np.random.default_rng(0)
    T, m = 30, 4
    p = rng.dirichlet(np.ones(m), size=T + 1)
    mu = rng.uniform(0, 1, (T, m))
    g = (rng.random((T, m)) < mu).astype(float)
    rep = population_regret(make_traj(p, g, mu))
    assert rep.cumulative_regret == pytest.approx(rep.per_arm_regret.max())
    assert rep.per_round.shape == (T,)
    assert rep.per_round.sum() == pytest.approx(rep.per_arm_regret[rep.best_arm])


def test_deterministic_run_matches_closed_form():
    # with g = mu the realized regret equals sum_t (mu_best - <p^t, mu>)
    rng = np.random.default_rng(1)
    T, m = 20, 3
    p = rng.dirichlet(np.ones(m), size=T + 1)
    mu = np.tile([0.8, 0.5, 0.2], (T, 1))
    traj = make_traj(p, mu, mu)
    expected = sum(0.8 - p[t] @ mu[t] for t in range(T))
    assert population_regret(traj).cumulative_regret == pytest.approx(expected)


def test_mean_log_length_mismatch():
    traj = make_traj([[0.5, 0.5], [0.5, 0.5]], [[1.0, 0.0]], [[1.0, 0.0]])
    with pytest.raises(InvalidInputError):
        population_regret(traj, mean_log=np.zeros((5, 2)))


def test_regret_curve_monotone_prefix():
    traj = make_traj(
        [[0.5, 0.5]] * 4, [[1.0, 0.0]] * 3, [[1.0, 0.0]] * 3
    )
    curve = regret_curve(traj)
    assert np.allclose(curve, [0.5, 1.0, 1.5])


# ---------------------------------------------------------------------------
# bound calculators


def test_stationary_bound_example():
    inp = BoundInputs(0.25, 0.25, 0.0, 1.0 / 8.0, 0.0, 1000, True)
    assert mwu_regret_bound(inp) == pytest.approx(6 * math.log(8) / 0.25)
    assert mwu_regret_bound(inp) == pytest.approx(49.9066, abs=1e-4)


def test_adversarial_bound_reduces_to_classic_form():
    alpha, T, m = 0.1, 500, 8
    inp = BoundInputs(alpha, alpha, 0.0, 1.0 / m, 0.0, T, False)
    assert mwu_regret_bound(inp) == pytest.approx(3 * math.log(m) / alpha + 2 * alpha * T)


def test_gamma_is_additive():
    base = BoundInputs(0.2, 0.2, 0.1, 0.5, 0.0, 100, False)
    bumped = BoundInputs(0.2, 0.2, 0.1, 0.5, 1.0, 100, False)
    assert mwu_regret_bound(bumped) == pytest.approx(mwu_regret_bound(base) + 1.0)


def test_bound_input_validation():
    with pytest.raises(InvalidParameterError):
        mwu_regret_bound(BoundInputs(0.3, 0.2, 0.0, 0.5, 0.0, 10, False))
    with pytest.raises(InvalidParameterError):
        mwu_regret_bound(BoundInputs(0.1, 0.2, 0.0, 1.5, 0.0, 10, False))
    with pytest.raises(InvalidParameterError):
        mwu_regret_bound(BoundInputs(0.1, 0.2, 0.1, 0.5, 0.0, 10, True))


def test_deterministic_mwu_honors_stationary_bound():
    # deterministic rewards g = mu make the expectation argument pathwise
    beta = 1.0 / 12.0
    fam = DiscAdopt(beta, 1.0)
    mu = np.linspace(0.85, 0.15, 8)
    for T in (100, 1000):
        q = uniform_distribution(8).masses
        regret = 0.0
        for _ in range(T):
            regret += mu[0] - q @ mu
            q = mwu_step(q, mu, fam).masses
        bound = mwu_regret_bound(BoundInputs(3 * beta, 3 * beta, 0.0, 1.0 / 8.0, 0.0, T, True))
        assert regret <= bound


def test_epoch_bound_single_epoch_reduction():
    cert = DiscAdopt(1.0 / 12.0).certificate()
    T, n, m, sigma, c = 20, 10_000, 4, 1.0, 1.0
    single = epoch_regret_bound(cert, [0.25], tau=T, D=1, sigma=sigma, m=m, n=n, c=c, stationary=True)
    expected = mwu_regret_bound(
        BoundInputs(cert.alpha1, cert.alpha2, 0.0, 0.25, 0.0, T, True)
    ) + coupling_error_bound(cert.lipschitz_L, T, 1, sigma, m, n, c)
    assert single == pytest.approx(expected)


def test_epoch_bound_kappa_is_three_plus_L():
    # with L = 2 the per-epoch error scales by kappa = 5
    one = coupling_error_bound(2.0, 1, 1, 1.0, 4, 10_000)
    two = coupling_error_bound(2.0, 2, 1, 1.0, 4, 10_000)
    tail = 2 * 4 * 1.0 / 10_000  # the T/n^c term grows linearly
    assert (two - 2 * tail) / (one - tail) == pytest.approx(5.0)


def test_epoch_bound_population_scaling():
    # quadrupling n halves the kappa^tau term up to the sqrt(log n) factor
    kappa_term = lambda n: coupling_error_bound(2.0, 5, 3, 1.0, 4, n) - 2 * 4 * 15 / n
    ratio = kappa_term(40_000) / kappa_term(10_000)
    expected = 0.5 * math.sqrt(math.log(40_000) / math.log(10_000))
    assert ratio == pytest.approx(expected, rel=1e-6)


def test_epoch_bound_validation():
    cert = DiscAdopt(1.0 / 12.0).certificate()
    with pytest.raises(InvalidParameterError):
        epoch_regret_bound(cert, [0.5, 1.5], tau=5, D=2, sigma=1.0, m=4, n=1000)
    with pytest.raises(InvalidParameterError):
        epoch_regret_bound(cert, [0.5], tau=5, D=1, sigma=1.0, m=4, n=4)


# ---------------------------------------------------------------------------
# convex error and survival horizon


def test_convex_error_zero_at_minimizer():
    fn = three_arm_benchmark()
    p_star = np.array([0.75, 1.0 / 9.0, 5.0 / 36.0])
    traj = make_traj(np.tile(p_star, (6, 1)), np.zeros((5, 3)), np.zeros((5, 3)))
    assert convex_error(traj, fn) == pytest.approx(0.0, abs=1e-9)
    assert convex_error(traj, fn) >= 0.0


def test_convex_error_vertex_value():
    fn = three_arm_benchmark()
    vertex = np.array([1.0, 0.0, 0.0])
    traj = make_traj(np.tile(vertex, (4, 1)), np.zeros((3, 3)), np.zeros((3, 3)))
    assert convex_error(traj, fn) == pytest.approx(2.7 - 5743.0 / 2160.0, abs=1e-9)
    assert convex_error(traj, fn) == pytest.approx(0.041204, abs=1e-6)


def test_convex_error_nonnegative_random():
    rng = np.random.default_rng(2)
    fn = three_arm_benchmark()
    for _ in range(20):
        p = rng.dirichlet(np.ones(3), size=8)
        traj = make_traj(p, np.zeros((7, 3)), np.zeros((7, 3)))
        assert convex_error(traj, fn) >= -1e-12


def test_mass_survival_horizon_examples():
    m = 4
    n = int(round(2 * m * math.e))
    assert mass_survival_horizon(n, m) == 4
    assert mass_survival_horizon(10**5, 4) == 37
    with pytest.raises(InvalidParameterError):
        mass_survival_horizon(8, 4)
