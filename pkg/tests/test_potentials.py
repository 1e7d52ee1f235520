import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import expit

from gossip_bandits import (
    BetaAdopt,
    DiscAdopt,
    InvalidParameterError,
    InvalidRewardError,
    SigmoidAdopt,
    SoftmaxCompare,
    TwoNeighborSoftmax,
    WrongFamilyError,
    adoption_prob,
    certificate,
    comparison_weights,
    eval_potentials,
    make_family,
    uniform_distribution,
    verify_exp_linearization,
    verify_sigmoid_linearization,
    zero_sum_residual,
)
from gossip_bandits.verify import default_families, exact_bernoulli_potential_means

RNG = np.random.default_rng(20240817)


def random_inputs(family, m, rng=RNG):
    p = rng.dirichlet(np.ones(m))
    if isinstance(family, BetaAdopt):
        g = rng.integers(0, 2, m).astype(float)
    elif isinstance(family, DiscAdopt):
        g = rng.uniform(0.0, family.sigma, m)
    else:
        g = rng.uniform(-1.0, 1.0, m)
    return p, g


# ---------------------------------------------------------------------------
# adoption_prob


def test_beta_adopt_prob_examples():
    fam = BetaAdopt(13.0 / 24.0)
    assert adoption_prob(fam, 1.0) == pytest.approx(13.0 / 24.0)
    assert adoption_prob(fam, 0.0) == pytest.approx(11.0 / 24.0)


def test_sigmoid_adopt_prob_at_zero():
    for beta in (0.1, 1.0, 2.0):
        assert adoption_prob(SigmoidAdopt(beta), 0.0) == pytest.approx(0.5)


def test_disc_adopt_prob_example():
    assert adoption_prob(DiscAdopt(0.05, 1.0), 1.0) == pytest.approx(0.05)


def test_adoption_prob_wrong_family():
    with pytest.raises(WrongFamilyError):
        adoption_prob(SoftmaxCompare(1.0), 0.5)
    with pytest.raises(WrongFamilyError):
        adoption_prob(TwoNeighborSoftmax(1.0), 0.5)


def test_adoption_prob_outside_support():
    with pytest.raises(InvalidRewardError):
        adoption_prob(BetaAdopt(0.6), 0.5)
    with pytest.raises(InvalidRewardError):
        adoption_prob(DiscAdopt(0.5, 1.0), 1.5)


def test_adoption_prob_monotone_in_reward():
    for fam in (DiscAdopt(0.3, 1.0), SigmoidAdopt(0.8)):
        grid = np.linspace(0.0, 1.0, 21)
        vals = [adoption_prob(fam, g) for g in grid]
        assert np.all(np.diff(vals) >= 0)
        assert all(0.0 <= v <= 1.0 for v in vals)


# ---------------------------------------------------------------------------
# comparison_weights


def test_comparison_weights_tie():
    rho = comparison_weights(SoftmaxCompare(0.7), 0.3, 0.3)
    assert rho == pytest.approx((0.5, 0.5))


def test_comparison_weights_derived_value():
    rho_own, rho_other = comparison_weights(SoftmaxCompare(1.0), 1.0, 0.0)
    e = math.e
    assert rho_own == pytest.approx(e / (e + 1.0))
    assert rho_other == pytest.approx(1.0 / (e + 1.0))
    assert rho_own + rho_other == pytest.approx(1.0)


def test_comparison_weights_flat_at_beta_zero():
    assert comparison_weights(SoftmaxCompare(0.0), 2.0, -3.0) == pytest.approx((0.5, 0.5))


def test_comparison_weights_wrong_family():
    with pytest.raises(WrongFamilyError):
        comparison_weights(DiscAdopt(0.1), 1.0, 0.0)


def test_comparison_score_monotone():
    fam = SoftmaxCompare(0.9)
    grid = np.linspace(-1.0, 1.0, 21)
    own = [fam.comparison_weights(g, 0.0)[0] for g in grid]
    assert np.all(np.diff(own) >= 0)


# ---------------------------------------------------------------------------
# eval_potentials / zero_sum_residual


def test_potentials_vanish_for_constant_rewards():
    p = uniform_distribution(5)
    for fam in default_families():
        g = np.ones(5) if not isinstance(fam, BetaAdopt) else np.ones(5)
        assert np.allclose(eval_potentials(fam, p, g), 0.0, atol=1e-14)


def test_disc_adopt_potentials_example():
    F = eval_potentials(DiscAdopt(0.05, 1.0), [0.5, 0.5], [1.0, 0.0])
    assert np.allclose(F, [0.025, -0.025])


def test_zero_sum_over_random_triples():
    for fam in default_families():
        for _ in range(200):
            m = int(RNG.integers(2, 17))
            p, g = random_inputs(fam, m)
            assert abs(zero_sum_residual(fam, p, g)) <= 1e-10


@settings(max_examples=150, deadline=None)
@given(
    st.integers(min_value=0, max_value=4),
    st.lists(st.floats(min_value=1e-3, max_value=1.0), min_size=3, max_size=8),
    st.data(),
)
def test_zero_sum_property(fam_ix, weights, data):
    fam = default_families()[fam_ix]
    m = len(weights)
    p = np.asarray(weights) / np.sum(weights)
    if isinstance(fam, BetaAdopt):
        g = np.asarray(data.draw(st.lists(st.sampled_from([0.0, 1.0]), min_size=m, max_size=m)))
    else:
        lo = 0.0 if isinstance(fam, DiscAdopt) else -1.0
        g = np.asarray(
            data.draw(st.lists(st.floats(min_value=lo, max_value=1.0), min_size=m, max_size=m))
        )
    assert abs(zero_sum_residual(fam, p, g)) <= 1e-10


def test_extreme_beta_spread_stays_finite():
    # scores underflow for far-behind arms; potentials must stay finite
    fam = TwoNeighborSoftmax(200.0)
    F = eval_potentials(fam, [0.3, 0.3, 0.4], [5.0, 0.0, -5.0])
    assert np.all(np.isfinite(F))
    assert abs(zero_sum_residual(fam, [0.3, 0.3, 0.4], [5.0, 0.0, -5.0])) <= 1e-10


def test_zero_sum_point_mass():
    p = np.array([0.0, 1.0, 0.0])
    g = np.array([0.3, 0.9, 0.1])
    assert zero_sum_residual(DiscAdopt(0.5, 1.0), p, g) == pytest.approx(0.0, abs=1e-12)


def test_two_neighbor_zero_sum_m5():
    fam = TwoNeighborSoftmax(0.8)
    for _ in range(50):
        p, g = random_inputs(fam, 5)
        assert abs(zero_sum_residual(fam, p, g)) <= 1e-10


def test_two_neighbor_matches_exhaustive_protocol_expectation():
    # independent oracle: enumerate every (own arm, neighbor, neighbor)
    # slot combination and weight the slot-level softmax choice
    fam = TwoNeighborSoftmax(0.7)
    rng = np.random.default_rng(7)
    for _ in range(10):
        m = int(rng.integers(2, 6))
        p = rng.dirichlet(np.ones(m))
        g = rng.uniform(-1.0, 1.0, m)
        h = np.exp(fam.beta * (g - g.max()))
        expected = np.zeros(m)
        for o in range(m):
            for a in range(m):
                for b in range(m):
                    w = p[o] * p[a] * p[b]
                    tot = h[o] + h[a] + h[b]
                    for arm, cnt in zip(*np.unique([o, a, b], return_counts=True)):
                        expected[arm] += w * cnt * h[arm] / tot
        predicted = p * (1.0 + eval_potentials(fam, p, g))
        assert np.allclose(predicted, expected, atol=1e-12)


def test_boundedness_adoption_and_comparison():
    for fam in default_families():
        if fam.is_two_neighbor:
            continue
        for _ in range(100):
            m = int(RNG.integers(2, 17))
            p, g = random_inputs(fam, m)
            F = eval_potentials(fam, p, g)
            assert np.all(np.abs(F) <= 1.0 + 1e-12)


def test_two_neighbor_potentials_within_growth_range():
    # mass can at most triple in a round (three observed slots), never vanish faster than to 0
    fam = TwoNeighborSoftmax(3.0)
    for _ in range(100):
        m = int(RNG.integers(2, 9))
        p, g = random_inputs(fam, m)
        F = eval_potentials(fam, p, g)
        assert np.all(F >= -1.0 - 1e-12)
        assert np.all(F <= 2.0 + 1e-12)


def test_lipschitz_in_first_argument():
    for fam in default_families():
        if fam.is_two_neighbor:
            continue
        for _ in range(100):
            m = int(RNG.integers(2, 10))
            p, g = random_inputs(fam, m)
            q = RNG.dirichlet(np.ones(m))
            dist = np.abs(p - q).sum()
            diff = np.abs(eval_potentials(fam, p, g) - eval_potentials(fam, q, g)).max()
            assert diff <= 2.0 * dist + 1e-12


def test_dimension_mismatch():
    from gossip_bandits import InvalidDimensionError

    with pytest.raises(InvalidDimensionError):
        eval_potentials(DiscAdopt(0.1), [0.5, 0.5], [1.0, 0.0, 0.0])


# ---------------------------------------------------------------------------
# certificates


def test_softmax_certificate_example():
    cert = certificate(SoftmaxCompare(0.02), 10.0)
    assert cert.alpha1 == pytest.approx(0.03)
    assert cert.alpha2 == pytest.approx(0.03)
    assert cert.delta == pytest.approx(0.8)
    assert cert.lipschitz_L == 2.0
    assert cert.valid


def test_beta_adopt_certificate_boundary():
    cert = certificate(BetaAdopt(13.0 / 24.0))
    assert cert.alpha1 == pytest.approx(0.25)
    assert cert.delta == 0.0
    assert cert.valid  # alpha2 = 1/4 boundary counts as valid


def test_sigmoid_certificate_out_of_range():
    cert = certificate(SigmoidAdopt(2.0), 10.0)
    assert not cert.valid
    assert "1/(4*sigma)" in cert.validity_reason or "1/3" in cert.validity_reason
    assert cert.alpha1 == pytest.approx(1.5)  # values still reported


def test_disc_adopt_certificate_reports_both_constants():
    cert = certificate(DiscAdopt(1.0 / 12.0, 1.0))
    assert cert.alpha1 == pytest.approx(0.25)
    assert cert.delta == 0.0
    assert cert.valid
    # both the working 3*beta and the raw beta constants are surfaced
    assert "3*beta" in cert.validity_reason and "beta=0.08333" in cert.validity_reason


def test_two_neighbor_has_no_certificate():
    cert = certificate(TwoNeighborSoftmax(0.1))
    assert not cert.valid
    assert math.isnan(cert.alpha1)


def test_certificate_invariants_when_valid():
    for fam, sigma in [
        (BetaAdopt(0.53), 1.0),
        (DiscAdopt(0.05, 1.0), 1.0),
        (SigmoidAdopt(0.1), 2.0),
        (SoftmaxCompare(0.05), 2.0),
    ]:
        cert = certificate(fam, sigma)
        assert cert.valid
        assert 0.0 < cert.alpha1 <= cert.alpha2 <= 0.25 + 1e-12
        assert 0.0 <= cert.delta <= 1.0
        assert cert.lipschitz_L > 0


def test_certificate_bracket_via_enumeration():
    # exact E_g[F_j] over all 2^m Bernoulli outcomes, against the signed
    # two-sided certificate bound
    rng = np.random.default_rng(99)
    fams = [BetaAdopt(0.53), DiscAdopt(1.0 / 12.0), SigmoidAdopt(0.2), SoftmaxCompare(0.15)]
    for _ in range(25):
        m = int(rng.integers(2, 9))
        q = rng.dirichlet(np.ones(m))
        mu = rng.uniform(0.0, 1.0, m)
        rel = mu - q @ mu
        for fam in fams:
            cert = certificate(fam, 1.0)
            ef = exact_bernoulli_potential_means(fam, q, mu)
            assert np.all(ef >= cert.alpha1 / 3.0 * (rel - cert.delta) - 1e-9)
            assert np.all(ef <= cert.alpha2 / 3.0 * (rel + cert.delta) + 1e-9)


def test_disc_adopt_bracket_is_exact():
    rng = np.random.default_rng(123)
    fam = DiscAdopt(1.0 / 12.0)
    for _ in range(10):
        m = int(rng.integers(2, 9))
        q = rng.dirichlet(np.ones(m))
        mu = rng.uniform(0.0, 1.0, m)
        ef = exact_bernoulli_potential_means(fam, q, mu)
        assert np.allclose(ef, fam.beta * (mu - q @ mu), atol=1e-12)


def test_family_parameter_validation():
    with pytest.raises(InvalidParameterError):
        BetaAdopt(0.4)
    with pytest.raises(InvalidParameterError):
        DiscAdopt(1.5, 1.0)
    with pytest.raises(InvalidParameterError):
        SigmoidAdopt(0.0)
    with pytest.raises(InvalidParameterError):
        make_family("no-such-family", 0.1)


# ---------------------------------------------------------------------------
# linearization grids


def test_exp_linearization_equal_arguments():
    from gossip_bandits.potentials import exp_quotient

    assert exp_quotient(0.2, 3.0, 3.0) == 0.0


def test_exp_linearization_grid_passes():
    rep = verify_exp_linearization(0.25, 201)
    assert rep.passed
    assert rep.lower_slack >= -1e-12 and rep.upper_slack >= -1e-12


def test_exp_linearization_derived_point():
    beta, x, y = 0.1, 10.0, -10.0
    mid = abs(math.tanh(0.5 * beta * (x - y)))
    assert mid == pytest.approx(math.tanh(1.0))
    lower = (0.5 - 2 * beta) * beta * abs(x - y)
    upper = 0.5 * beta * abs(x - y)
    assert lower == pytest.approx(0.6)
    assert upper == pytest.approx(1.0)
    assert lower <= mid <= upper


def test_sigmoid_linearization_at_zero():
    beta = 0.2
    assert expit(beta * 0.0) == 0.5  # both envelope lines also pass through 1/2


def test_sigmoid_linearization_grid_passes():
    for beta in (0.01, 0.05, 0.1, 0.2, 0.25):
        rep = verify_sigmoid_linearization(beta, 201)
        assert rep.passed


def test_sigmoid_linearization_derived_point():
    beta, x = 0.2, 5.0
    mid = float(expit(beta * x))
    assert mid == pytest.approx(1.0 / (1.0 + math.exp(-1.0)))
    assert 0.5 + (beta / 4 - beta * beta) * x == pytest.approx(0.55)
    assert 0.5 + beta / 4 * x == pytest.approx(0.75)
    assert 0.55 <= mid <= 0.75


def test_linearization_rejects_bad_beta():
    with pytest.raises(InvalidParameterError):
        verify_exp_linearization(0.3)
    with pytest.raises(InvalidParameterError):
        verify_sigmoid_linearization(-0.1)
