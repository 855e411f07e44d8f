import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

import oracles
from obslearn import (
    BeliefInterval,
    GaussianModel,
    Player,
    QuadratureSettings,
    conditional_type_density,
    is_symmetric,
    marginal_expectation,
    opponent,
    posterior_mean,
    truncated_expectation,
    type_probability,
)
from obslearn.errors import DegenerateSupportError, InvalidArgumentError

UNIT = GaussianModel(1.0, 1.0, 1.0)
ASYM = GaussianModel(1.0, 1.0, 2.0)
finite = st.floats(-6.0, 6.0, allow_nan=False)
sigmas = st.floats(0.3, 3.0)


def test_players_are_each_others_opponent():
    assert opponent(Player.A) is Player.B
    assert opponent(Player.B) is Player.A
    assert len(list(Player)) == 2


@pytest.mark.parametrize("bad", [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, math.inf), (math.nan, 1.0, 1.0)])
def test_model_rejects_nonpositive_or_nonfinite_sd(bad):
    with pytest.raises(InvalidArgumentError):
        GaussianModel(*bad)


@pytest.mark.parametrize("field,value", [("abs_tol", 0.0), ("rel_tol", 1.0), ("max_subdivisions", 0),
                                         ("tail_mass_cutoff", 1e-9)])
def test_quadrature_settings_validation(field, value):
    with pytest.raises(ValueError):
        QuadratureSettings(**{field: value})


def test_posterior_mean_unit_model_closed_form():
    assert posterior_mean(UNIT, 1.0, 1.0) == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert posterior_mean(ASYM, 0.0, 0.0) == 0.0


def test_posterior_mean_matches_state_quadrature():
    expected = oracles.posterior_mean_by_state_quadrature(1.0, 1.0, 2.0, 1.0, -1.0)
    assert posterior_mean(ASYM, 1.0, -1.0) == pytest.approx(expected, abs=1e-8)


def test_posterior_mean_rejects_nonfinite():
    with pytest.raises(InvalidArgumentError):
        posterior_mean(UNIT, math.nan, 0.0)


@given(finite, finite, sigmas, sigmas)
@settings(max_examples=50, deadline=None)
def test_posterior_mean_is_antisymmetric_under_symmetry(s_a, s_b, s0, s):
    model = GaussianModel(s0, s, s)
    assert posterior_mean(model, -s_a, -s_b) == pytest.approx(-posterior_mean(model, s_a, s_b), abs=1e-12)


def test_conditional_density_at_mean_has_variance_three_halves():
    expected = 1.0 / math.sqrt(2.0 * math.pi * 1.5)
    assert conditional_type_density(UNIT, Player.A, 0.0, 0.0) == pytest.approx(expected, rel=1e-14)


@given(st.floats(0.0, 8.0))
def test_conditional_density_symmetric_at_zero_signal(t):
    assert conditional_type_density(UNIT, Player.A, 0.0, t) == pytest.approx(
        conditional_type_density(UNIT, Player.A, 0.0, -t), rel=1e-14)


def test_conditional_density_normalises():
    total, _ = integrate.quad(lambda t: conditional_type_density(ASYM, Player.A, 2.0, t), -np.inf, np.inf,
                              epsabs=1e-12)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_conditional_density_rejects_nonfinite():
    with pytest.raises(InvalidArgumentError):
        conditional_type_density(UNIT, Player.A, 0.0, math.inf)


def test_truncated_expectation_paper_examples():
    assert truncated_expectation(UNIT, Player.A, 0.0, BeliefInterval.reals()) == pytest.approx(0.0, abs=1e-12)
    assert truncated_expectation(UNIT, Player.A, 0.0, BeliefInterval(0.0, math.inf)) > 0.0
    assert truncated_expectation(UNIT, Player.A, 1.0, BeliefInterval.reals()) == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("observer", list(Player))
@pytest.mark.parametrize("s_own,lo,hi", [(0.3, -1.0, 2.0), (-2.0, 0.0, math.inf), (1.5, -math.inf, -0.5),
                                         (0.0, 4.0, 5.0), (-4.0, -0.1, 0.1)])
def test_truncated_expectation_matches_truncnorm_oracle(observer, s_own, lo, hi):
    expected = oracles.truncated_expectation(1.0, 1.0, 2.0, observer.value, s_own, lo, hi)
    assert truncated_expectation(ASYM, observer, s_own, BeliefInterval(lo, hi)) == pytest.approx(expected, abs=1e-8)


def test_truncated_expectation_point_interval_uses_closed_form():
    assert truncated_expectation(UNIT, Player.A, 0.9, BeliefInterval.point(0.0)) == pytest.approx(0.3, abs=1e-15)


@pytest.mark.parametrize("s_own,lo,hi", [(0.0, 40.0, 41.0), (50.0, -math.inf, 0.0), (-50.0, 0.0, math.inf)])
def test_truncated_expectation_accurate_for_tiny_mass(s_own, lo, hi):
    expected = oracles.truncated_expectation(1.0, 1.0, 1.0, "a", s_own, lo, hi)
    assert truncated_expectation(UNIT, Player.A, s_own, BeliefInterval(lo, hi)) == pytest.approx(expected, abs=1e-8)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_truncated_expectation_unusable_support_raises():
    with pytest.raises(DegenerateSupportError):
        truncated_expectation(UNIT, Player.A, 0.0, BeliefInterval(1e200, math.inf))


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.05, 4.0))
@settings(max_examples=40, deadline=None)
def test_truncated_expectation_reflection(s, lo, width):
    S = BeliefInterval(lo, lo + width)
    assert truncated_expectation(UNIT, Player.B, s, S) == pytest.approx(
        -truncated_expectation(UNIT, Player.B, -s, S.reflect()), abs=1e-8)


@given(st.floats(-2, 2), st.floats(-2, 1), st.floats(0.1, 1.0))
@settings(max_examples=40, deadline=None)
def test_truncation_ordering(s, lo, cut):
    base = BeliefInterval(lo, math.inf)
    left = BeliefInterval(lo + cut, math.inf)
    right = BeliefInterval(lo, lo + cut)
    e = truncated_expectation(ASYM, Player.A, s, base)
    assert truncated_expectation(ASYM, Player.A, s, left) > e
    assert truncated_expectation(ASYM, Player.A, s, right) < e


def test_marginal_expectation_closed_form():
    assert marginal_expectation(UNIT, Player.A, 2.0) == pytest.approx(1.0, abs=1e-15)
    assert marginal_expectation(ASYM, Player.B, 0.0) == 0.0
    assert marginal_expectation(ASYM, Player.B, 1.0) == pytest.approx(0.2, abs=1e-15)


def test_marginal_expectation_matches_state_quadrature():
    for s in (-2.0, 0.4, 3.0):
        assert marginal_expectation(ASYM, Player.B, s) == pytest.approx(
            oracles.marginal_mean_by_state_quadrature(1.0, 2.0, s), abs=1e-10)


def test_marginal_expectation_matches_unrestricted_truncated_expectation():
    for s in np.linspace(-4, 4, 100):
        for player in Player:
            assert truncated_expectation(ASYM, player, s, BeliefInterval.reals()) == pytest.approx(
                marginal_expectation(ASYM, player, s), abs=1e-6)


def test_type_probability_trivial_values():
    assert type_probability(UNIT, Player.A, 0.0, BeliefInterval(0.0, math.inf)) == pytest.approx(0.5, abs=1e-15)
    assert type_probability(ASYM, Player.B, 1.7, BeliefInterval.reals()) == 1.0


def test_type_probability_matches_cdf_oracle():
    expected = oracles.interval_probability(1.0, 1.0, 2.0, "a", -0.5, 0.0, 1.0)
    assert type_probability(ASYM, Player.A, -0.5, BeliefInterval(0.0, 1.0)) == pytest.approx(expected, abs=1e-14)


@given(st.floats(-3, 3), st.lists(st.floats(-5, 5), min_size=1, max_size=6))
def test_type_probability_is_additive(s, cuts):
    points = [-math.inf] + sorted(cuts) + [math.inf]
    parts = [type_probability(ASYM, Player.A, s, BeliefInterval(lo, hi)) for lo, hi in zip(points, points[1:])]
    assert all(0.0 <= p <= 1.0 for p in parts)
    assert math.fsum(parts) == pytest.approx(1.0, abs=1e-12)


def test_symmetry_flag():
    assert is_symmetric(UNIT)
    assert not is_symmetric(ASYM)
    tol = 1e-6
    assert is_symmetric(GaussianModel(1.0, 1.0, 1.0 + tol / 2), tol)
    assert not is_symmetric(GaussianModel(1.0, 1.0, 1.0 + tol / 2))


def test_mirrored_swaps_players():
    m = ASYM.mirrored()
    assert (m.sigma_a, m.sigma_b) == (2.0, 1.0)
    assert m.posterior_mean(0.4, -1.1) == pytest.approx(ASYM.posterior_mean(-1.1, 0.4), abs=1e-15)


def test_conditional_moments_match_oracle():
    for player in Player:
        mean, sd = ASYM.conditional_moments(player, 1.3)
        o_mean, o_sd = oracles.conditional_moments(1.0, 1.0, 2.0, player.value, 1.3)
        assert (mean, sd) == pytest.approx((o_mean, o_sd), abs=1e-14)


def test_monte_carlo_interval_probability():
    rng = np.random.default_rng(7)
    mean, sd = oracles.conditional_moments(1.0, 1.0, 2.0, "b", 0.8)
    p_mc, se = oracles.monte_carlo_probability(rng, mean, sd, -1.0, 0.5, 400_000)
    p = type_probability(ASYM, Player.B, 0.8, BeliefInterval(-1.0, 0.5))
    assert abs(p - p_mc) <= 3 * se
    assert stats.norm.cdf(0.5, mean, sd) - stats.norm.cdf(-1.0, mean, sd) == pytest.approx(p, abs=1e-14)
