import math

import pytest

from palm_extremes import analytic
from palm_extremes.exceptions import PreconditionViolation
from palm_extremes.metrics import cp_count_pmf
from palm_extremes.sampling import GaussPoissonParams


def test_a_of_v():
    assert analytic.a_of_v(0.0) == 0.0
    assert analytic.a_of_v(0.5) == 0.0
    assert analytic.a_of_v(1.0) == pytest.approx(2 * math.pi / 3 - math.sqrt(3) / 2, abs=1e-12)
    assert analytic.a_of_v(1.0) == pytest.approx(1.228370, abs=1e-6)
    v = 100.0
    assert abs(analytic.a_of_v(v) - (math.pi * v * v - 2 * v)) < 1e-3
    with pytest.raises(PreconditionViolation):
        analytic.a_of_v(-0.1)


def test_a_of_v_just_above_one():
    assert analytic.a_of_v(1.0 + 1e-15) == pytest.approx(analytic.a_of_v(1.0), abs=1e-6)


def test_gp_void_prob_values():
    params = GaussPoissonParams(0.2, 0.6, 0.2)
    assert analytic.gp_void_prob(0.0, params) == 1.0
    assert analytic.gp_void_prob(1.0, (0.7, 0.0)) == pytest.approx(math.exp(-0.7 * math.pi))
    a2 = 8 * math.acos(0.25) - math.sqrt(15) / 2
    expected = 0.5 * math.exp(-(2 * math.pi + 0.25 * (8 * math.pi - a2)))
    assert analytic.gp_void_prob(2.0, (0.5, 0.25)) == pytest.approx(expected, rel=1e-12)


def test_gp_void_prob_pure_poisson_pair():
    # p0 = 0 is only expressible as a bare (p1, p2) pair
    assert analytic.gp_void_prob(0.5, (1.0, 0.0)) == pytest.approx(math.exp(-math.pi * 0.25))


def test_gp_void_prob_jump_at_one():
    params = (0.6, 0.2)
    left, value = analytic.gp_void_prob_limits(params)
    assert left == pytest.approx(math.exp(-math.pi))
    assert value == pytest.approx(0.6 * math.exp(-(0.6 * math.pi + 0.2 * (2 * math.pi - analytic.a_of_v(1.0)))))
    assert analytic.gp_void_prob(1.0 - 1e-12, params) == pytest.approx(left, rel=1e-9)
    assert analytic.gp_void_prob(1.0 + 1e-12, params) == pytest.approx(value, rel=1e-9)
    assert left != pytest.approx(value)


@pytest.mark.parametrize('params', [(0.0, 0.5), (0.5, -0.1), (0.8, 0.5)])
def test_void_weights_rejects_bad_pairs(params):
    with pytest.raises(PreconditionViolation):
        analytic.void_weights(params)


def test_nn_expected_exceedances():
    params = GaussPoissonParams(0.35, 0.5, 0.15)
    v = 1.3
    assert analytic.nn_expected_exceedances(100.0, v, params) == pytest.approx(
        0.8 * 100.0 * analytic.gp_void_prob(v, params))


def test_mardia_pdf():
    assert analytic.mardia_pdf(0.0) == 0.0
    assert analytic.mardia_pdf(math.pi / 3) == pytest.approx(0.0, abs=1e-12)
    assert analytic.mardia_pdf(math.pi / 6) == pytest.approx(math.sqrt(3) / 2 + 2 / math.pi)
    assert analytic.mardia_pdf(math.pi / 6) == pytest.approx(1.50263, abs=1e-5)
    assert analytic.mardia_pdf(-0.1) == 0.0
    assert analytic.mardia_pdf(1.2) == 0.0


def test_mardia_cdf():
    assert analytic.mardia_cdf(math.pi / 3) == pytest.approx(1.0, abs=1e-9)
    assert analytic.mardia_cdf(2.0) == pytest.approx(1.0, abs=1e-9)
    assert analytic.mardia_cdf(-1.0) == 0.0
    assert analytic.mardia_cdf(0.0) == 0.0


def test_mardia_cdf_small_angle_expansion():
    # the density is 4t - (8/3) t^3 + O(t^4) near zero
    v = 0.01
    assert abs(analytic.mardia_cdf(v) - (2 * v ** 2 - 2.0 / 3.0 * v ** 4)) < 1e-9
    assert analytic.mardia_cdf(0.02) / (2 * 0.02 ** 2) == pytest.approx(1.0, abs=1e-3)


def test_mardia_quantile_inverts_cdf():
    for t in (0.01, 0.3, 0.9):
        assert analytic.mardia_quantile(analytic.mardia_cdf(t)) == pytest.approx(t, abs=1e-9)
    assert analytic.mardia_quantile(0.0) == 0.0
    assert analytic.mardia_quantile(1.0) == analytic.PI_3
    with pytest.raises(PreconditionViolation):
        analytic.mardia_quantile(1.5)


def test_expected_angle_exceedances():
    n, tau = 1e4, 1.0
    v = 0.5 * math.sqrt(tau / n)
    assert analytic.expected_angle_exceedances(n, v) == pytest.approx(tau, abs=1e-4)


def test_cp_limit_params():
    limit = analytic.cp_limit_params(2.0)
    assert limit.pi1_mass == 1.0
    assert limit.pi2_mass == 0.5
    assert limit.gamma == 1.5
    assert limit.Q[1] == pytest.approx(2 / 3.0)
    assert limit.Q[2] == pytest.approx(1 / 3.0)
    assert limit.mean_cluster_size == pytest.approx(4 / 3.0)
    assert limit.Q[1] * limit.gamma == pytest.approx(limit.pi1_mass)
    assert limit.Q[2] * limit.gamma == pytest.approx(limit.pi2_mass)
    for tau in (0.1, 1.0, 7.5):
        assert analytic.cp_limit_params(tau).theta == pytest.approx(0.75)
    with pytest.raises(PreconditionViolation):
        analytic.cp_limit_params(0.0)


@pytest.mark.parametrize('tau', [0.5, 1.0, 5.0])
def test_cp_limit_void_probability(tau):
    law = cp_count_pmf(analytic.cp_limit_params(tau).cluster_masses())
    assert law[0] == pytest.approx(math.exp(-0.75 * tau), abs=1e-12)


def test_poisson_partial_sum():
    assert analytic.poisson_partial_sum(1.0, 1) == pytest.approx(math.exp(-1.0))
    assert analytic.poisson_partial_sum(1.0, 200) == pytest.approx(1.0, abs=1e-12)
    assert analytic.poisson_partial_sum(2.0, 3) == pytest.approx(5 * math.exp(-2.0))
    with pytest.raises(PreconditionViolation):
        analytic.poisson_partial_sum(1.0, 0)
    with pytest.raises(PreconditionViolation):
        analytic.poisson_partial_sum(1.0, 1.5)


def test_pn2_integral():
    one = analytic.pn2_integral(1.0)
    assert one == pytest.approx(0.0625, abs=1e-6)
    assert analytic.pn2_integral(2.0) == pytest.approx(4 * one, abs=1e-6)


def test_pn2_integral_size_two_probability():
    n, tau = 1e4, 1.0
    v = 0.5 * math.sqrt(tau / n)
    assert 32 * n / tau * analytic.pn2_integral(v) == pytest.approx(0.5, abs=1e-6)
