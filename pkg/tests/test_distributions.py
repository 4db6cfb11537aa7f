"""Degree-family builders, pgf machinery and infectious periods.

Closed-form comparisons use independent references: exp/geometric series
identities, mpmath's polylogarithm, and central finite differences.
"""

import math

import mpmath
import numpy as np
import pytest

from netclt import (
    ConstantPeriod,
    ExponentialPeriod,
    ZeroOrInfinityPeriod,
    build_constant,
    build_geometric,
    build_poisson,
    build_power_cutoff,
    from_pmf,
    parse_degree_spec,
    parse_period_spec,
    period_matched_to_transmission,
    pgf_derivative,
    sample_transmission_count,
    transmission_params,
)


def test_constant_family():
    d5 = build_constant(5)
    assert d5.mean == 5 and d5.variance == 0
    assert d5.pgf(0.5) == 0.5**5
    assert build_constant(0).mean == 0
    assert build_constant(2).size_biased_mean == 1.0  # (2-1)*2*1/2


def test_poisson_family():
    dist = build_poisson(5.0, tail_tol=1e-14)
    assert abs(dist.mean - 5.0) < 1e-9
    assert abs(dist.variance - 5.0) < 1e-9
    # truncated series against the closed form e^(mu(s-1))
    assert abs(dist.pgf(0.5) - math.exp(-2.5)) < 1e-9


def test_geometric_family():
    dist = build_geometric(1.0 / 6.0)
    assert abs(dist.mean - 5.0) < 1e-9
    assert abs(dist.variance - 30.0) < 1e-9
    p = 1.0 / 6.0
    s = 0.9
    assert abs(dist.pgf(s) - p / (1.0 - (1.0 - p) * s)) < 1e-9


def test_power_cutoff_family():
    alpha, kappa = 1.0, 13.796
    dist = build_power_cutoff(alpha, kappa)
    assert abs(dist.mean - 5.0) < 0.01  # parameters were chosen for mean 5
    assert dist.pmf[0] == 0.0
    # first derivative against the polylogarithm closed form
    theta = math.exp(-1.0 / kappa)
    beta = float(mpmath.polylog(alpha, theta))
    s = 0.8
    expected = float(mpmath.polylog(alpha - 1, theta * s)) / (beta * s)
    assert abs(dist.pgf(s, 1) - expected) < 1e-9


@pytest.mark.parametrize("name", ["const5", "po5", "geom", "power"])
def test_moment_identities(families, name):
    dist = families[name]
    assert abs(dist.pgf(1.0, 1) - dist.mean) < 1e-9
    assert abs(dist.pgf(1.0, 2) + dist.mean - dist.mean**2 - dist.variance) < 1e-9
    assert abs(dist.pmf.sum() - 1.0) < 1e-12


def test_pgf_derivative_values():
    d5 = build_constant(5)
    assert pgf_derivative(d5, 1.0, 1) == 5.0
    assert pgf_derivative(d5, 1.0, 0) == 1.0
    red = d5.reduced_uniform(0.05)
    assert abs(pgf_derivative(red, 1.0, 0) - 0.95) < 1e-12


@pytest.mark.parametrize("name", ["const5", "po5", "geom", "power"])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_pgf_derivative_vs_finite_differences(families, name, k):
    dist = families[name]
    h = 1e-5
    for s in (0.3, 0.55, 0.7, 0.9):
        central = (dist.pgf(s + h, k - 1) - dist.pgf(s - h, k - 1)) / (2 * h)
        exact = dist.pgf(s, k)
        assert abs(central - exact) <= 1e-6 * max(1.0, abs(exact))


def test_geometric_second_derivative_oracle():
    dist = build_geometric(1.0 / 6.0)
    h = 1e-5
    central = (dist.pgf(0.7 + h, 1) - dist.pgf(0.7 - h, 1)) / (2 * h)
    assert abs(central - dist.pgf(0.7, 2)) < 1e-6 * dist.pgf(0.7, 2)


def test_transmission_params():
    lam = -math.log(0.7)
    p, q, q2 = transmission_params(ConstantPeriod(1.0), lam)
    assert abs(p - 0.3) < 1e-15 and abs(q - 0.7) < 1e-15 and abs(q2 - 0.49) < 1e-15
    p, q, q2 = transmission_params(ZeroOrInfinityPeriod(0.3), 1.7)
    assert abs(p - 0.3) < 1e-15 and q == 0.7 and q2 == 0.7
    p, q, q2 = transmission_params(ExponentialPeriod(rate=7.0), 1.0)
    assert abs(p - 0.125) < 1e-15  # lam/(lam+rate)


@pytest.mark.parametrize(
    "period",
    [
        ConstantPeriod(1.0),
        ConstantPeriod(2.5),
        ExponentialPeriod(0.5),
        ExponentialPeriod(3.0),
        ZeroOrInfinityPeriod(0.25),
        ZeroOrInfinityPeriod(0.8),
    ],
)
@pytest.mark.parametrize("lam", [0.1, 0.5, 1.3])
def test_pair_failure_jensen(period, lam):
    # phi(2 lam) >= phi(lam)^2, with equality only for constant periods
    p, q, q2 = transmission_params(period, lam)
    assert q2 >= q * q - 1e-15
    assert transmission_params(period, 2 * lam)[1] <= q + 1e-15  # monotone
    if isinstance(period, ConstantPeriod):
        assert abs(q2 - q * q) < 1e-15


def test_zero_or_infinity_pair_failure_gap():
    pi = 0.3
    _, q, q2 = transmission_params(ZeroOrInfinityPeriod(pi), 2.0)
    assert abs((q2 - q * q) - pi * (1 - pi)) < 1e-15


def test_laplace_at_zero_is_total_mass():
    assert ConstantPeriod(1.0).laplace(0.0) == 1.0
    assert ExponentialPeriod(2.0).laplace(0.0) == 1.0
    assert ZeroOrInfinityPeriod(0.3).laplace(0.0) == 1.0
    assert ZeroOrInfinityPeriod(0.3).laplace(1e-9) == 0.7


def test_sample_transmission_count_degenerate(rng):
    per = ConstantPeriod(1.0)
    assert sample_transmission_count(per, 0.4, 0, rng) == 0
    assert sample_transmission_count(per, 0.0, 7, rng) == 0


def test_sample_transmission_count_constant_mean(rng):
    lam = -math.log(0.7)
    n = 10**6
    draws = np.array(
        [sample_transmission_count(ConstantPeriod(1.0), lam, 4, rng) for _ in range(n)]
    )
    se = math.sqrt(4 * 0.3 * 0.7 / n)
    assert abs(draws.mean() - 1.2) < 3 * se


def test_sample_transmission_count_all_or_nothing(rng):
    per = ZeroOrInfinityPeriod(0.3)
    n = 20000
    draws = np.array([sample_transmission_count(per, 1.0, 4, rng) for _ in range(n)])
    assert set(np.unique(draws)) <= {0, 4}
    phat = np.mean(draws == 4)
    assert abs(phat - 0.3) < 3 * math.sqrt(0.3 * 0.7 / n)


def test_matched_periods():
    per, lam = period_matched_to_transmission(0.3, "constant")
    p, q, q2 = transmission_params(per, lam)
    assert abs(p - 0.3) < 1e-12 and abs(q2 - q * q) < 1e-15
    per, lam = period_matched_to_transmission(0.3, "zero_or_infinity")
    p, q, q2 = transmission_params(per, lam)
    assert abs(p - 0.3) < 1e-15 and abs(q2 - q) < 1e-15


def test_reduced_pgf_mass():
    dist = build_poisson(5.0)
    red = dist.reduced_uniform(0.05)
    assert abs(red.coeffs.sum() - 0.95) < 1e-12
    assert abs(red.eps - 0.05) < 1e-12
    with pytest.raises(ValueError):
        dist.reduced(dist.pmf + 0.5)  # coefficients would leave [0, 1]


def test_invalid_pmf_rejected():
    with pytest.raises(ValueError):
        from_pmf([0.0, 0.0])
    with pytest.raises(ValueError):
        build_geometric(1.5)
    with pytest.raises(ValueError):
        build_poisson(-1.0)
    with pytest.raises(ValueError):
        build_power_cutoff(0.0, 5.0)


def test_parse_degree_spec():
    assert parse_degree_spec("const:5").mean == 5
    assert abs(parse_degree_spec("poisson:5").mean - 5) < 1e-9
    assert abs(parse_degree_spec("geom:0.1667").mean - 4.9988) < 1e-3
    assert abs(parse_degree_spec("power:1:13.796").mean - 5) < 0.01
    pm = parse_degree_spec("pmf:0.2,0.3,0.5")
    assert abs(pm.pmf[2] - 0.5) < 1e-12
    with pytest.raises(ValueError):
        parse_degree_spec("zipf:2")
    with pytest.raises(ValueError):
        parse_degree_spec("poisson:abc")


def test_parse_period_spec():
    assert parse_period_spec("const") is None  # matched to p_I later
    assert isinstance(parse_period_spec("const:2"), ConstantPeriod)
    assert isinstance(parse_period_spec("exp:0.5"), ExponentialPeriod)
    assert parse_period_spec("zeroinf:0.4").prob_infinite == 0.4
    with pytest.raises(ValueError):
        parse_period_spec("weibull:1:2")
