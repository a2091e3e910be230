import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import inv_cosh_series
from reflmax import closed_form as cf
from reflmax.core_model import iter_joint, joint_distribution, marginal_max

DP = list(iter_joint(40))  # DP[n-1] is the exact table after n steps
Q_DP = [marginal_max(t).as_floats() for t in DP]


def q_dp(n: int, a: int) -> float:
    if n == 0:
        return 0.0
    q = Q_DP[n - 1]
    return float(q[a]) if a < len(q) else 0.0


# -- position law ---------------------------------------------------------------

def test_position_pmf_examples():
    assert cf.position_pmf(4, 0).to_fraction() == Fraction(6, 16)
    assert cf.position_pmf(3, 3).to_fraction() == Fraction(1, 4)
    assert cf.position_pmf(4, 1).to_fraction() == 0
    assert cf.position_pmf(4, 7).to_fraction() == 0


def test_position_moments_examples():
    assert (cf.position_moments(1).mean, cf.position_moments(1).variance) == (1, 0)
    m2 = cf.position_moments(2)
    assert (m2.mean, m2.variance) == (1, 1)
    m3 = cf.position_moments(3)
    assert (m3.mean, m3.variance) == (Fraction(3, 2), Fraction(3, 4))


@given(st.integers(1, 80))
def test_position_moments_match_pmf(n):
    pmf = {x: cf.position_pmf(n, x).to_fraction() for x in range(n + 1)}
    mean = sum(x * p for x, p in pmf.items())
    var = sum(x * x * p for x, p in pmf.items()) - mean**2
    got = cf.position_moments(n)
    assert (got.mean, got.variance) == (mean, var)


# -- generating functions --------------------------------------------------------

def test_theta():
    assert cf.gf_theta(0.6).theta == pytest.approx(1 / 3, rel=1e-15)
    assert cf.gf_theta(1 - 1e-12).theta == pytest.approx(1.0, abs=2e-6)
    assert cf.gf_theta(1e-200).theta == pytest.approx(5e-201, rel=1e-15)
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            cf.gf_theta(bad)


@given(st.floats(1e-6, 1 - 1e-6))
def test_theta_quadratic(lam):
    th = cf.gf_theta(lam).theta
    assert th + 1 / th == pytest.approx(2 / lam, rel=1e-13)


@given(st.floats(0.01, 0.99), st.integers(2, 30))
def test_hit_own_max_recurrence(lam, a):
    th = cf.gf_theta(lam).theta
    ratio = (th**a + th**-a) / (th ** (a + 1) + th ** -(a + 1))
    assert cf.gf_hit_own_max(lam, a) == pytest.approx(ratio * cf.gf_hit_own_max(lam, a - 1), rel=1e-12)


def test_hit_own_max_first_level():
    for lam in (0.1, 0.5, 0.9):
        assert cf.gf_hit_own_max(lam, 1) == pytest.approx(lam / (1 - lam**2 / 2), rel=1e-14)


def test_hit_own_max_series_vs_dp():
    lam = 0.3
    series = sum(lam**n * float(DP[n - 1][2, 2]) for n in range(1, 41))
    # neglected terms are bounded by lam**41 / (1 - lam)
    assert abs(cf.gf_hit_own_max(lam, 2) - series) < 1e-10


@pytest.mark.parametrize("a", [1, 2, 3])
def test_max_marginal_series_vs_dp(a):
    lam = 0.3
    series = sum(lam**n * q_dp(n, a) for n in range(1, 31))
    assert abs(cf.gf_max_marginal(lam, a) - series) <= lam**31 / (1 - lam) + 1e-15


def test_max_marginal_sums_to_geometric():
    lam = 0.7
    total = math.fsum(cf.gf_max_marginal(lam, a) for a in range(1, 400))
    assert total == pytest.approx(lam / (1 - lam), rel=1e-13)
    assert cf.gf_max_marginal(lam, 400) < 1e-30


def test_double_q():
    lam = 0.4
    assert cf.gf_double_Q(lam, 1.0).value == pytest.approx(lam / (1 - lam), rel=1e-15)
    # no a >= 1 term survives at z = 0
    assert cf.gf_double_Q(lam, 0.0).value == pytest.approx(0.0, abs=1e-15)
    for z in (0.2, 0.7):
        series = sum(lam**n * sum(z**a * q_dp(n, a) for a in range(1, n + 1)) for n in range(1, 41))
        assert cf.gf_double_Q(lam, z).value == pytest.approx(series, abs=1e-14)


def test_double_q_derivative_gives_mean():
    lam, h = 0.25, 1e-6
    deriv = (cf.gf_double_Q(lam, 1.0).value - cf.gf_double_Q(lam, 1.0 - h).value) / h
    series = sum(lam**n * float(marginal_max(DP[n - 1]).mean()) for n in range(1, 21))
    assert abs(deriv - series) < 1e-6


def test_factorial_moment_gf():
    lam = 0.25
    r = cf.factorial_moment_gf(lam, 1)
    series = sum(lam**n * float(marginal_max(DP[n - 1]).mean()) for n in range(1, 26))
    assert abs(r.value - series) < 1e-8
    assert r.tail_bound < 1e-12
    r2 = cf.factorial_moment_gf(lam, 2)
    series2 = sum(
        lam**n * sum(Fraction(a * (a - 1), 2) * p.to_fraction() for a, p in marginal_max(DP[n - 1]).pmf.items())
        for n in range(1, 41)
    )
    assert abs(r2.value - float(series2)) < 1e-12


def test_factorial_moment_gf_monotone():
    vals = [cf.factorial_moment_gf(lam, 1).value for lam in np.linspace(0.05, 0.95, 19)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


# -- trigonometric coefficients ---------------------------------------------------

def test_sech_coef_small():
    assert cf.sech_coef(1, 1).value == 0.5
    for n in range(2, 12):
        assert cf.sech_coef(n, 1).value == 0.0


@pytest.mark.parametrize("a", [2, 3, 4, 7, 12])
def test_sech_coef_vs_series_oracle(a):
    order = 40
    exact = inv_cosh_series(a, order)
    for n in range(1, order + 1):
        assert cf.sech_coef(n, a).value == pytest.approx(float(exact[n]), abs=1e-15)


def test_sech_coef_4_2():
    # 1/(theta^2 + theta^-2) = lam^2/4 + lam^4/8 + ...
    exact = inv_cosh_series(2, 6)
    assert exact[2] == Fraction(1, 4) and exact[4] == Fraction(1, 8)
    assert cf.sech_coef(4, 2).value == pytest.approx(0.125, abs=1e-16)


@given(st.integers(1, 200), st.integers(1, 40))
def test_sech_coef_parity_and_reduced_form(n, a):
    full = cf.sech_coef(n, a).value
    if (n - a) % 2:
        assert full == 0.0
    assert cf.sech_coef_reduced(n, a) == pytest.approx(full, abs=1e-15)


@given(st.integers(1, 40))
def test_coefficients_non_negative(a):
    for n in range(a, a + 60, 2):
        assert cf.sech_coef(n, a).value >= -1e-16


@given(st.integers(1, 120), st.integers(1, 40))
def test_delta_sign_alternates_with_parity(n, a):
    """Q_n(a) can only rise on steps where n = a (mod 2) and only fall otherwise."""
    d = cf.max_pmf_delta(n, a)
    if abs(d) > 1e-15:
        assert (d > 0) == ((n - a) % 2 == 0)


def test_max_pmf_examples():
    assert cf.max_pmf(3, 2) == pytest.approx(0.25, abs=1e-15)
    assert cf.max_pmf(1, 1) == pytest.approx(1.0, abs=1e-15)
    for N in (10, 50, 200):
        assert math.fsum(cf.max_pmf(N, a) for a in range(1, N + 1)) == pytest.approx(1.0, abs=1e-10)
    for a in range(11, 20):
        assert abs(cf.max_pmf(10, a)) < 1e-15


def test_max_pmf_vs_dp():
    worst = max(abs(cf.max_pmf(n, a) - q_dp(n, a)) for n in range(1, 41) for a in range(1, n + 1))
    assert worst < 1e-12


def test_delta_internal_consistency():
    for n in range(1, 101):
        for a in range(1, n + 2):
            prev = cf.max_pmf(n - 1, a) if n > 1 else 0.0
            assert cf.max_pmf_delta(n, a) == pytest.approx(cf.max_pmf(n, a) - prev, abs=1e-10)


def test_delta_vs_dp():
    for n in range(1, 41):
        for a in range(1, n + 1):
            assert abs(cf.max_pmf_delta(n, a) - (q_dp(n, a) - q_dp(n - 1, a))) < 1e-12


def test_max_distribution_tail_cut():
    full = cf.max_distribution(3000)
    cut = cf.max_distribution(3000, tail_cut=1e-18)
    assert len(cut.pmf) < len(full.pmf)
    assert math.fsum(cut.pmf.values()) == pytest.approx(1.0, abs=1e-12)


def test_max_moments_vs_dp():
    exact = marginal_max(joint_distribution(40))
    mean, var = cf.max_moments(40)
    assert mean == pytest.approx(float(exact.mean()), rel=1e-12)
    assert var == pytest.approx(float(exact.variance()), rel=1e-11)


def test_first_passage():
    assert cf.first_passage_pmf(3, 3) == pytest.approx(0.25, abs=1e-12)
    assert cf.first_passage_pmf(2, 3) == 0.0
    # the walk first reaches a by stepping up from (a-1, a-1)
    for a in (2, 3, 4):
        for n in range(2, 41):
            via = float(DP[n - 2][a - 1, a - 1]) / 2 if a - 1 <= n - 1 else 0.0
            assert cf.first_passage_pmf(n, a) == pytest.approx(via, abs=1e-13)


def test_first_passage_is_recurrent():
    total = math.fsum(cf.first_passage_pmf(n, 3) for n in range(1, 2001))
    assert abs(total - 1.0) <= 0.02
