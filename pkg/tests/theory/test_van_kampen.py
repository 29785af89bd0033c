import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpulyap.theory.van_kampen import (
    CurvatureStats,
    Regime,
    StatsSource,
    small_eps_chi,
    tau_candidates,
    tau_combine,
    van_kampen_chi,
)


def _direct(omega0, sigma2, tau):
    a = 4.0 * omega0 / 3.0
    b = tau * sigma2
    lam = (b + math.sqrt(a**3 + b * b)) ** (1.0 / 3.0)
    return 0.5 * (lam - a / lam)


def test_no_fluctuations_no_chaos():
    est = van_kampen_chi(CurvatureStats(2.0, 0.0, 1.0, StatsSource.ASYMPTOTIC))
    assert est.chi == 0.0
    assert est.regime is Regime.FULL_VAN_KAMPEN


def test_small_noise_limit():
    for sigma2 in (1e-8, 1e-5, 1e-3):
        s = CurvatureStats(2.0, sigma2, 1.0, StatsSource.ASYMPTOTIC)
        assert van_kampen_chi(s).chi / small_eps_chi(s).chi == pytest.approx(1.0, rel=0.01)
        assert small_eps_chi(s).chi == pytest.approx(sigma2 / 8.0, rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(
    omega0=st.floats(min_value=0.5, max_value=4.0),
    sigma2=st.floats(min_value=1e-3, max_value=10.0),
    tau=st.floats(min_value=0.1, max_value=3.0),
)
def test_cancellation_free_form_matches_textbook_form(omega0, sigma2, tau):
    chi = van_kampen_chi(CurvatureStats(omega0, sigma2, tau, StatsSource.ASYMPTOTIC)).chi
    assert chi == pytest.approx(_direct(omega0, sigma2, tau), rel=1e-9)
    assert chi > 0


def test_tau_combination():
    assert tau_combine(2.0, 2.0) == pytest.approx(1.0)
    assert tau_combine(1.0, 3.0) == pytest.approx(0.75)
    assert tau_combine(1.3, math.inf) == pytest.approx(1.3, rel=1e-15)
    assert tau_candidates(2.0, 0.0) == (1.0, math.inf)
    with pytest.raises(ValueError):
        tau_combine(0.0, 1.0)


def test_stats_from_moments():
    s = CurvatureStats.from_moments(2.0, 0.25, StatsSource.TIME_AVERAGE)
    # tau1 = 1, tau2 = 2
    assert s.tau == pytest.approx(2.0 / 3.0)
    assert s.source is StatsSource.TIME_AVERAGE


def test_stats_validation():
    with pytest.raises(ValueError):
        CurvatureStats(0.0, 0.1, 1.0, StatsSource.ASYMPTOTIC)
    with pytest.raises(ValueError):
        CurvatureStats(2.0, -0.1, 1.0, StatsSource.ASYMPTOTIC)
    with pytest.raises(ValueError):
        CurvatureStats(2.0, 0.1, 0.0, StatsSource.ASYMPTOTIC)
