"""
Curvature-fluctuation estimate of the maximal exponent.

The curvature process has mean omega0, variance sigma2 and correlation time tau.
With a = 4 omega0 / 3 and noise strength B = tau sigma2,

    Lambda^3 = B + sqrt(a^3 + B^2),   chi = (Lambda - a / Lambda) / 2,

evaluated as chi = B Lambda^2 / (Lambda^4 + a Lambda^2 + a^2), which is the same
expression with the cancellation removed. For small B this tends to
tau sigma2 / (4 omega0), i.e. sigma2 / 8 at omega0 = 2, tau = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class StatsSource(str, Enum):
    TIME_AVERAGE = "time_average"
    CONSTRAINED_GAUSSIAN = "constrained_gaussian"
    ASYMPTOTIC = "asymptotic"


class Regime(str, Enum):
    FULL_VAN_KAMPEN = "full_van_kampen"
    SMALL_EPS_ASYMPTOTIC = "small_eps_asymptotic"


@dataclass(frozen=True)
class CurvatureStats:
    omega0: float
    sigma2: float
    tau: float
    source: StatsSource
    omega0_stderr: float = 0.0
    sigma2_stderr: float = 0.0
    converged: bool = True

    def __post_init__(self) -> None:
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if not self.sigma2 >= 0:
            raise ValueError(f"sigma2 must be non-negative, got {self.sigma2}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    @classmethod
    def from_moments(cls, omega0: float, sigma2: float, source: StatsSource, **kw) -> CurvatureStats:
        """Stats with tau combined from the two dimensional candidates."""
        return cls(omega0, sigma2, tau_combine(*tau_candidates(omega0, sigma2)), StatsSource(source), **kw)


@dataclass(frozen=True)
class TheoryEstimate:
    chi: float
    lam: float
    regime: Regime


def tau_candidates(omega0: float, sigma2: float) -> tuple[float, float]:
    """(sqrt(2 / omega0), sqrt(omega0 / (2 sigma2))); the second is infinite when sigma2 = 0."""
    tau1 = math.sqrt(2.0 / omega0)
    tau2 = math.inf if sigma2 == 0 else math.sqrt(omega0 / (2.0 * sigma2))
    return tau1, tau2


def tau_combine(tau1: float, tau2: float) -> float:
    if not (tau1 > 0 and tau2 > 0):
        raise ValueError(f"correlation times must be positive, got {tau1}, {tau2}")
    return 1.0 / (1.0 / tau1 + 1.0 / tau2)


def van_kampen_chi(stats: CurvatureStats) -> TheoryEstimate:
    a = 4.0 * stats.omega0 / 3.0
    b = stats.tau * stats.sigma2
    lam = math.cbrt(b + math.sqrt(a**3 + b * b))
    lam2 = lam * lam
    chi = b * lam2 / (lam2 * lam2 + a * lam2 + a * a)
    return TheoryEstimate(chi=chi, lam=lam, regime=Regime.FULL_VAN_KAMPEN)


def small_eps_chi(stats: CurvatureStats) -> TheoryEstimate:
    """Leading small-noise limit of :func:`van_kampen_chi`."""
    a = 4.0 * stats.omega0 / 3.0
    chi = stats.tau * stats.sigma2 / (4.0 * stats.omega0)
    return TheoryEstimate(chi=chi, lam=math.sqrt(a), regime=Regime.SMALL_EPS_ASYMPTOTIC)
