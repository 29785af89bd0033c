"""Mean and variance of the potential-energy Laplacian, two independent ways."""

from __future__ import annotations

from collections.abc import Iterable, Iterator

import numpy as np

from fpulyap.dynamics.integrator import IntegratorConfig, Propagator, steps_for
from fpulyap.dynamics.potentials import bond_strains, laplacian_excess, laplacian_weights
from fpulyap.models.chain import ChainState, ModelFamily, ModelSpec
from fpulyap.theory.van_kampen import CurvatureStats, StatsSource
from fpulyap.utils.logging_config import get_logger

logger = get_logger(__name__)

CONVERGENCE_RTOL = 1e-3
MIN_MC_SAMPLES = 100_000
MC_SHARD = 10_000


def trajectory_states(
    model: ModelSpec, x0: ChainState, config: IntegratorConfig, t_end: float, every: int
) -> Iterator[ChainState]:
    """States along a trajectory every ``every`` steps, starting with ``x0``."""
    prop = Propagator(model, x0, None, IntegratorConfig(dt=config.dt, scheme=config.scheme, with_tangent=False))
    n_total = steps_for(t_end, config.dt)
    yield x0
    while prop.steps + every <= n_total:
        prop.advance(every)
        yield prop.state()


def curvature_stats_timeavg(model: ModelSpec, trajectory: Iterable[ChainState]) -> CurvatureStats:
    """
    omega0 = <Delta V> / N and sigma2 = var(Delta V) / N from time averages.

    The run is flagged unconverged when the running mean of Delta V / N moved by
    more than 1e-3 (relative) over the second half of the samples.
    """
    excess = np.array([laplacian_excess(model, bond_strains(s)) for s in trajectory], dtype=float)
    if excess.size < 2:
        raise ValueError("time averages need at least two samples")
    n = model.n_springs
    rest = float(np.sum(laplacian_weights(n, model.boundary)))
    omega0 = (rest + float(np.mean(excess))) / n
    sigma2 = 0.0 if np.ptp(excess) == 0 else float(np.var(excess)) / n

    half = excess.size // 2
    omega_half = (rest + float(np.mean(excess[:half]))) / n
    converged = abs(omega0 - omega_half) <= CONVERGENCE_RTOL * omega0
    if not converged:
        logger.warning(
            "time average of Delta V not converged",
            extra={"event": "timeavg_not_converged", "model": model.label, "N": n},
        )
    return CurvatureStats.from_moments(
        omega0,
        sigma2,
        StatsSource.TIME_AVERAGE,
        omega0_stderr=float(np.std(excess)) / np.sqrt(excess.size) / n,
        converged=converged,
    )


def canonical_mean_laplacian(model: ModelSpec, eps: float) -> tuple[float, float]:
    """
    Leading-order Gaussian value of <Delta V> / N and its derivative in eps.

    Uses <r^2> = eps, <r^4> = 3 eps^2 and zero odd moments per bond.
    """
    w = laplacian_weights(model.n_springs, model.boundary)
    n = model.n_springs
    if model.family is ModelFamily.TODA:
        c2 = model.toda_c**2
        g = np.exp(0.5 * c2 * eps)
        return float(np.sum(w) * g / n), float(np.sum(w) * 0.5 * c2 * g / n)
    mean = np.sum(w * (1.0 + 3.0 * model.beta * eps + 15.0 * model.delta * eps**2)) / n
    deriv = np.sum(w * (3.0 * model.beta + 30.0 * model.delta * eps)) / n
    return float(mean), float(deriv)


def lpv_correction(model: ModelSpec, eps: float) -> float:
    """Canonical-to-microcanonical reduction of sigma2: eps^2 (d<Delta V>/N / d eps)^2."""
    _, deriv = canonical_mean_laplacian(model, eps)
    return eps * eps * deriv * deriv


def constrained_gaussian_strains(
    n_springs: int, eps: float, n_samples: int, rng: np.random.Generator
) -> np.ndarray:
    """Strain samples with covariance eps (delta_ij - 1/N): i.i.d. N(0, eps) minus their mean."""
    g = rng.normal(0.0, np.sqrt(eps), size=(n_samples, n_springs))
    return g - g.mean(axis=1, keepdims=True)


def _mc_excess_moments(model: ModelSpec, eps: float, n_mc: int, seed: int) -> tuple[float, float, float, int]:
    """(mean, variance, fourth central moment, count) of the Delta V excess over the measure."""
    if n_mc < MIN_MC_SAMPLES:
        raise ValueError(f"n_mc must be at least {MIN_MC_SAMPLES}, got {n_mc}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    n = model.n_springs
    sizes = [MC_SHARD] * (n_mc // MC_SHARD) + ([n_mc % MC_SHARD] if n_mc % MC_SHARD else [])
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    parts = []
    for size, child in zip(sizes, children):
        r = constrained_gaussian_strains(n, eps, size, np.random.Generator(np.random.Philox(child)))
        parts.append(laplacian_excess(model, r))
    excess = np.concatenate(parts)
    mean_e = float(np.mean(excess))
    dev = excess - mean_e
    var_e = float(np.mean(dev * dev))
    return mean_e, var_e, float(np.mean(dev**4)), excess.size


def constrained_gaussian_stats(
    model: ModelSpec, eps: float, n_mc: int = MIN_MC_SAMPLES, seed: int = 0
) -> CurvatureStats:
    """
    Microcanonical omega0, sigma2 from Monte Carlo over the constrained Gaussian
    strain measure, with the LPV subtraction applied to the canonical variance.

    Shards are seeded from ``SeedSequence(seed).spawn`` and concatenated in order.
    """
    n = model.n_springs
    mean_e, var_e, m4, count = _mc_excess_moments(model, eps, n_mc, seed)
    rest = float(np.sum(laplacian_weights(n, model.boundary)))
    omega0 = (rest + mean_e) / n
    sigma2 = max(var_e / n - lpv_correction(model, eps), 0.0)
    return CurvatureStats.from_moments(
        omega0,
        sigma2,
        StatsSource.CONSTRAINED_GAUSSIAN,
        omega0_stderr=float(np.sqrt(var_e / count)) / n,
        sigma2_stderr=float(np.sqrt(max(m4 - var_e * var_e, 0.0) / count)) / n,
    )


def canonical_sigma2(model: ModelSpec, eps: float, n_mc: int = MIN_MC_SAMPLES, seed: int = 0) -> float:
    """sigma2 before the LPV subtraction; same draws as :func:`constrained_gaussian_stats`."""
    _, var_e, _, _ = _mc_excess_moments(model, eps, n_mc, seed)
    return var_e / model.n_springs
