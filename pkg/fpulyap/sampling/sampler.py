from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from fpulyap.dynamics.potentials import total_energy
from fpulyap.models.chain import ChainState, ModelSpec
from fpulyap.sampling.normal_modes import inverse_mode_transform, mode_frequencies
from fpulyap.utils.errors import PotentialOverflowError, SamplingError

# Independent random streams per trajectory.
STREAM_STATE = 0
STREAM_TANGENT = 1


@dataclass(frozen=True)
class SamplerConfig:
    eps: float
    n_samples: int = 24
    seed: int = 0
    rescale_tol: float = 1e-12

    def __post_init__(self) -> None:
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be at least 1, got {self.n_samples}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")


def trajectory_rng(seed: int, index: int, stream: int) -> np.random.Generator:
    """Philox generator keyed by (seed, trajectory index, stream); platform independent."""
    ss = np.random.SeedSequence(seed, spawn_key=(int(index), int(stream)))
    return np.random.Generator(np.random.Philox(ss))


def sample_state(
    model: ModelSpec, n_springs: int, config: SamplerConfig, index: int
) -> ChainState:
    """
    Random initial condition on the surface H = N * eps.

    Mode amplitudes are Gaussian with equal expected harmonic energy per mode;
    a single scalar lambda then maps the draw onto the exact energy surface.
    """
    if n_springs != model.n_springs:
        raise SamplingError(f"model has {model.n_springs} springs, sampler asked for {n_springs}")
    rng = trajectory_rng(config.seed, index, STREAM_STATE)
    omega = mode_frequencies(n_springs, model.boundary)
    active = omega > 0
    target = n_springs * config.eps
    scale = np.sqrt(target / np.count_nonzero(active))

    P = np.where(active, scale * rng.standard_normal(omega.size), 0.0)
    Q = np.where(active, scale * rng.standard_normal(omega.size) / np.where(active, omega, 1.0), 0.0)
    base = ChainState(
        q=inverse_mode_transform(Q, model.boundary),
        p=inverse_mode_transform(P, model.boundary),
        n_springs=n_springs,
        boundary=model.boundary,
    )
    harmonic = 0.5 * float(np.sum(P * P + (omega * Q) ** 2))
    base = base.scaled(np.sqrt(target / harmonic))
    lam = _energy_rescaling(model, base, target)
    state = base.scaled(lam)

    eps_got = total_energy(model, state) / n_springs
    if abs(eps_got - config.eps) > config.rescale_tol * config.eps:
        raise SamplingError(
            f"energy rescaling missed the target: eps={eps_got!r} vs {config.eps!r} "
            f"(tol {config.rescale_tol})"
        )
    return state


def _energy_rescaling(model: ModelSpec, base: ChainState, target: float) -> float:
    def excess(lam: float) -> float:
        return total_energy(model, base.scaled(lam)) - target

    hi = 2.0
    try:
        if excess(hi) < 0:
            raise SamplingError("energy not bracketed on lambda in [0, 2]; unstable coefficients?")
        return float(optimize.brentq(excess, 0.0, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200))
    except (PotentialOverflowError, RuntimeError, ValueError) as exc:
        raise SamplingError(f"energy rescaling failed: {exc}") from exc
