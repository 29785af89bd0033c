import numpy as np

from fpulyap.models.chain import Boundary, ChainState, ModelFamily, ModelSpec
from fpulyap.models.presets import make_preset


def random_state(model: ModelSpec, amplitude: float = 0.1, seed: int = 0) -> ChainState:
    rng = np.random.default_rng(seed)
    n = model.n_particles
    return ChainState(
        q=amplitude * rng.standard_normal(n),
        p=amplitude * rng.standard_normal(n),
        n_springs=model.n_springs,
        boundary=model.boundary,
    )


def catalog(n_springs: int = 8, boundary: Boundary = Boundary.FIXED_ENDS) -> list[ModelSpec]:
    """One model per force law: presets plus a site-dependent polynomial."""
    names = ["linear", "toda", "alpha-beta", "gamma-T", "gamma-delta", "pure-delta", "var-alpha-b"]
    models = [make_preset(name, n_springs, seed=3, boundary=boundary) for name in names]
    rng = np.random.default_rng(11)
    models.append(
        ModelSpec(
            ModelFamily.POLYNOMIAL,
            n_springs,
            alpha=rng.uniform(-1, 1, n_springs),
            beta=rng.uniform(0.5, 2, n_springs),
            gamma=rng.uniform(-0.5, 0.5, n_springs),
            delta=rng.uniform(0.5, 1.5, n_springs),
            boundary=boundary,
        )
    )
    return models


def numeric_gradient(fn, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central differences of a scalar function."""
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (fn(x + e) - fn(x - e)) / (2 * h)
    return g
