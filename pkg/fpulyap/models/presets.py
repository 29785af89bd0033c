from __future__ import annotations

from typing import Any

import numpy as np

from fpulyap.models.chain import Boundary, ModelFamily, ModelSpec
from fpulyap.utils.errors import ModelError

# Energy scale fixed by alpha = -1; Toda stiffness c = 2 * alpha.
ALPHA = -1.0
TODA_C = 2.0 * ALPHA
BETA_T = 2.0 * ALPHA**2 / 3.0
GAMMA_T = ALPHA**3 / 3.0
DELTA_T = 2.0 * ALPHA**4 / 15.0

# (mean, half-spread) of the two-valued alpha_i patterns
VAR_ALPHA_PATTERNS: dict[str, tuple[float, float]] = {
    "var-alpha-a": (0.0, 1.0),
    "var-alpha-b": (0.5, 1.0),
    "var-alpha-c": (1.0, 0.5),
    "var-alpha-d": (1.0, 1.0 / 3.0),
}
VAR_ALPHA_BETA = 1.0
GAMMA_T_DELTA = 1.0

_POLY: dict[str, dict[str, float]] = {
    "alpha-beta": {"alpha": ALPHA, "beta": 2.0},
    "beta-T": {"alpha": ALPHA, "beta": BETA_T},
    "gamma-T": {"alpha": ALPHA, "beta": BETA_T, "gamma": GAMMA_T, "delta": GAMMA_T_DELTA},
    "gamma-delta": {"gamma": 1.0, "delta": 0.8},
    "pure-delta": {"delta": 1.0},
    "pure-beta": {"beta": 1.0},
}

PRESET_NAMES: tuple[str, ...] = ("linear", "toda", *_POLY, *VAR_ALPHA_PATTERNS)


def variable_alpha_pattern(name: str, n_springs: int, seed: int) -> np.ndarray:
    """alpha_i = m +/- s with independent fair signs, reproducible from ``seed``."""
    mean, spread = VAR_ALPHA_PATTERNS[name]
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(0xA1,))))
    signs = np.where(rng.random(n_springs) < 0.5, -1.0, 1.0)
    return mean + spread * signs


def make_preset(
    name: str,
    n_springs: int,
    seed: int = 0,
    boundary: Boundary | str = Boundary.FIXED_ENDS,
    overrides: dict[str, Any] | None = None,
) -> ModelSpec:
    """Build a catalog model by name; ``overrides`` replaces individual coefficients."""
    overrides = dict(overrides or {})
    boundary = Boundary(boundary)
    if name == "linear":
        if overrides:
            raise ModelError("linear preset takes no overrides")
        return ModelSpec(ModelFamily.LINEAR, n_springs, boundary=boundary, preset_name=name)
    if name == "toda":
        c = float(overrides.pop("toda_c", TODA_C))
        if overrides:
            raise ModelError(f"toda preset only accepts toda_c, got {sorted(overrides)}")
        return ModelSpec(ModelFamily.TODA, n_springs, boundary=boundary, toda_c=c, preset_name=name)

    if name in _POLY:
        coeffs: dict[str, Any] = dict(_POLY[name])
    elif name in VAR_ALPHA_PATTERNS:
        coeffs = {"alpha": variable_alpha_pattern(name, n_springs, seed), "beta": VAR_ALPHA_BETA}
    else:
        raise ModelError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")

    unknown = set(overrides) - {"alpha", "beta", "gamma", "delta"}
    if unknown:
        raise ModelError(f"unknown coefficient overrides {sorted(unknown)}")
    coeffs.update(overrides)
    return ModelSpec(
        ModelFamily.POLYNOMIAL, n_springs, boundary=boundary, preset_name=name, **coeffs
    )
