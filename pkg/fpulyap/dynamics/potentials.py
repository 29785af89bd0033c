"""
Energies, forces and second-order quantities of the chain.

Bond strains are r_i = q_i - q_{i-1}, i = 1..N. With fixed ends q_0 = q_N = 0 and
the N-1 moving particles are the state; on a ring all N particles move and
q_0 = q_N. Coefficient arrays have length N and broadcast against the last axis
of ``r``, so every function here also accepts stacked strain samples.
"""

from __future__ import annotations

import numpy as np

from fpulyap.models.chain import Boundary, ChainState, ModelFamily, ModelSpec
from fpulyap.utils.errors import PotentialOverflowError

Array = np.ndarray

# Below this |c r| the Toda potential is summed as a series.
_TODA_SERIES_CUTOFF = 1e-2


def bond_strains(state: ChainState) -> Array:
    return strains_from_displacements(state.q, state.boundary)


def strains_from_displacements(q: Array, boundary: Boundary) -> Array:
    if boundary is Boundary.PERIODIC:
        return q - np.roll(q, 1)
    return np.diff(q, prepend=0.0, append=0.0)


def _divergence(w: Array, boundary: Boundary) -> Array:
    # (w_{i+1} - w_i) at each moving particle
    if boundary is Boundary.PERIODIC:
        return np.roll(w, -1) - w
    return np.diff(w)


def _coefficients(model: ModelSpec, site: int | None):
    if site is None:
        return model.alpha, model.beta, model.gamma, model.delta
    return model.alpha[site], model.beta[site], model.gamma[site], model.delta[site]


def _toda_exp(c: float, r: Array, fn) -> Array:
    with np.errstate(over="raise", invalid="raise"):
        try:
            return fn(c * r)
        except FloatingPointError as exc:
            raise PotentialOverflowError(
                f"Toda exponential overflow at max|r|={float(np.max(np.abs(r))):.6g}"
            ) from exc


def potential_value(model: ModelSpec, r, site: int | None = None) -> Array:
    """V(r). With ``site=None`` the per-site coefficients follow the last axis of ``r``."""
    r = np.asarray(r, dtype=float)
    if model.family is ModelFamily.TODA:
        c = model.toda_c
        x = c * r
        small = np.abs(x) < _TODA_SERIES_CUTOFF
        series = x * x * (1 / 2 + x * (1 / 6 + x * (1 / 24 + x * (1 / 120 + x * (1 / 720 + x / 5040)))))
        direct = _toda_exp(c, np.where(small, 0.0, r), np.expm1) - np.where(small, 0.0, x)
        return np.where(small, series, direct) / (c * c)
    a, b, g, d = _coefficients(model, site)
    return r * r * (0.5 + r * (a / 3 + r * (b / 4 + r * (g / 5 + r * d / 6))))


def potential_d1(model: ModelSpec, r, site: int | None = None) -> Array:
    r = np.asarray(r, dtype=float)
    if model.family is ModelFamily.TODA:
        return _toda_exp(model.toda_c, r, np.expm1) / model.toda_c
    a, b, g, d = _coefficients(model, site)
    return r * (1.0 + r * (a + r * (b + r * (g + r * d))))


def potential_d2(model: ModelSpec, r, site: int | None = None) -> Array:
    return 1.0 + curvature_excess(model, r, site)


def curvature_excess(model: ModelSpec, r, site: int | None = None) -> Array:
    """V''(r) - 1, computed without cancellation at small r."""
    r = np.asarray(r, dtype=float)
    if model.family is ModelFamily.TODA:
        return _toda_exp(model.toda_c, r, np.expm1)
    a, b, g, d = _coefficients(model, site)
    return r * (2 * a + r * (3 * b + r * (4 * g + r * 5 * d)))


def total_energy(model: ModelSpec, state: ChainState) -> float:
    r = bond_strains(state)
    return float(0.5 * np.dot(state.p, state.p) + np.sum(potential_value(model, r)))


def specific_energy(model: ModelSpec, state: ChainState) -> float:
    """H/N with N the number of springs."""
    return total_energy(model, state) / model.n_springs


def force(model: ModelSpec, state: ChainState) -> Array:
    """-dH/dq: V'(r_{i+1}) - V'(r_i) at each moving particle."""
    return _divergence(potential_d1(model, bond_strains(state)), model.boundary)


def force_from_q(model: ModelSpec, q: Array) -> Array:
    r = strains_from_displacements(q, model.boundary)
    return _divergence(potential_d1(model, r), model.boundary)


def hessian_action(model: ModelSpec, state: ChainState, dq: Array) -> Array:
    """Linearized force applied to a displacement variation ``dq``."""
    return hessian_action_from_q(model, state.q, dq)


def hessian_action_from_q(model: ModelSpec, q: Array, dq: Array) -> Array:
    r = strains_from_displacements(q, model.boundary)
    dr = strains_from_displacements(np.asarray(dq, dtype=float), model.boundary)
    return _divergence(potential_d2(model, r) * dr, model.boundary)


def laplacian_weights(n_springs: int, boundary: Boundary) -> Array:
    """How many moving particles each bond touches (2, or 1 for the wall bonds)."""
    w = np.full(n_springs, 2.0)
    if boundary is Boundary.FIXED_ENDS:
        w[0] = w[-1] = 1.0
    return w


def laplacian_potential(model: ModelSpec, state: ChainState) -> float:
    """Trace of the configuration-space Hessian of the potential energy."""
    w = laplacian_weights(model.n_springs, model.boundary)
    return float(np.sum(w) + laplacian_excess(model, bond_strains(state)))


def laplacian_excess(model: ModelSpec, r: Array) -> Array:
    """Delta V minus its rest value; reduces over the last (bond) axis of ``r``."""
    w = laplacian_weights(model.n_springs, model.boundary)
    return np.sum(w * curvature_excess(model, r), axis=-1)
