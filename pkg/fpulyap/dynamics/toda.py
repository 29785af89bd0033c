from __future__ import annotations

import numpy as np
from scipy import linalg

from fpulyap.dynamics.potentials import bond_strains
from fpulyap.models.chain import Boundary, ChainState, ModelFamily, ModelSpec
from fpulyap.utils.errors import ModelError


def lax_matrix(model: ModelSpec, state: ChainState) -> np.ndarray:
    """
    Flaschka Lax matrix of the periodic Toda chain.

    Diagonal entries are the momenta; bond k couples particles k-1 and k with
    -exp(c r_k / 2) / c, including the corner bond closing the ring. For two
    particles both bonds land on the same off-diagonal entry.
    """
    _require_periodic_toda(model)
    n = model.n_particles
    c = model.toda_c
    off = -np.exp(0.5 * c * bond_strains(state)) / c
    L = np.diag(state.p.astype(float))
    for k in range(n):
        i, j = (k - 1) % n, k
        L[i, j] += off[k]
        L[j, i] += off[k]
    return L


def toda_invariants(model: ModelSpec, state: ChainState, k_max: int = 4) -> np.ndarray:
    """tr L^k for k = 1..k_max; each is conserved by the exact Toda flow."""
    if k_max < 3:
        raise ValueError(f"k_max must be at least 3, got {k_max}")
    eig = linalg.eigvalsh(lax_matrix(model, state))
    return np.array([np.sum(eig**k) for k in range(1, k_max + 1)])


def energy_from_second_invariant(model: ModelSpec, trace_l2: float) -> float:
    """Invert tr L^2 = 2 H + 2 N / c^2."""
    return 0.5 * trace_l2 - model.n_springs / model.toda_c**2


def _require_periodic_toda(model: ModelSpec) -> None:
    if model.family is not ModelFamily.TODA:
        raise ModelError(f"Toda invariants need a Toda model, got {model.label}")
    if model.boundary is not Boundary.PERIODIC:
        raise ModelError("Toda invariants are defined for the periodic chain only")
