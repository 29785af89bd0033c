"""
Small-eps coefficient table of the linear hierarchy.

    variable alpha   2 var(alpha) eps
    pure beta        9/2 (mean(beta^2) + var(beta)) eps^2
    gamma + delta    48 (mean(gamma^2) + 3/2 var(gamma)) eps^3
    pure delta       750 (mean(delta^2) + 3/5 var(delta)) eps^4

Variances are population variances over sites. A constant alpha drops out of the
Laplacian under the sum r_i = 0 constraint, so constant-alpha models use the row of
their first surviving nonlinearity.
"""

from __future__ import annotations

import numpy as np

from fpulyap.models.chain import ModelFamily, ModelSpec
from fpulyap.utils.errors import TheoryNotApplicableError

_ROWS = (
    # name, polynomial degree, prefactor, variance weight
    ("beta", 4, 4.5, 1.0),
    ("gamma", 5, 48.0, 1.5),
    ("delta", 6, 750.0, 0.6),
)


def _check_applicable(model: ModelSpec) -> None:
    if model.family is ModelFamily.TODA:
        raise TheoryNotApplicableError(f"theory not applicable to the integrable Toda chain ({model.label})")
    if model.family is ModelFamily.POLYNOMIAL and model.is_constant("alpha") and model.is_constant("beta"):
        a, b = float(model.alpha[0]), float(model.beta[0])
        if a != 0 and np.isclose(b, 2.0 * a * a / 3.0, rtol=1e-9, atol=0.0):
            raise TheoryNotApplicableError(
                f"theory not applicable: {model.label} is tangent to Toda through quartic order"
            )


def _varies(arr: np.ndarray) -> bool:
    return bool(np.var(arr) > 0)


def leading_nonlinear_order(model: ModelSpec) -> int | None:
    """Degree of the first potential term that survives in the Laplacian fluctuations."""
    _check_applicable(model)
    if _varies(model.alpha):
        return 3
    for name, degree, _, _ in _ROWS:
        if np.any(getattr(model, name)):
            return degree
    return None


def asymptotic_exponent(model: ModelSpec) -> int | None:
    order = leading_nonlinear_order(model)
    return None if order is None else order - 2


def asymptotic_chi(model: ModelSpec, eps: float) -> float:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    order = leading_nonlinear_order(model)
    if order is None:
        return 0.0
    if order == 3:
        return float(2.0 * np.var(model.alpha) * eps)
    for name, degree, pref, wvar in _ROWS:
        if degree == order:
            c = getattr(model, name)
            return float(pref * (np.mean(c * c) + wvar * np.var(c)) * eps ** (degree - 2))
    raise AssertionError(f"unhandled order {order}")
