"""Closed-form profile chi_bar(t) = log(1 + h t + c (exp(chi t) - 1)) / t and its fit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from fpulyap.lyapunov.plateau import plateau_estimate
from fpulyap.utils.errors import FitError


@dataclass(frozen=True)
class CrossoverFit:
    h: float
    c: float
    chi: float
    rms: float


def crossover_model(h: float, c: float, chi: float, t):
    """
    Forward crossover profile; tends to h + c chi as t -> 0 and to chi + log(c) / t
    past t ~ 1/chi.
    """
    t = np.asarray(t, dtype=float)
    tt = np.where(t > 0, t, 1.0)
    x = chi * tt
    with np.errstate(over="ignore", invalid="ignore"):
        early = np.log1p(h * tt + c * np.expm1(np.minimum(x, 1.0))) / tt
        late = (np.log(c) + x + np.log1p((1.0 + h * tt - c) * np.exp(-x) / c)) / tt
    out = np.where(x < 1.0, early, late)
    return np.where(t > 0, out, h + c * chi)


def _log_model(t, log_h, log_c, log_chi):
    return np.log(crossover_model(np.exp(log_h), np.exp(log_c), np.exp(log_chi), t))


def crossover_fit(times, chi_bar) -> CrossoverFit:
    """Nonlinear least squares of log chi_bar against the crossover profile."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(chi_bar, dtype=float)
    if np.any(y <= 0) or np.any(t <= 0):
        raise FitError("crossover fit needs positive times and exponents")
    plateau = plateau_estimate(t, y)
    if not plateau.found:
        raise FitError("crossover fit needs a detected plateau")
    p0 = [np.log(y[0]), 0.0, np.log(plateau.value)]
    try:
        popt, _ = optimize.curve_fit(_log_model, t, np.log(y), p0=p0, maxfev=20000)
    except (RuntimeError, ValueError, optimize.OptimizeWarning) as exc:
        raise FitError(f"crossover fit did not converge: {exc}") from exc
    resid = _log_model(t, *popt) - np.log(y)
    if not np.all(np.isfinite(resid)):
        raise FitError("crossover fit produced non-finite residuals")
    h, c, chi = np.exp(popt)
    return CrossoverFit(float(h), float(c), float(chi), float(np.sqrt(np.mean(resid**2))))
