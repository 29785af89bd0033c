"""Unweighted least-squares power laws in log10 space, and the residual log N fit."""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from fpulyap.utils.errors import FitError

DEFAULT_WINDOW = (0.0, math.inf)
PRESET_WINDOWS: dict[str, tuple[float, float]] = {
    "alpha-beta": (0.0, 2e-2),
    "beta-T": (1e-4, 1e-3),
}
LOGN_CUTOFF = 1000
LOGN_NOTE = "a power law with a small exponent also fits"


@dataclass(frozen=True)
class FitResult:
    C: float
    a: float
    a_stderr: float
    eps_window: tuple[float, float]
    n_points: int
    residual_rms: float


@dataclass(frozen=True)
class SlopeSummary:
    entries: list[tuple[int, float, float]]
    trend: str
    fits: dict[int, FitResult] = field(default_factory=dict)


@dataclass(frozen=True)
class LogNFit:
    slope_per_decade: float
    intercept: float
    rms: float
    power_alternative: FitResult
    note: str = LOGN_NOTE


def window_for(preset: str | None) -> tuple[float, float]:
    return PRESET_WINDOWS.get(preset or "", DEFAULT_WINDOW)


def _as_points(points) -> np.ndarray:
    arr = np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise FitError("points must be rows of (x, y[, err])")
    return arr


def powerlaw_fit(points: Iterable, window: tuple[float, float] = DEFAULT_WINDOW) -> FitResult:
    """
    chi = C eps^a by OLS of log10 chi on log10 eps over lo <= eps <= hi.

    Error bars in the third column are carried by callers for reporting only.
    """
    arr = _as_points(points)
    lo, hi = window
    sel = (arr[:, 0] >= lo) & (arr[:, 0] <= hi)
    x, y = arr[sel, 0], arr[sel, 1]
    if x.size < 3:
        raise FitError(f"need at least 3 points in window {window}, got {x.size}")
    if np.any(y <= 0) or np.any(x <= 0):
        raise FitError("power-law fit needs positive eps and chi in the window")
    order = np.argsort(x, kind="stable")
    lx, ly = np.log10(x[order]), np.log10(y[order])
    res = stats.linregress(lx, ly)
    resid = ly - (res.intercept + res.slope * lx)
    return FitResult(
        C=float(10.0**res.intercept),
        a=float(res.slope),
        a_stderr=float(res.stderr),
        eps_window=(float(lo), float(hi)),
        n_points=int(x.size),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
    )


def slope_vs_N(
    results: Mapping[int, Iterable], window: tuple[float, float] = DEFAULT_WINDOW
) -> SlopeSummary:
    """Per-N power-law slopes; the trend is reported, never extrapolated."""
    fits = {int(n): powerlaw_fit(pts, window) for n, pts in sorted(results.items())}
    entries = [(n, f.a, f.a_stderr) for n, f in fits.items()]
    if len(entries) < 2:
        trend = "none"
    else:
        d = np.diff([a for _, a, _ in entries])
        if np.all(d < 0):
            trend = "decreasing"
        elif np.all(d > 0):
            trend = "increasing"
        else:
            trend = "mixed"
    return SlopeSummary(entries=entries, trend=trend, fits=fits)


def logN_fit(points: Iterable, cutoff: int = LOGN_CUTOFF) -> LogNFit:
    """chi = intercept + slope log10 N over N >= cutoff, with the small power law alongside."""
    arr = _as_points(points)
    sel = arr[:, 0] >= cutoff
    n, chi = arr[sel, 0], arr[sel, 1]
    if n.size < 3:
        raise FitError(f"need at least 3 values of N >= {cutoff}, got {n.size}")
    order = np.argsort(n, kind="stable")
    lx, y = np.log10(n[order]), chi[order]
    res = stats.linregress(lx, y)
    resid = y - (res.intercept + res.slope * lx)
    alt = powerlaw_fit(np.column_stack([n, chi]), (float(cutoff), math.inf))
    return LogNFit(
        slope_per_decade=float(res.slope),
        intercept=float(res.intercept),
        rms=float(np.sqrt(np.mean(resid**2))),
        power_alternative=alt,
    )
