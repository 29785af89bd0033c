from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Frozen detector thresholds.
MAX_ABS_SLOPE = 0.05
MAX_REL_VARIATION = 0.10
MIN_DECADES = 2.0


@dataclass(frozen=True)
class PlateauEstimate:
    value: float
    found: bool
    window: tuple[float, float] | None = None


def _window_ok(t: np.ndarray, y: np.ndarray) -> bool:
    if y.size < 3 or np.any(y <= 0):
        return False
    slope = np.polyfit(np.log10(t), np.log10(y), 1)[0]
    variation = (y.max() - y.min()) / y.mean()
    return bool(abs(slope) < MAX_ABS_SLOPE and variation < MAX_REL_VARIATION)


def plateau_estimate(times, chi_bar) -> PlateauEstimate:
    """
    Late-time level of an ensemble-mean exponent curve.

    Slides a one-decade window over log t; a window qualifies when the log-log
    slope is below 0.05 in magnitude and (max - min) / mean is below 10%. The value
    is the mean over the latest qualifying window, and is only accepted when it
    lies inside the range spanned by the final decade.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(chi_bar, dtype=float)
    if t.size != y.size:
        raise ValueError(f"times and chi_bar differ in length: {t.size} vs {y.size}")
    keep = t > 0
    t, y = t[keep], y[keep]
    if t.size < 3 or np.log10(t[-1] / t[0]) < MIN_DECADES - 1e-12:
        return PlateauEstimate(float("nan"), False)

    t_end = t[-1]
    starts = np.flatnonzero(t * 10.0 <= t_end * (1 + 1e-12))
    for i in starts[::-1]:
        sel = (t >= t[i]) & (t <= t[i] * 10.0 * (1 + 1e-12))
        if _window_ok(t[sel], y[sel]):
            value = float(np.mean(y[sel]))
            final = y[t >= t_end / 10.0 * (1 - 1e-12)]
            slack = 1e-12 * abs(value)
            if final.min() - slack <= value <= final.max() + slack:
                return PlateauEstimate(value, True, (float(t[sel][0]), float(t[sel][-1])))
            return PlateauEstimate(value, False, (float(t[sel][0]), float(t[sel][-1])))
    return PlateauEstimate(float("nan"), False)


def tail_slope(times, values, decades: float = 1.0) -> float:
    """Log-log slope of ``values`` vs ``times`` over the last ``decades``."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    sel = (t >= t[-1] / 10.0**decades) & (y > 0)
    if np.count_nonzero(sel) < 2:
        raise ValueError("not enough positive samples in the tail")
    return float(np.polyfit(np.log10(t[sel]), np.log10(y[sel]), 1)[0])
