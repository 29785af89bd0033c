from __future__ import annotations

import contextlib
import time
from collections.abc import Iterator

# Optional Prometheus import
try:
    from prometheus_client import Counter, Gauge

    _PROM = True
except Exception:
    Gauge = object  # type: ignore
    Counter = object  # type: ignore
    _PROM = False


_duration_gauge = None
_trajectories_counter = None
_blowups_counter = None
_plateau_missing_counter = None
_algorithm_limited_counter = None


def _ensure_metrics():
    global _duration_gauge, _trajectories_counter, _blowups_counter
    global _plateau_missing_counter, _algorithm_limited_counter
    if _PROM and _duration_gauge is None:
        _duration_gauge = Gauge("fpulyap_duration_ms", "Duration in ms", labelnames=["component"])  # type: ignore
        _trajectories_counter = Counter("fpulyap_trajectories_total", "Completed trajectories", labelnames=["model"])  # type: ignore
        _blowups_counter = Counter("fpulyap_blowups_total", "Integrator blow-ups")  # type: ignore
        _plateau_missing_counter = Counter("fpulyap_plateau_missing_total", "Ensembles without a detected plateau")  # type: ignore
        _algorithm_limited_counter = Counter("fpulyap_algorithm_limited_total", "Plateaus below the integrator error floor")  # type: ignore


@contextlib.contextmanager
def time_block(component: str) -> Iterator[dict[str, float]]:
    """Time a block; the yielded dict receives ``duration_ms`` on exit."""
    _ensure_metrics()
    out: dict[str, float] = {}
    t0 = time.perf_counter()
    try:
        yield out
    finally:
        dt_ms = (time.perf_counter() - t0) * 1000.0
        out["duration_ms"] = dt_ms
        if _PROM:
            _duration_gauge.labels(component=component).set(dt_ms)  # type: ignore


def trajectories_inc(model: str):
    _ensure_metrics()
    if _PROM:
        _trajectories_counter.labels(model=model).inc()  # type: ignore


def blowups_inc():
    _ensure_metrics()
    if _PROM:
        _blowups_counter.inc()  # type: ignore


def plateau_missing_inc():
    _ensure_metrics()
    if _PROM:
        _plateau_missing_counter.inc()  # type: ignore


def algorithm_limited_inc():
    _ensure_metrics()
    if _PROM:
        _algorithm_limited_counter.inc()  # type: ignore
