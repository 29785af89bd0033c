"""
Fixed-step symplectic integration of the chain and of its tangent map.

Leapfrog2 is drift-kick-drift. Yoshida4 composes three leapfrog sub-steps with
weights (w1, w0, w1). Tangent vectors are advanced by the exact linearization of
the same discrete map: every kick uses the Hessian action at the displacement of
that sub-step.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from fpulyap.dynamics.potentials import force_from_q, hessian_action_from_q
from fpulyap.models.chain import ChainState, ModelSpec, TangentState
from fpulyap.utils import metrics
from fpulyap.utils.errors import IntegrationError, PotentialOverflowError
from fpulyap.utils.logging_config import get_logger

logger = get_logger(__name__)

W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
W0 = 1.0 - 2.0 * W1
BLOWUP_LIMIT = 1e6


class Scheme(str, Enum):
    LEAPFROG2 = "leapfrog2"
    YOSHIDA4 = "yoshida4"


# (drift fractions, kick fractions); drifts interleave kicks: d0 k0 d1 k1 ... dn
_COMPOSITIONS: dict[Scheme, tuple[tuple[float, ...], tuple[float, ...]]] = {
    Scheme.LEAPFROG2: ((0.5, 0.5), (1.0,)),
    Scheme.YOSHIDA4: (
        (0.5 * W1, 0.5 * (W1 + W0), 0.5 * (W0 + W1), 0.5 * W1),
        (W1, W0, W1),
    ),
}


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.1
    scheme: Scheme = Scheme.YOSHIDA4
    with_tangent: bool = True

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        object.__setattr__(self, "scheme", Scheme(self.scheme))


def _advance_arrays(
    model: ModelSpec,
    q: np.ndarray,
    p: np.ndarray,
    dq: np.ndarray | None,
    dp: np.ndarray | None,
    h: float,
    scheme: Scheme,
) -> None:
    """One step of size ``h`` (may be negative), in place."""
    drifts, kicks = _COMPOSITIONS[scheme]
    for d, k in zip(drifts, kicks):
        q += (d * h) * p
        if dq is not None:
            dq += (d * h) * dp
            dp += (k * h) * hessian_action_from_q(model, q, dq)
        p += (k * h) * force_from_q(model, q)
    d = drifts[-1]
    q += (d * h) * p
    if dq is not None:
        dq += (d * h) * dp


def step(
    model: ModelSpec,
    state: ChainState,
    tangent: TangentState | None,
    config: IntegratorConfig,
    dt: float | None = None,
) -> tuple[ChainState, TangentState | None]:
    """
    Advance one step and return new (state, tangent).

    ``dt`` overrides ``config.dt`` and may be negative, which runs the map backwards.
    """
    if (tangent is not None) != config.with_tangent:
        raise ValueError("tangent must be given exactly when config.with_tangent is set")
    h = config.dt if dt is None else dt
    q, p = state.q.copy(), state.p.copy()
    dq = dp = None
    if tangent is not None:
        dq, dp = tangent.dq.copy(), tangent.dp.copy()
    try:
        _advance_arrays(model, q, p, dq, dp, h, config.scheme)
    except PotentialOverflowError as exc:
        raise IntegrationError(str(exc), t=h, step=1) from exc
    _check_bounded(q, p, h, 1)
    new_state = ChainState(q, p, state.n_springs, state.boundary)
    return new_state, (TangentState(dq, dp) if dq is not None else None)


def _check_bounded(q: np.ndarray, p: np.ndarray, t: float, step_index: int) -> None:
    # NaN fails both comparisons
    if not (np.max(np.abs(q), initial=0.0) <= BLOWUP_LIMIT and np.max(np.abs(p), initial=0.0) <= BLOWUP_LIMIT):
        metrics.blowups_inc()
        raise IntegrationError("chain blew up: non-finite or |q|,|p| above 1e6", t=t, step=step_index)


class Propagator:
    """
    Mutable integration cursor over (q, p, dq, dp).

    Time is always ``steps * dt`` so resumed and uninterrupted runs agree bitwise.
    """

    def __init__(
        self,
        model: ModelSpec,
        state: ChainState,
        tangent: TangentState | None,
        config: IntegratorConfig,
        steps: int = 0,
    ) -> None:
        if (tangent is not None) != config.with_tangent:
            raise ValueError("tangent must be given exactly when config.with_tangent is set")
        self.model = model
        self.config = config
        self.q = state.q.copy()
        self.p = state.p.copy()
        self.dq = tangent.dq.copy() if tangent is not None else None
        self.dp = tangent.dp.copy() if tangent is not None else None
        self.steps = int(steps)

    @property
    def t(self) -> float:
        return self.steps * self.config.dt

    def advance(self, n_steps: int) -> None:
        h, scheme, model = self.config.dt, self.config.scheme, self.model
        for _ in range(n_steps):
            try:
                _advance_arrays(model, self.q, self.p, self.dq, self.dp, h, scheme)
            except PotentialOverflowError as exc:
                raise IntegrationError(str(exc), t=(self.steps + 1) * h, step=self.steps + 1) from exc
            self.steps += 1
            _check_bounded(self.q, self.p, self.t, self.steps)

    def tangent_norm(self) -> float:
        if self.dq is None:
            raise ValueError("propagator carries no tangent")
        return float(np.sqrt(np.dot(self.dp, self.dp) + np.dot(self.dq, self.dq)))

    def rescale_tangent(self, factor: float) -> None:
        self.dq *= factor  # type: ignore[operator]
        self.dp *= factor  # type: ignore[operator]

    def state(self) -> ChainState:
        return ChainState(self.q.copy(), self.p.copy(), self.model.n_springs, self.model.boundary)

    def tangent(self) -> TangentState | None:
        if self.dq is None:
            return None
        return TangentState(self.dq.copy(), self.dp.copy())  # type: ignore[arg-type]


@dataclass
class Observer:
    """Callback invoked after every ``every``-th step; return values are collected by ``name``."""

    name: str
    every: int
    fn: Callable[[Propagator], Any]

    def __post_init__(self) -> None:
        if self.every < 1:
            raise ValueError(f"observer {self.name!r} needs every >= 1, got {self.every}")


@dataclass
class IntegrationResult:
    state: ChainState
    tangent: TangentState | None
    steps: int
    t: float
    outputs: dict[str, list[Any]] = field(default_factory=dict)


def steps_for(t_end: float, dt: float) -> int:
    """Number of whole steps that fit in ``t_end``; a remainder is dropped and logged."""
    k = math.floor(t_end / dt + 1e-9)
    if k < 0:
        raise ValueError(f"t_end must be non-negative, got {t_end}")
    if abs(k * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        logger.warning(
            "t_end is not a multiple of dt; rounded down",
            extra={"event": "t_end_rounded", "t": t_end, "dt": dt, "step": k},
        )
    return k


def integrate(
    model: ModelSpec,
    state: ChainState,
    tangent: TangentState | None,
    config: IntegratorConfig,
    t_end: float,
    observers: Sequence[Observer] = (),
) -> IntegrationResult:
    n_total = steps_for(t_end, config.dt)
    prop = Propagator(model, state, tangent, config)
    outputs: dict[str, list[Any]] = {obs.name: [] for obs in observers}
    while prop.steps < n_total:
        nxt = n_total
        for obs in observers:
            nxt = min(nxt, (prop.steps // obs.every + 1) * obs.every)
        prop.advance(nxt - prop.steps)
        for obs in observers:
            if prop.steps % obs.every == 0:
                outputs[obs.name].append(obs.fn(prop))
    return IntegrationResult(prop.state(), prop.tangent(), prop.steps, prop.t, outputs)
