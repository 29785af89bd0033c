"""
Finite-time maximal Lyapunov exponent by tangent-vector renormalization.

chi_hat(t) = (log_accum + log |xi(t)|) / t with |xi(0)| = 1, where log_accum sums
the logs of the norms removed at each renormalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from fpulyap.dynamics.integrator import IntegratorConfig, Propagator, steps_for
from fpulyap.models.chain import ChainState, ModelSpec, TangentState
from fpulyap.utils.errors import IntegrationError


@dataclass(frozen=True)
class BenettinConfig:
    renorm_every: int = 100
    points_per_decade: int = 50

    def __post_init__(self) -> None:
        if self.renorm_every < 1:
            raise ValueError(f"renorm_every must be >= 1, got {self.renorm_every}")
        if self.points_per_decade < 1:
            raise ValueError(f"points_per_decade must be >= 1, got {self.points_per_decade}")


@dataclass
class LyapSeries:
    times: np.ndarray
    chi_hat: np.ndarray
    log_accum: float
    steps: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


def sampling_grid(n_steps: int, points_per_decade: int = 50) -> np.ndarray:
    """Geometric grid of distinct step indices in [1, n_steps], always ending at n_steps."""
    if n_steps < 1:
        return np.zeros(0, dtype=np.int64)
    decades = math.log10(n_steps)
    num = max(2, int(math.ceil(decades * points_per_decade)) + 1)
    grid = np.unique(np.round(np.logspace(0.0, decades, num)).astype(np.int64))
    grid = grid[(grid >= 1) & (grid <= n_steps)]
    if grid[-1] != n_steps:
        grid = np.append(grid, n_steps)
    return grid


class BenettinRun:
    """
    Resumable Benettin computation.

    The full run state (phase point, tangent, step count, accumulated log norms and
    samples taken so far) round-trips through :meth:`snapshot` / :meth:`restore`, so
    a restored run continues bit-identically.
    """

    def __init__(
        self,
        model: ModelSpec,
        state: ChainState,
        tangent: TangentState,
        integrator: IntegratorConfig,
        n_steps: int,
        config: BenettinConfig | None = None,
    ) -> None:
        if not integrator.with_tangent:
            raise ValueError("Benettin runs need an integrator config with_tangent=True")
        self.model = model
        self.integrator = integrator
        self.config = config or BenettinConfig()
        self.n_steps = int(n_steps)
        self.grid = sampling_grid(self.n_steps, self.config.points_per_decade)
        norm = tangent.norm()
        if not (norm > 0 and math.isfinite(norm)):
            raise ValueError("initial tangent vector must have finite nonzero norm")
        tangent = tangent.copy()
        tangent.rescale_(1.0 / norm)
        self.prop = Propagator(model, state, tangent, integrator)
        self.log_accum = 0.0
        self.chi_hat: list[float] = []

    @property
    def done(self) -> bool:
        return self.prop.steps >= self.n_steps

    @property
    def t(self) -> float:
        return self.prop.t

    def _next_event(self) -> int:
        renorm = (self.prop.steps // self.config.renorm_every + 1) * self.config.renorm_every
        sample = int(self.grid[len(self.chi_hat)]) if len(self.chi_hat) < self.grid.size else self.n_steps
        return min(renorm, sample, self.n_steps)

    def advance(self, max_steps: int | None = None) -> None:
        """Integrate until done, or until ``max_steps`` more steps have been taken."""
        limit = self.n_steps if max_steps is None else min(self.n_steps, self.prop.steps + max_steps)
        every = self.config.renorm_every
        while self.prop.steps < limit:
            target = min(self._next_event(), limit)
            self.prop.advance(target - self.prop.steps)
            if self.prop.steps % every == 0:
                self._renormalize()
            if len(self.chi_hat) < self.grid.size and self.prop.steps == self.grid[len(self.chi_hat)]:
                self.chi_hat.append((self.log_accum + math.log(self.prop.tangent_norm())) / self.prop.t)

    def _renormalize(self) -> None:
        norm = self.prop.tangent_norm()
        if not (norm > 0 and math.isfinite(norm)):
            raise IntegrationError("tangent vector degenerated", t=self.prop.t, step=self.prop.steps)
        self.log_accum += math.log(norm)
        self.prop.rescale_tangent(1.0 / norm)

    def series(self) -> LyapSeries:
        k = len(self.chi_hat)
        steps = self.grid[:k]
        return LyapSeries(
            times=steps * self.integrator.dt,
            chi_hat=np.asarray(self.chi_hat, dtype=float),
            log_accum=self.log_accum,
            steps=steps.copy(),
        )

    def snapshot(self) -> dict[str, Any]:
        return {
            "q": self.prop.q.copy(),
            "p": self.prop.p.copy(),
            "dq": self.prop.dq.copy(),  # type: ignore[union-attr]
            "dp": self.prop.dp.copy(),  # type: ignore[union-attr]
            "steps": self.prop.steps,
            "log_accum": self.log_accum,
            "chi_hat": np.asarray(self.chi_hat, dtype=float),
        }

    @classmethod
    def restore(
        cls,
        model: ModelSpec,
        integrator: IntegratorConfig,
        n_steps: int,
        config: BenettinConfig | None,
        snap: dict[str, Any],
    ) -> BenettinRun:
        state = ChainState(snap["q"], snap["p"], model.n_springs, model.boundary)
        run = cls.__new__(cls)
        run.model = model
        run.integrator = integrator
        run.config = config or BenettinConfig()
        run.n_steps = int(n_steps)
        run.grid = sampling_grid(run.n_steps, run.config.points_per_decade)
        run.prop = Propagator(model, state, TangentState(snap["dq"], snap["dp"]), integrator, steps=int(snap["steps"]))
        run.log_accum = float(snap["log_accum"])
        run.chi_hat = [float(x) for x in np.asarray(snap["chi_hat"], dtype=float)]
        return run


def benettin_run(
    model: ModelSpec,
    x0: ChainState,
    integrator: IntegratorConfig,
    t_max: float,
    renorm_every: int = 100,
    xi0: TangentState | None = None,
    rng: np.random.Generator | None = None,
    points_per_decade: int = 50,
) -> LyapSeries:
    """
    Finite-time exponent series for one initial condition.

    ``xi0`` defaults to a random unit vector drawn from ``rng``.
    """
    if xi0 is None:
        if rng is None:
            raise ValueError("either xi0 or rng must be supplied")
        xi0 = TangentState.random_unit(model.n_particles, rng)
    run = BenettinRun(
        model,
        x0,
        xi0,
        integrator,
        steps_for(t_max, integrator.dt),
        BenettinConfig(renorm_every=renorm_every, points_per_decade=points_per_decade),
    )
    run.advance()
    return run.series()
