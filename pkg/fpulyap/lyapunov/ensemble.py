from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from fpulyap.dynamics.integrator import IntegratorConfig, Scheme, steps_for
from fpulyap.lyapunov.benettin import BenettinConfig, BenettinRun, LyapSeries
from fpulyap.lyapunov.plateau import PlateauEstimate, plateau_estimate
from fpulyap.models.chain import ModelSpec, TangentState
from fpulyap.sampling.sampler import STREAM_TANGENT, SamplerConfig, sample_state, trajectory_rng
from fpulyap.utils import metrics
from fpulyap.utils.logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class EnsembleConfig:
    n_trajectories: int = 24
    seed: int = 0
    dt: float = 0.1
    t_max: float = 1e6
    renorm_every: int = 100
    points_per_decade: int = 50
    scheme: Scheme = Scheme.YOSHIDA4
    workers: int = 1
    # Seed for the initial tangent directions; defaults to ``seed``.
    tangent_seed: int | None = None

    def __post_init__(self) -> None:
        if self.n_trajectories < 2:
            raise ValueError(f"an ensemble needs at least 2 trajectories, got {self.n_trajectories}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(dt=self.dt, scheme=self.scheme, with_tangent=True)

    def benettin(self) -> BenettinConfig:
        return BenettinConfig(renorm_every=self.renorm_every, points_per_decade=self.points_per_decade)

    @property
    def n_steps(self) -> int:
        return steps_for(self.t_max, self.dt)


@dataclass
class EnsembleResult:
    times: np.ndarray
    chi_bar: np.ndarray
    spread: np.ndarray
    n: int
    plateau: float
    err: float
    plateau_found: bool
    window: tuple[float, float] | None = None
    chi_hat: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))


def new_trajectory(model: ModelSpec, eps: float, config: EnsembleConfig, index: int) -> BenettinRun:
    """Fresh Benettin run for trajectory ``index``; fully determined by the seeds."""
    x0 = sample_state(
        model, model.n_springs, SamplerConfig(eps=eps, n_samples=config.n_trajectories, seed=config.seed), index
    )
    tseed = config.seed if config.tangent_seed is None else config.tangent_seed
    xi0 = TangentState.random_unit(model.n_particles, trajectory_rng(tseed, index, STREAM_TANGENT))
    return BenettinRun(model, x0, xi0, config.integrator(), config.n_steps, config.benettin())


def run_trajectory(model: ModelSpec, eps: float, config: EnsembleConfig, index: int) -> LyapSeries:
    run = new_trajectory(model, eps, config, index)
    logger.debug(
        "trajectory started",
        extra={"event": "trajectory_started", "model": model.label, "N": model.n_springs, "eps": eps, "trajectory": index},
    )
    with metrics.time_block("trajectory") as tb:
        run.advance()
    metrics.trajectories_inc(model.label)
    logger.info(
        "trajectory completed",
        extra={
            "event": "trajectory_completed",
            "model": model.label,
            "N": model.n_springs,
            "eps": eps,
            "trajectory": index,
            "duration_ms": tb.get("duration_ms"),
        },
    )
    return run.series()


def _trajectory_task(args: tuple[ModelSpec, float, EnsembleConfig, int]) -> LyapSeries:
    return run_trajectory(*args)


def reduce_ensemble(times: np.ndarray, chi_hat: np.ndarray) -> EnsembleResult:
    """
    Ensemble statistics from per-trajectory series stacked in trajectory order.

    chi_bar is the arithmetic mean at matched times, spread the population standard
    deviation, and err = 3 sigma / sqrt(n - 1) at the final time.
    """
    chi_hat = np.asarray(chi_hat, dtype=float)
    n = chi_hat.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 trajectories, got {n}")
    chi_bar = chi_hat.mean(axis=0)
    spread = chi_hat.std(axis=0)
    err = 3.0 * float(spread[-1]) / np.sqrt(n - 1) if spread.size else float("nan")
    est: PlateauEstimate = plateau_estimate(times, chi_bar)
    return EnsembleResult(
        times=np.asarray(times, dtype=float),
        chi_bar=chi_bar,
        spread=spread,
        n=n,
        plateau=est.value,
        err=err,
        plateau_found=est.found,
        window=est.window,
        chi_hat=chi_hat,
    )


def ensemble_chi(model: ModelSpec, n_springs: int, eps: float, config: EnsembleConfig) -> EnsembleResult:
    """Run ``n_trajectories`` Benettin computations and reduce them deterministically."""
    if n_springs != model.n_springs:
        raise ValueError(f"model has {model.n_springs} springs, asked for {n_springs}")
    tasks = [(model, eps, config, i) for i in range(config.n_trajectories)]
    if config.workers == 1:
        series = [_trajectory_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            # map yields in submission order
            series = list(pool.map(_trajectory_task, tasks))
    result = reduce_ensemble(series[0].times, np.vstack([s.chi_hat for s in series]))
    if not result.plateau_found:
        metrics.plateau_missing_inc()
        logger.warning(
            "no plateau detected",
            extra={"event": "plateau_not_found", "model": model.label, "N": n_springs, "eps": eps},
        )
    return result
