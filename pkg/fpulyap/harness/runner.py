"""
Sweep orchestration: one ensemble per (model, N, eps), resumable per trajectory.

Each trajectory checkpoints into ``<point>/checkpoints/traj_XXXX.npz`` at most every
``checkpoint_interval`` wall-clock seconds and once more when it completes, so
finished trajectories survive an interrupted sweep. Reductions always run in
trajectory order, which makes every output byte a function of (config, seed).
"""

from __future__ import annotations

import time
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

import fpulyap
from fpulyap.analysis.fits import FitResult, logN_fit, powerlaw_fit, slope_vs_N, window_for
from fpulyap.harness.checkpoint import checkpoint_read, checkpoint_write
from fpulyap.harness.config import ExperimentConfig
from fpulyap.harness.schemas import FitRow, RunRecord, RunSummary, TheoryRow
from fpulyap.harness.storage import (
    collect_summaries,
    ensemble_frame,
    point_dir,
    read_csv,
    read_json,
    series_frame,
    write_csv,
    write_json,
)
from fpulyap.lyapunov.benettin import BenettinRun, sampling_grid
from fpulyap.lyapunov.crossover import crossover_fit
from fpulyap.lyapunov.ensemble import EnsembleConfig, EnsembleResult, ensemble_chi, new_trajectory, reduce_ensemble
from fpulyap.lyapunov.plateau import tail_slope
from fpulyap.models.chain import ModelSpec
from fpulyap.theory.asymptotic import asymptotic_chi
from fpulyap.theory.curvature import constrained_gaussian_stats
from fpulyap.theory.van_kampen import Regime, van_kampen_chi
from fpulyap.utils import metrics
from fpulyap.utils.errors import FitError, TheoryNotApplicableError
from fpulyap.utils.logging_config import get_logger

logger = get_logger(__name__)

CHUNK_STEPS = 10_000
T_MAX_FACTOR = 200.0


@dataclass(frozen=True)
class TrajectoryJob:
    model: ModelSpec
    eps: float
    ensemble: EnsembleConfig
    index: int
    checkpoint: Path
    interval: float
    config_hash: str
    resume: bool


def _advance_chunk(run: BenettinRun) -> None:
    run.advance(CHUNK_STEPS)


def _write_job_checkpoint(job: TrajectoryJob, run: BenettinRun, done: bool) -> None:
    checkpoint_write(
        job.checkpoint,
        run.snapshot(),
        meta={"config_hash": job.config_hash, "trajectory": job.index, "done": done},
    )


def _load_job_checkpoint(job: TrajectoryJob) -> tuple[BenettinRun | None, np.ndarray | None]:
    if not job.checkpoint.exists():
        return None, None
    snap, meta = checkpoint_read(job.checkpoint)
    if meta.get("config_hash") != job.config_hash or meta.get("trajectory") != job.index:
        logger.warning(
            "discarding checkpoint from another configuration",
            extra={"event": "checkpoint_discarded", "path": str(job.checkpoint)},
        )
        return None, None
    if meta.get("done"):
        return None, snap["chi_hat"]
    if not job.resume:
        logger.warning(
            "partial checkpoint ignored without --resume",
            extra={"event": "checkpoint_discarded", "path": str(job.checkpoint)},
        )
        return None, None
    run = BenettinRun.restore(
        job.model, job.ensemble.integrator(), job.ensemble.n_steps, job.ensemble.benettin(), snap
    )
    logger.info(
        "checkpoint restored",
        extra={"event": "checkpoint_restored", "path": str(job.checkpoint), "step": snap["steps"]},
    )
    return run, None


def run_job(job: TrajectoryJob) -> np.ndarray:
    """chi_hat samples of one trajectory, continuing from its checkpoint when possible."""
    run, finished = _load_job_checkpoint(job)
    if finished is not None:
        return finished
    if run is None:
        run = new_trajectory(job.model, job.eps, job.ensemble, job.index)
    last = time.monotonic()
    while not run.done:
        _advance_chunk(run)
        if not run.done and time.monotonic() - last >= job.interval:
            _write_job_checkpoint(job, run, done=False)
            last = time.monotonic()
    _write_job_checkpoint(job, run, done=True)
    metrics.trajectories_inc(job.model.label)
    logger.info(
        "trajectory completed",
        extra={
            "event": "trajectory_completed",
            "model": job.model.label,
            "N": job.model.n_springs,
            "eps": job.eps,
            "trajectory": job.index,
        },
    )
    return run.series().chi_hat


def pilot_chi(cfg: ExperimentConfig, model: ModelSpec, eps: float, dt: float) -> float:
    """Final ensemble mean of a short two-trajectory run."""
    pilot = EnsembleConfig(
        n_trajectories=2,
        seed=cfg.seed,
        dt=dt,
        t_max=cfg.pilot_t,
        renorm_every=cfg.renorm_every,
        points_per_decade=cfg.points_per_decade,
        scheme=cfg.scheme,
    )
    return float(ensemble_chi(model, model.n_springs, eps, pilot).chi_bar[-1])


def resolve_t_max(
    cfg: ExperimentConfig, model: ModelSpec, eps: float, dt: float
) -> tuple[float, str, float | None]:
    """
    (t_max, rule, chi estimate). Default rule: max(t_max_floor, 200 / chi_est) capped
    at t_max_cap, with chi_est from expected_chi, else the asymptotic table, else a pilot.
    """
    if cfg.t_max is not None:
        return cfg.t_max, "explicit", cfg.expected_chi
    chi, rule = cfg.expected_chi, "expected_chi"
    if chi is None:
        try:
            chi, rule = asymptotic_chi(model, eps), "asymptotic"
        except TheoryNotApplicableError:
            chi = None
        if not chi:
            chi, rule = pilot_chi(cfg, model, eps, dt), "pilot"
    if chi is None or not chi > 0:
        return cfg.t_max_cap, f"{rule}:cap", chi
    t_max = min(max(cfg.t_max_floor, T_MAX_FACTOR / chi), cfg.t_max_cap)
    return t_max, rule, chi


def error_floor_guard(plateau: float, floor: float, factor: float = 5.0) -> bool:
    """True when the plateau clears the integrator error floor by ``factor``."""
    return bool(plateau >= factor * floor)


def lookup_floor(table: pd.DataFrame | None, n_springs: int, eps: float, dt: float) -> float | None:
    if table is None or table.empty:
        return None
    hit = table[
        (table["N"] == n_springs)
        & np.isclose(table["eps"], eps, rtol=1e-9, atol=0.0)
        & np.isclose(table["dt"], dt, rtol=1e-9, atol=0.0)
    ]
    return None if hit.empty else float(hit["floor"].iloc[0])


def curve_diagnostics(result: EnsembleResult) -> tuple[float | None, float | None]:
    """Last-decade log-log slope of chi_bar and the crossover-fit chi, when they exist."""
    try:
        slope: float | None = tail_slope(result.times, result.chi_bar)
    except ValueError:
        slope = None
    chi: float | None = None
    if result.plateau_found:
        try:
            chi = crossover_fit(result.times, result.chi_bar).chi
        except FitError:
            pass
    return slope, chi


def _floor_table(cfg: ExperimentConfig) -> pd.DataFrame | None:
    return read_csv(cfg.floor_file) if cfg.floor_file else None


def run_point(
    cfg: ExperimentConfig,
    n_springs: int,
    eps: float,
    dt: float | None = None,
    root: str | Path | None = None,
    dt_in_path: bool = False,
    floor_table: pd.DataFrame | None = None,
) -> RunSummary:
    """One ensemble at (N, eps[, dt]); a matching completed record is returned untouched."""
    dt = cfg.resolved_dt(eps) if dt is None else dt
    model = cfg.build_model(n_springs)
    chash = cfg.point_hash(n_springs, eps, dt)
    out = point_dir(root or cfg.out, cfg.model, n_springs, eps, dt if dt_in_path else None)
    base_extra = {"model": cfg.model, "N": n_springs, "eps": eps, "dt": dt, "config_hash": chash}

    record_path = out / "record.json"
    if record_path.exists() and (out / "summary.json").exists():
        try:
            record = RunRecord(**read_json(record_path))
        except (ValueError, TypeError):
            record = None
        if record is not None and record.config_hash == chash:
            logger.info("run already complete", extra={"event": "run_skipped", **base_extra})
            return record.summary

    t_max, rule, chi_est = resolve_t_max(cfg, model, eps, dt)
    ens = EnsembleConfig(
        n_trajectories=cfg.ensemble,
        seed=cfg.seed,
        dt=dt,
        t_max=t_max,
        renorm_every=cfg.renorm_every,
        points_per_decade=cfg.points_per_decade,
        scheme=cfg.scheme,
        workers=cfg.workers,
    )
    jobs = [
        TrajectoryJob(
            model=model,
            eps=eps,
            ensemble=ens,
            index=i,
            checkpoint=out / "checkpoints" / f"traj_{i:04d}.npz",
            interval=cfg.checkpoint_interval,
            config_hash=chash,
            resume=cfg.resume,
        )
        for i in range(cfg.ensemble)
    ]
    wall0 = time.perf_counter()
    with metrics.time_block("run_point"):
        if cfg.workers == 1:
            chi_rows = [run_job(j) for j in jobs]
        else:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                chi_rows = list(pool.map(run_job, jobs))
    wall = time.perf_counter() - wall0

    times = sampling_grid(ens.n_steps, ens.points_per_decade) * dt
    result = reduce_ensemble(times, np.vstack(chi_rows))

    floor = lookup_floor(floor_table if floor_table is not None else _floor_table(cfg), n_springs, eps, dt)
    limited = bool(
        floor is not None and result.plateau_found and not error_floor_guard(result.plateau, floor, cfg.floor_factor)
    )
    slope, cross_chi = curve_diagnostics(result)
    seeds = {"master": cfg.seed, "tangent": cfg.seed, "pattern": cfg.seed}
    summary = RunSummary(
        model=cfg.model,
        N=n_springs,
        eps=eps,
        dt=dt,
        t_max=float(times[-1]),
        n=result.n,
        plateau=result.plateau if result.plateau_found else None,
        err=result.err,
        plateau_found=result.plateau_found,
        window=result.window,
        chi_final=float(result.chi_bar[-1]),
        seeds=seeds,
        config_hash=chash,
        t_max_rule=rule,
        chi_estimate=chi_est,
        error_floor=floor,
        algorithm_limited=limited,
        tail_slope=slope,
        crossover_chi=cross_chi,
    )

    header = {"model": cfg.model, "N": n_springs, "eps": repr(eps), "dt": repr(dt), "seed": cfg.seed, "config_hash": chash}
    write_csv(out / "series.csv", series_frame(times, result.chi_hat), header)
    write_csv(out / "ensemble.csv", ensemble_frame(times, result.chi_bar, result.spread, result.n), header)
    write_json(out / "summary.json", summary.model_dump(mode="json"))
    record = RunRecord(
        config_hash=chash,
        code_version=fpulyap.__version__,
        seeds=seeds,
        t_max_rule=rule,
        summary=summary,
        wall_time_s=wall,
    )
    write_json(record_path, record.model_dump(mode="json"))

    if not result.plateau_found:
        metrics.plateau_missing_inc()
        logger.warning("no plateau detected", extra={"event": "plateau_not_found", **base_extra})
    if limited:
        metrics.algorithm_limited_inc()
        logger.warning(
            "plateau within the integrator error floor",
            extra={"event": "algorithm_limited", "plateau": result.plateau, **base_extra},
        )
    logger.info(
        "run complete",
        extra={"event": "run_completed", "plateau": summary.plateau, "duration_ms": wall * 1000.0, **base_extra},
    )
    return summary


def sweep(cfg: ExperimentConfig) -> list[RunSummary]:
    """Cartesian product N x eps, in config order."""
    table = _floor_table(cfg)
    return [run_point(cfg, n, eps, floor_table=table) for n in cfg.N for eps in cfg.eps]


def theory_table(cfg: ExperimentConfig, n_springs: int | None = None) -> pd.DataFrame:
    """Van Kampen curve from constrained-Gaussian statistics plus the asymptotic row, per eps."""
    n_springs = n_springs or cfg.N[0]
    model = cfg.build_model(n_springs)
    rows: list[TheoryRow] = []
    for eps in cfg.eps:
        stats = constrained_gaussian_stats(model, eps, cfg.n_mc, cfg.seed)
        est = van_kampen_chi(stats)
        rows.append(TheoryRow(eps=eps, chi_theory=est.chi, regime=est.regime.value, omega0=stats.omega0, sigma2=stats.sigma2, tau=stats.tau))
        try:
            chi = asymptotic_chi(model, eps)
        except TheoryNotApplicableError:
            continue
        rows.append(
            TheoryRow(eps=eps, chi_theory=chi, regime=Regime.SMALL_EPS_ASYMPTOTIC.value, omega0=2.0, sigma2=8.0 * chi, tau=1.0)
        )
    df = pd.DataFrame([r.model_dump() for r in rows])
    write_csv(Path(cfg.out) / cfg.model / f"N{n_springs}_theory.csv", df, {"model": cfg.model, "N": n_springs, "seed": cfg.seed, "n_mc": cfg.n_mc})
    return df


def fit_results(root: str | Path, window: tuple[float, float] | None = None) -> pd.DataFrame:
    """Power-law fits per (model, N, dt) over every converged summary below ``root``."""
    summaries = [s for s in collect_summaries(root) if s.plateau_found and s.plateau is not None]
    if not summaries:
        raise FitError(f"no converged results under {root}")
    groups: dict[tuple[str, float], dict[int, list[tuple[float, float, float]]]] = {}
    for s in summaries:
        groups.setdefault((s.model, s.dt), {}).setdefault(s.N, []).append((s.eps, s.plateau, s.err))

    rows: list[FitRow] = []
    logn_rows: list[dict] = []
    for (model, dt), by_n in sorted(groups.items()):
        win = window or window_for(model)
        usable = {n: pts for n, pts in by_n.items() if sum(win[0] <= e <= win[1] for e, _, _ in pts) >= 3}
        for n in sorted(set(by_n) - set(usable)):
            logger.warning("too few points to fit", extra={"event": "fit_skipped", "model": model, "N": n, "dt": dt})
        if usable:
            trend = slope_vs_N(usable, win)
            for n, fit in trend.fits.items():
                rows.append(_fit_row(model, n, fit))
            logger.info("slope vs N", extra={"event": "slope_vs_N", "model": model, "dt": dt, "trend": trend.trend})
        logn_rows += _logn_rows(model, dt, by_n)

    df = pd.DataFrame([r.model_dump() for r in rows])
    write_csv(Path(root) / "fit.csv", df)
    if logn_rows:
        write_csv(Path(root) / "fit_logN.csv", pd.DataFrame(logn_rows))
    return df


def _fit_row(model: str, n: int, fit: FitResult) -> FitRow:
    lo, hi = fit.eps_window
    return FitRow(model=model, N=n, C=fit.C, a=fit.a, a_stderr=fit.a_stderr, window=f"[{lo!r}, {hi!r}]", rms=fit.residual_rms, n_points=fit.n_points)


def _logn_rows(model: str, dt: float, by_n: dict[int, list[tuple[float, float, float]]]) -> list[dict]:
    by_eps: dict[float, list[tuple[int, float]]] = {}
    for n, pts in by_n.items():
        for eps, chi, _ in pts:
            by_eps.setdefault(eps, []).append((n, chi))
    rows = []
    for eps, pts in sorted(by_eps.items()):
        try:
            fit = logN_fit(pts)
        except FitError:
            continue
        rows.append(
            {
                "model": model,
                "dt": dt,
                "eps": eps,
                "slope_per_decade": fit.slope_per_decade,
                "intercept": fit.intercept,
                "rms": fit.rms,
                "power_a": fit.power_alternative.a,
                "power_rms": fit.power_alternative.residual_rms,
                "note": fit.note,
            }
        )
    return rows


def any_flagged(summaries: Sequence[RunSummary]) -> bool:
    return any(s.flagged for s in summaries)
