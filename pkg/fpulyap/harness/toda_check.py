"""
Integrator-error probe on the integrable Toda chain.

Any plateau the Toda chain shows is produced by the discretization. The dt scan
reports that spurious level for each step size; the eps scan at a fixed large step
fits its power law. Both feed ``toda_check.csv``, the floor table consulted by the
error-floor guard of later sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from fpulyap.analysis.fits import FitResult, powerlaw_fit
from fpulyap.harness.config import ExperimentConfig
from fpulyap.harness.runner import run_point
from fpulyap.harness.schemas import FloorRow, RunSummary
from fpulyap.harness.storage import write_csv, write_json
from fpulyap.utils.errors import ConfigError, FitError
from fpulyap.utils.logging_config import get_logger

logger = get_logger(__name__)

DEFAULT_DT_LIST = (0.05, 0.1, 0.2, 0.4)
SUBDIR = "toda-check"


@dataclass
class TodaCheckResult:
    table: pd.DataFrame
    # None when a step size in the scan produced no plateau
    increasing_in_dt: dict[str, bool | None]
    eps_fit: FitResult | None
    n_excluded: int = 0


def spurious_floor(summary: RunSummary) -> float:
    """The spurious plateau when one was found, else the last ensemble mean (an upper bound)."""
    if summary.plateau_found and summary.plateau is not None:
        return summary.plateau
    return summary.chi_final


def _has_plateau(s: RunSummary) -> bool:
    return s.plateau_found and s.plateau is not None


def _row(s: RunSummary) -> FloorRow:
    return FloorRow(
        N=s.N, eps=s.eps, dt=s.dt, plateau=s.plateau, plateau_found=s.plateau_found, chi_final=s.chi_final, floor=spurious_floor(s)
    )


def increasing_in_dt(scan: list[RunSummary]) -> bool | None:
    """Whether the spurious plateau grows strictly with dt; undetermined if any step gave none."""
    if not scan or not all(_has_plateau(s) for s in scan):
        return None
    ordered = sorted(scan, key=lambda s: s.dt)
    return bool(np.all(np.diff([s.plateau for s in ordered]) > 0))


def run_toda_check(cfg: ExperimentConfig) -> TodaCheckResult:
    if cfg.model != "toda":
        raise ConfigError(f"toda-check runs the Toda model, got model={cfg.model!r}")
    root = Path(cfg.out) / SUBDIR
    dt_list = sorted(cfg.dt_list or DEFAULT_DT_LIST)

    scan: list[RunSummary] = []
    for n in cfg.N:
        for eps in cfg.eps[:1]:
            for dt in dt_list:
                scan.append(run_point(cfg, n, eps, dt=dt, root=root, dt_in_path=True))

    increasing = {f"N{n}_eps{cfg.eps[0]!r}": increasing_in_dt([s for s in scan if s.N == n]) for n in cfg.N}

    eps_runs = [run_point(cfg, n, eps, dt=cfg.dt_fit, root=root, dt_in_path=True) for n in cfg.N for eps in cfg.eps]
    candidates = [s for s in eps_runs if s.N == cfg.N[0]]
    plateaus = [s for s in candidates if _has_plateau(s)]
    n_excluded = len(candidates) - len(plateaus)
    if n_excluded:
        logger.warning(
            "runs without a plateau left out of the spurious power law",
            extra={"event": "plateau_missing", "dt": cfg.dt_fit, "n_excluded": n_excluded},
        )
    fit: FitResult | None = None
    try:
        fit = powerlaw_fit([(s.eps, s.plateau, s.err) for s in plateaus])
    except FitError as exc:
        logger.warning("spurious power law not fitted", extra={"event": "fit_skipped", "dt": cfg.dt_fit, "reason": str(exc)})

    seen: dict[tuple[int, float, float], FloorRow] = {}
    for s in scan + eps_runs:
        seen[(s.N, s.eps, s.dt)] = _row(s)
    table = pd.DataFrame([seen[k].model_dump() for k in sorted(seen)])
    write_csv(root / "toda_check.csv", table)
    write_json(
        root / "toda_check_summary.json",
        {
            "dt_list": dt_list,
            "increasing_in_dt": increasing,
            "dt_fit": cfg.dt_fit,
            "n_excluded": n_excluded,
            "fit": None if fit is None else {"C": fit.C, "a": fit.a, "a_stderr": fit.a_stderr, "n_points": fit.n_points},
        },
    )
    logger.info(
        "toda check complete",
        extra={"event": "toda_check_completed", "path": str(root), "a": None if fit is None else fit.a},
    )
    return TodaCheckResult(table=table, increasing_in_dt=increasing, eps_fit=fit, n_excluded=n_excluded)
