from __future__ import annotations

from datetime import datetime, timezone

from pydantic import BaseModel, Field


class RunSummary(BaseModel):
    """Deterministic per-run result; written as summary.json."""

    model: str
    N: int
    eps: float
    dt: float
    t_max: float
    n: int
    plateau: float | None
    err: float
    plateau_found: bool
    window: tuple[float, float] | None = None
    chi_final: float
    seeds: dict[str, int]
    config_hash: str
    t_max_rule: str
    chi_estimate: float | None = None
    error_floor: float | None = None
    algorithm_limited: bool = False
    tail_slope: float | None = None
    crossover_chi: float | None = None

    @property
    def flagged(self) -> bool:
        return (not self.plateau_found) or self.algorithm_limited


class RunRecord(BaseModel):
    """Provenance of a completed run; record.json carries wall time, so it is not byte-stable."""

    config_hash: str
    code_version: str
    seeds: dict[str, int]
    t_max_rule: str
    summary: RunSummary
    wall_time_s: float
    completed_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))


class FitRow(BaseModel):
    model: str
    N: int
    C: float
    a: float
    a_stderr: float
    window: str
    rms: float
    n_points: int


class TheoryRow(BaseModel):
    eps: float
    chi_theory: float
    regime: str
    omega0: float
    sigma2: float
    tau: float


class FloorRow(BaseModel):
    N: int
    eps: float
    dt: float
    plateau: float | None
    plateau_found: bool
    chi_final: float
    floor: float
