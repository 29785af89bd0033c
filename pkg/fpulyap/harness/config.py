"""
Experiment configuration: flat YAML validated by pydantic, overridden by CLI flags.

Every key is typed and unknown keys are rejected. Arrays (N, eps, dt_list) are
always written out explicitly.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from fpulyap.dynamics.integrator import Scheme
from fpulyap.models.chain import Boundary, ModelSpec
from fpulyap.models.presets import PRESET_NAMES, make_preset
from fpulyap.utils.errors import ConfigError, ModelError
from fpulyap.utils.logging_config import get_logger

logger = get_logger(__name__)

OUTPUT_ROOT_ENV = "FPULYAP_OUTPUT_ROOT"
DEFAULT_DT = 0.1
SMALL_DT = 0.05
# gamma-T and pure-delta need the smaller step below this eps
SMALL_DT_EPS = 1e-3
SMALL_DT_MODELS = frozenset({"gamma-T", "pure-delta"})

# Keys that do not change any computed number.
_NON_RESULT_KEYS = frozenset({"out", "workers", "checkpoint_interval", "resume", "floor_file"})


def default_output_root() -> str:
    return os.getenv(OUTPUT_ROOT_ENV, "results")


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    model: str
    boundary: Boundary = Boundary.FIXED_ENDS
    alpha: float | list[float] | None = None
    beta: float | list[float] | None = None
    gamma: float | list[float] | None = None
    delta: float | list[float] | None = None
    toda_c: float | None = None

    N: list[int] = Field(min_length=1)
    eps: list[float] = Field(min_length=1)
    dt: float | None = Field(default=None, gt=0)
    scheme: Scheme = Scheme.YOSHIDA4

    t_max: float | None = Field(default=None, gt=0)
    t_max_floor: float = Field(default=1e6, gt=0)
    t_max_cap: float = Field(default=1e8, gt=0)
    expected_chi: float | None = Field(default=None, gt=0)
    pilot_t: float = Field(default=1e4, gt=0)

    ensemble: int = Field(default=24, ge=2)
    seed: int = Field(default=0, ge=0, lt=2**64)
    renorm_every: int = Field(default=100, ge=1)
    points_per_decade: int = Field(default=50, ge=1)

    out: str = Field(default_factory=default_output_root)
    workers: int = Field(default=1, ge=1)
    checkpoint_interval: float = Field(default=300.0, ge=0)
    resume: bool = False

    eps_window: tuple[float, float] | None = None
    dt_list: list[float] = Field(default_factory=list)
    dt_fit: float = Field(default=0.24, gt=0)
    floor_file: str | None = None
    floor_factor: float = Field(default=5.0, gt=0)
    n_mc: int = Field(default=100_000, ge=100_000)

    @field_validator("model")
    @classmethod
    def _known_model(cls, v: str) -> str:
        if v not in PRESET_NAMES:
            raise ValueError(f"unknown model {v!r}; choose from {', '.join(PRESET_NAMES)}")
        return v

    @field_validator("N")
    @classmethod
    def _chain_sizes(cls, v: list[int]) -> list[int]:
        if any(n < 4 for n in v):
            raise ValueError(f"every N must be >= 4, got {v}")
        return v

    @field_validator("eps", "dt_list")
    @classmethod
    def _positive(cls, v: list[float]) -> list[float]:
        if any(not (x > 0 and math.isfinite(x)) for x in v):
            raise ValueError(f"values must be positive and finite, got {v}")
        return v

    @model_validator(mode="after")
    def _consistency(self) -> ExperimentConfig:
        if self.eps_window is not None and not self.eps_window[0] < self.eps_window[1]:
            raise ValueError(f"eps_window must be increasing, got {self.eps_window}")
        if self.t_max_floor > self.t_max_cap:
            raise ValueError("t_max_floor exceeds t_max_cap")
        if self.t_max is not None and self.expected_chi is not None and self.t_max < 100.0 / self.expected_chi:
            logger.warning(
                "t_max shorter than 100 / expected chi",
                extra={"event": "t_max_short", "t": self.t_max, "plateau": self.expected_chi},
            )
        return self

    def overrides(self) -> dict[str, Any]:
        out = {k: getattr(self, k) for k in ("alpha", "beta", "gamma", "delta", "toda_c")}
        return {k: v for k, v in out.items() if v is not None}

    def build_model(self, n_springs: int) -> ModelSpec:
        try:
            return make_preset(self.model, n_springs, self.seed, self.boundary, self.overrides())
        except ModelError as exc:
            raise ConfigError(str(exc)) from exc

    def resolved_dt(self, eps: float) -> float:
        """Step for one grid point; gamma-T and pure-delta switch to the small step per eps."""
        if self.dt is not None:
            return self.dt
        if self.model in SMALL_DT_MODELS and eps < SMALL_DT_EPS:
            return SMALL_DT
        return DEFAULT_DT

    def point_hash(self, n_springs: int, eps: float, dt: float | None = None) -> str:
        """Hash of everything that determines the numbers of one (N, eps, dt) run."""
        payload = self.model_dump(mode="json", exclude=set(_NON_RESULT_KEYS) | {"N", "eps", "dt_list"})
        payload.update({"N": n_springs, "eps": eps, "dt": dt if dt is not None else self.resolved_dt(eps)})
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def read_config_file(path: str | Path) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a flat mapping of keys to values")
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"config {path} must be flat; nested sections {nested}")
    return data


def load_config(path: str | Path | None = None, flags: dict[str, Any] | None = None) -> ExperimentConfig:
    """File values, then non-None flags on top; validated before anything runs."""
    data: dict[str, Any] = read_config_file(path) if path else {}
    for key, value in (flags or {}).items():
        if value is not None:
            data[key] = value
    try:
        return ExperimentConfig(**data)
    except ValidationError as exc:
        raise ConfigError(f"invalid experiment config:\n{exc}") from exc
