"""CSV/JSON persistence; 17 significant digits so regression diffs are bit-exact."""

from __future__ import annotations

import json
import os
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from fpulyap.harness.schemas import RunSummary

FLOAT_FORMAT = "%.17g"


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _header(meta: Mapping[str, Any]) -> str:
    return "".join(f"# {k}={meta[k]}\n" for k in sorted(meta))


def write_csv(path: str | Path, df: pd.DataFrame, meta: Mapping[str, Any] | None = None) -> Path:
    """CSV with optional ``# key=value`` header lines (read back with comment='#')."""
    path = Path(path)
    body = df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    _atomic_write_text(path, (_header(meta) if meta else "") + body)
    return path


def read_csv(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#", float_precision="round_trip")


def series_frame(times: np.ndarray, chi_hat: np.ndarray) -> pd.DataFrame:
    """Long format: one row per (trajectory, t)."""
    n_traj, n_t = chi_hat.shape
    return pd.DataFrame(
        {
            "trajectory": np.repeat(np.arange(n_traj), n_t),
            "t": np.tile(times, n_traj),
            "chi_hat": chi_hat.reshape(-1),
        }
    )


def ensemble_frame(times: np.ndarray, chi_bar: np.ndarray, spread: np.ndarray, n: int) -> pd.DataFrame:
    return pd.DataFrame({"t": times, "chi_bar": chi_bar, "sigma": spread, "n": np.full(len(times), n)})


def write_json(path: str | Path, payload: Any) -> Path:
    path = Path(path)
    _atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n")
    return path


def read_json(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def point_dir(root: str | Path, model: str, n_springs: int, eps: float, dt: float | None = None) -> Path:
    """One directory per (model, N, eps[, dt])."""
    name = f"N{n_springs}_eps{eps!r}"
    if dt is not None:
        name += f"_dt{dt!r}"
    return Path(root) / model / name


def collect_summaries(root: str | Path) -> list[RunSummary]:
    """Every summary.json below ``root``, in a stable order."""
    found = sorted(Path(root).rglob("summary.json"))
    return [RunSummary(**read_json(p)) for p in found]


def summaries_frame(summaries: Sequence[RunSummary]) -> pd.DataFrame:
    rows = [s.model_dump() for s in summaries]
    df = pd.DataFrame(rows)
    if not df.empty:
        df = df.sort_values(["model", "N", "dt", "eps"], kind="stable").reset_index(drop=True)
    return df
