"""
Versioned, checksummed trajectory checkpoints.

One .npz per trajectory holding the phase point, the tangent, the accumulated log
norms, the samples so far and a JSON metadata string. The sha256 checksum covers
every array and the metadata. Files are written to a temporary name and renamed.
"""

from __future__ import annotations

import hashlib
import json
import os
import zipfile
from pathlib import Path
from typing import Any

import numpy as np

from fpulyap.utils.errors import CheckpointError
from fpulyap.utils.logging_config import get_logger

logger = get_logger(__name__)

FORMAT_NAME = "fpulyap-checkpoint"
FORMAT_VERSION = 1
_ARRAY_KEYS = ("q", "p", "dq", "dp", "chi_hat")


def _digest(arrays: dict[str, np.ndarray], meta_json: str) -> str:
    h = hashlib.sha256()
    for key in _ARRAY_KEYS:
        arr = np.ascontiguousarray(arrays[key], dtype=np.float64)
        h.update(key.encode())
        h.update(str(arr.shape).encode())
        h.update(arr.tobytes())
    h.update(meta_json.encode())
    return h.hexdigest()


def checkpoint_write(
    path: str | Path,
    snapshot: dict[str, Any],
    meta: dict[str, Any] | None = None,
    rng_state: dict[str, Any] | None = None,
) -> Path:
    """Persist a Benettin snapshot (see ``BenettinRun.snapshot``) atomically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    full_meta = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "steps": int(snapshot["steps"]),
        "log_accum": float(snapshot["log_accum"]).hex(),
        "rng_state": rng_state,
        **(meta or {}),
    }
    meta_json = json.dumps(full_meta, sort_keys=True, default=int)
    arrays = {k: np.asarray(snapshot[k], dtype=np.float64) for k in _ARRAY_KEYS}
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        np.savez(fh, meta=np.array(meta_json), checksum=np.array(_digest(arrays, meta_json)), **arrays)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
    logger.debug("checkpoint written", extra={"event": "checkpoint_written", "path": str(path), "step": full_meta["steps"]})
    return path


def checkpoint_read(path: str | Path) -> tuple[dict[str, Any], dict[str, Any]]:
    """Return (snapshot, meta); corrupt, tampered or foreign-version files raise CheckpointError."""
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as data:
            arrays = {k: np.array(data[k], dtype=np.float64) for k in _ARRAY_KEYS}
            meta_json = str(data["meta"][()])
            checksum = str(data["checksum"][()])
    except (OSError, KeyError, ValueError, zipfile.BadZipFile) as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc

    if _digest(arrays, meta_json) != checksum:
        raise CheckpointError(f"checkpoint {path} failed its checksum")
    try:
        meta = json.loads(meta_json)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint {path} has malformed metadata") from exc
    if meta.get("format") != FORMAT_NAME or meta.get("version") != FORMAT_VERSION:
        raise CheckpointError(
            f"checkpoint {path} has format {meta.get('format')!r} v{meta.get('version')}, "
            f"expected {FORMAT_NAME!r} v{FORMAT_VERSION}"
        )
    snapshot = {
        **arrays,
        "steps": int(meta["steps"]),
        "log_accum": float.fromhex(meta["log_accum"]),
    }
    return snapshot, meta
