#!/usr/bin/env python3
"""
fpulyap command line.

Usage:
    fpulyap run --config config/experiment.yaml --N 128 --eps 1e-2
    fpulyap sweep --config config/experiment.yaml --resume
    fpulyap theory --model pure-beta --N 512 --eps 1e-4 1e-3 1e-2
    fpulyap fit --out results --eps-window 0 2e-2
    fpulyap toda-check --config config/toda_check.yaml

Environment Variables:
    FPULYAP_OUTPUT_ROOT: default output root (default: ./results)
    FPULYAP_LOG_LEVEL: log level (default: INFO)
    FPULYAP_LOG_DIR: directory of the rotating JSON log (default: ./logs)

Exit codes: 0 success, 2 configuration error, 3 compute error,
4 results flagged (no plateau, or plateau under the integrator error floor).
"""

from __future__ import annotations

import argparse
import sys
from typing import Any

from dotenv import load_dotenv

from fpulyap.harness.config import ExperimentConfig, load_config
from fpulyap.harness.runner import any_flagged, fit_results, run_point, sweep, theory_table
from fpulyap.harness.toda_check import run_toda_check
from fpulyap.utils.errors import ConfigError, FpuLyapError
from fpulyap.utils.logging_config import get_logger

logger = get_logger("fpulyap.cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3
EXIT_FLAGGED = 4

# argparse dest -> config key
_FLAG_KEYS = {
    "model": "model",
    "N": "N",
    "eps": "eps",
    "dt": "dt",
    "t_max": "t_max",
    "ensemble": "ensemble",
    "seed": "seed",
    "out": "out",
    "workers": "workers",
    "eps_window": "eps_window",
    "dt_list": "dt_list",
    "n_mc": "n_mc",
    "floor_file": "floor_file",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat YAML experiment file")
    p.add_argument("--model", help="model preset name")
    p.add_argument("--N", type=int, nargs="+", help="numbers of springs")
    p.add_argument("--eps", type=float, nargs="+", help="specific energies")
    p.add_argument("--dt", type=float, help="time step (default per model)")
    p.add_argument("--t-max", dest="t_max", type=float, help="integration time (default: t_max rule)")
    p.add_argument("--ensemble", type=int, help="trajectories per ensemble")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output root")
    p.add_argument("--workers", type=int, help="parallel trajectory workers")
    p.add_argument("--resume", action="store_true", default=None, help="continue partial trajectories")
    p.add_argument("--eps-window", dest="eps_window", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--dt-list", dest="dt_list", type=float, nargs="+", help="toda-check step sizes")
    p.add_argument("--n-mc", dest="n_mc", type=int, help="Monte Carlo samples for theory")
    p.add_argument("--floor-file", dest="floor_file", help="toda_check.csv used by the error-floor guard")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpulyap", description="Maximal Lyapunov exponents of FPU-type chains")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "one (model, N, eps) ensemble"),
        ("sweep", "Cartesian product of N and eps, resumable"),
        ("theory", "curvature-fluctuation curves over an eps grid"),
        ("fit", "power-law fits over a results directory"),
        ("toda-check", "spurious exponent of the Toda chain vs dt and eps"),
    ):
        _add_common(sub.add_parser(name, help=help_text))
    return parser


def _flags(args: argparse.Namespace) -> dict[str, Any]:
    flags = {key: getattr(args, dest) for dest, key in _FLAG_KEYS.items()}
    flags["resume"] = args.resume
    if args.command == "fit" and args.config is None:
        # fit reads whatever is under --out; model and grid are placeholders
        flags.update(model=flags["model"] or "linear", N=flags["N"] or [4], eps=flags["eps"] or [1.0])
    return flags


def _dispatch(command: str, cfg: ExperimentConfig) -> int:
    if command == "run":
        if len(cfg.N) != 1 or len(cfg.eps) != 1:
            raise ConfigError("run takes exactly one N and one eps; use sweep for grids")
        summary = run_point(cfg, cfg.N[0], cfg.eps[0])
        logger.info("run summary", extra={"event": "summary", **summary.model_dump(mode="json")})
        return EXIT_FLAGGED if summary.flagged else EXIT_OK
    if command == "sweep":
        summaries = sweep(cfg)
        return EXIT_FLAGGED if any_flagged(summaries) else EXIT_OK
    if command == "theory":
        for n in cfg.N:
            theory_table(cfg, n)
        return EXIT_OK
    if command == "fit":
        fit_results(cfg.out, cfg.eps_window)
        return EXIT_OK
    if command == "toda-check":
        run_toda_check(cfg)
        return EXIT_OK
    raise ConfigError(f"unknown command {command!r}")


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, _flags(args))
    except ConfigError as exc:
        logger.error("configuration error", extra={"event": "config_error", "error": str(exc)})
        return EXIT_CONFIG
    try:
        return _dispatch(args.command, cfg)
    except ConfigError as exc:
        logger.error("configuration error", extra={"event": "config_error", "error": str(exc)})
        return EXIT_CONFIG
    except FpuLyapError as exc:
        logger.error("computation failed", extra={"event": "compute_error", "error": str(exc)})
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
