"""Benchmark harness: observation synthesis, experiment sweeps, CSV, CLI."""

from .experiment import (
    ExperimentConfig,
    ExperimentRow,
    default_image_path,
    run_experiment,
    shrink_to,
)
from .metrics import compare_criterion, generate_observation, snr_db
from .pgm import PgmError, load_pgm, save_pgm
from .validate import prox_oracle_suite, selftest

__all__ = [
    "ExperimentConfig",
    "ExperimentRow",
    "PgmError",
    "compare_criterion",
    "default_image_path",
    "generate_observation",
    "load_pgm",
    "prox_oracle_suite",
    "run_experiment",
    "save_pgm",
    "selftest",
    "shrink_to",
    "snr_db",
]
