"""Experiment harness: configs, runners, CSV traces and the ``disperse`` CLI."""

from .config import EXPERIMENTS, ConfigError, ExperimentConfig
from .experiments import (
    optimize,
    run,
    run_ablation_opt,
    run_sliced_convergence,
    run_synthetic,
    run_tammes,
)
from .io import TraceRow, emit_csv, read_csv

__all__ = [
    "EXPERIMENTS",
    "ConfigError",
    "ExperimentConfig",
    "TraceRow",
    "emit_csv",
    "optimize",
    "read_csv",
    "run",
    "run_ablation_opt",
    "run_sliced_convergence",
    "run_synthetic",
    "run_tammes",
]
