"""Dispersing points on the hypersphere: geometry, kernels, regularizers and optimizers."""

from .geometry import GreatCircle, log_map, project_great_circle, retract, sample_power_spherical, sample_uniform
from .kernels import Kernel, mmd_constant
from .metrics import dispersion_report, min_geodesic_distance, spherical_variance
from .optim import OptimizerState, step
from .regularizers import Regularizer, parse_regularizer

__version__ = "0.1.0"

__all__ = [
    "GreatCircle",
    "Kernel",
    "OptimizerState",
    "Regularizer",
    "dispersion_report",
    "log_map",
    "min_geodesic_distance",
    "mmd_constant",
    "parse_regularizer",
    "project_great_circle",
    "retract",
    "sample_power_spherical",
    "sample_uniform",
    "spherical_variance",
    "step",
]
