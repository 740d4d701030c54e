"""Stochastic Lloyd quantization of the uniform measure.

Each step draws uniform samples, assigns them to their nearest center
(Voronoi cell) and pulls every assigned center toward its samples along
the sphere. Unassigned centers receive a zero gradient.
"""

from __future__ import annotations

import numpy as np

from ..geometry import ANTIPODAL_TOL
from .base import GradientBatch, check_config


def assign(X, samples):
    """Nearest center for each sample (ties: lowest index) and the cosine to it."""
    cos = np.asarray(samples, dtype=float) @ np.asarray(X, dtype=float).T
    idx = np.argmax(cos, axis=1)
    return idx, np.clip(cos[np.arange(cos.shape[0]), idx], -1.0, 1.0)


def loss_lloyd(X, samples) -> float:
    """Mean over samples of ``min_j 0.5 * d(y, x_j)^2`` with geodesic ``d``."""
    X = check_config(X)
    samples = check_config(samples)
    if samples.shape[0] == 0:
        raise ValueError("Lloyd loss needs at least one sample")
    _, cos = assign(X, samples)
    return float(np.mean(0.5 * np.arccos(cos) ** 2))


def grad_lloyd(X, samples, euclidean: bool = False) -> GradientBatch:
    """Stochastic gradient of :func:`loss_lloyd`.

    Center ``i`` receives ``-(1/S) sum_{y in cell i} Log_{x_i}(y)``. Antipodal
    sample/center pairs (measure zero) are skipped and counted.
    With ``euclidean=True`` the ambient gradient ``-theta/sin(theta) * y`` is
    used per sample instead of the log map.
    """
    X = check_config(X)
    samples = check_config(samples)
    S = samples.shape[0]
    if S == 0:
        raise ValueError("Lloyd gradient needs at least one sample")
    idx, cos = assign(X, samples)
    theta = np.arccos(cos)
    keep = theta <= np.pi - ANTIPODAL_TOL
    skipped = int(S - keep.sum())
    idx, cos, theta, Y = idx[keep], cos[keep], theta[keep], samples[keep]
    sin = np.sqrt(np.clip(1.0 - cos * cos, 0.0, None))
    ratio = np.where(sin > 1e-15, theta / np.where(sin > 1e-15, sin, 1.0), 1.0)
    if euclidean:
        contrib = -ratio[:, None] * Y
    else:
        # Log_x(y) = theta / sin(theta) * (y - cos(theta) x)
        contrib = -ratio[:, None] * (Y - cos[:, None] * X[idx])
    grad = np.zeros_like(X)
    np.add.at(grad, idx, contrib)
    return GradientBatch.full(grad / S, skipped_antipodal=skipped)
