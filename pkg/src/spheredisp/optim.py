"""First-order optimizers on the product of ``n`` spheres.

``rsgd`` and ``radam`` follow Riemannian gradients and retract; ``projected-adam``
is the Euclidean baseline: plain Adam in R^m followed by renormalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import repair_norm, retract, tangent_project
from .regularizers.base import GradientBatch

METHODS = ("rsgd", "radam", "projected-adam")


class NonTangentGradientError(ValueError):
    pass


class ProjectionAtOriginError(ValueError):
    pass


@dataclass
class OptimizerState:
    method: str = "radam"
    lr: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    retraction: str = "exp"
    per_coordinate: bool = False
    step_count: int = 0
    m1: np.ndarray | None = None
    m2: np.ndarray | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown optimizer {self.method!r}; expected one of {METHODS}")
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        b1, b2 = self.betas
        if not (0 < b1 < 1 and 0 < b2 < 1):
            raise ValueError(f"betas must lie in (0, 1), got {self.betas}")
        if self.retraction not in ("exp", "proj"):
            raise ValueError(f"retraction must be 'exp' or 'proj', got {self.retraction!r}")


def _check_tangent(X, idx, tangents):
    base = X[idx]
    radial = np.abs(np.sum(base * tangents, axis=1))
    tol = 1e-8 * (1.0 + np.linalg.norm(tangents, axis=1))
    if np.any(radial > tol):
        worst = int(np.argmax(radial - tol))
        raise NonTangentGradientError(
            f"gradient for point {int(idx[worst])} is not tangent: <x, g> = {radial[worst]:.3e}"
        )


def step_rsgd(X, grads: GradientBatch, state: OptimizerState) -> np.ndarray:
    """``x_i <- retr(x_i, -lr g_i)`` for the indices in ``grads``; others untouched."""
    X = np.array(X, dtype=float, copy=True)
    _check_tangent(X, grads.indices, grads.tangents)
    X[grads.indices] = retract(X[grads.indices], -state.lr * grads.tangents, state.retraction)
    state.step_count += 1
    return X


def step_radam(X, grads: GradientBatch, state: OptimizerState) -> np.ndarray:
    """Riemannian Adam step.

    First moments are tangent vectors, re-projected onto the new tangent space
    after the retraction. Second moments are per-point squared tangent norms
    (``per_coordinate=True`` switches to coordinate-wise accumulators).
    Points outside the gradient batch see a zero gradient, as with a dense
    parameter tensor.
    """
    X = np.asarray(X, dtype=float)
    _check_tangent(X, grads.indices, grads.tangents)
    n = X.shape[0]
    g = grads.dense(n)
    b1, b2 = state.betas
    if state.m1 is None:
        state.m1 = np.zeros_like(X)
        state.m2 = np.zeros_like(X) if state.per_coordinate else np.zeros((n, 1))
    state.step_count += 1
    t = state.step_count
    state.m1 = b1 * state.m1 + (1.0 - b1) * g
    sq = g * g if state.per_coordinate else np.sum(g * g, axis=1, keepdims=True)
    state.m2 = b2 * state.m2 + (1.0 - b2) * sq
    m1_hat = state.m1 / (1.0 - b1**t)
    m2_hat = state.m2 / (1.0 - b2**t)
    direction = m1_hat / (np.sqrt(m2_hat) + state.eps)
    if state.per_coordinate:
        direction = tangent_project(X, direction)
    X_new = retract(X, -state.lr * direction, state.retraction)
    state.m1 = tangent_project(X_new, state.m1)
    return X_new


def step_projected_adam(X, euclid_grads: GradientBatch, state: OptimizerState) -> np.ndarray:
    """Euclidean Adam in R^m followed by projection back onto the sphere."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    g = euclid_grads.dense(n)
    b1, b2 = state.betas
    if state.m1 is None:
        state.m1 = np.zeros_like(X)
        state.m2 = np.zeros_like(X)
    state.step_count += 1
    t = state.step_count
    state.m1 = b1 * state.m1 + (1.0 - b1) * g
    state.m2 = b2 * state.m2 + (1.0 - b2) * g * g
    m1_hat = state.m1 / (1.0 - b1**t)
    m2_hat = state.m2 / (1.0 - b2**t)
    Y = X - state.lr * m1_hat / (np.sqrt(m2_hat) + state.eps)
    norms = np.linalg.norm(Y, axis=1, keepdims=True)
    if np.any(norms <= 1e-12):
        raise ProjectionAtOriginError("an iterate reached the origin; projection onto the sphere is undefined")
    return repair_norm(Y / norms)


def step(X, grads: GradientBatch, state: OptimizerState) -> np.ndarray:
    if state.method == "rsgd":
        return step_rsgd(X, grads, state)
    if state.method == "radam":
        return step_radam(X, grads, state)
    return step_projected_adam(X, grads, state)


def uses_euclidean_gradients(state: OptimizerState) -> bool:
    return state.method == "projected-adam"
