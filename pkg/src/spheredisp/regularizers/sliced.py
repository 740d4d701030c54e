"""Sliced objectives: project every point onto random great circles and compare
the 1-d angular configuration to a perfectly dispersed one (Sliced) or to the
uniform measure in Wasserstein-2 (SSW).

Circles are passed as stacked arrays ``P, Q`` of shape ``(k, m)``. Sorting is
piecewise constant, so gradients treat the sort permutation (and the optimal
rotation) as fixed at the evaluation point.
"""

from __future__ import annotations

import numpy as np

from .base import GradientBatch, check_config

CLIP_MAX = 1e3
POLE_TOL = 1e-24


def dispersed_offsets(n: int) -> np.ndarray:
    """Zero-mean equispaced angles ``-pi (n+1)/n + 2 pi k / n`` for ``k = 1..n``."""
    k = np.arange(1, n + 1)
    return -np.pi * (n + 1) / n + 2.0 * np.pi * k / n


def project_circular_dispersed(thetas):
    """Closest perfectly-dispersed configuration to ``thetas`` in squared distance.

    Returns ``(theta_hat, tau)``: the point of rank ``r`` is sent to
    ``tau + offsets[r]`` and ``tau`` is the mean angle. Works along the last
    axis, so a ``(k, n)`` array handles ``k`` circles at once.
    """
    thetas = np.asarray(thetas, dtype=float)
    n = thetas.shape[-1]
    if n < 1:
        raise ValueError("need at least one angle")
    tau = thetas.mean(axis=-1)
    ranks = np.argsort(np.argsort(thetas, axis=-1, kind="stable"), axis=-1, kind="stable")
    theta_hat = tau[..., None] + dispersed_offsets(n)[ranks]
    return theta_hat, tau


def _project(X, P, Q):
    a = X @ P.T
    b = X @ Q.T
    r2 = a * a + b * b
    degenerate = r2 < POLE_TOL
    theta = np.where(degenerate, 0.0, np.arctan2(b, a))
    theta = np.where(theta >= np.pi, theta - 2.0 * np.pi, theta)
    return a.T, b.T, r2.T, theta.T, degenerate.T


def _as_circles(P, Q):
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if P.shape != Q.shape or P.shape[0] == 0:
        raise ValueError("need a nonempty, matching set of circle directions P and Q")
    return P, Q


def sliced_distances(X, P, Q) -> np.ndarray:
    """Per-circle ``sum_i 0.5 (theta_i - theta_hat_i)^2``; shape ``(k,)``."""
    X = check_config(X)
    P, Q = _as_circles(P, Q)
    _, _, _, theta, _ = _project(X, P, Q)
    theta_hat, _ = project_circular_dispersed(theta)
    return 0.5 * np.sum((theta - theta_hat) ** 2, axis=-1)


def loss_sliced(X, P, Q) -> float:
    return float(np.mean(sliced_distances(X, P, Q)))


def _chain_to_points(X, P, Q, a, b, r2, degenerate, dtheta, clip_max):
    """Sum over circles of ``dtheta * d theta / d x`` with per-contribution clipping."""
    k, n = dtheta.shape
    safe = np.where(degenerate, 1.0, r2)
    scale = np.where(degenerate, 0.0, dtheta / safe)  # (k, n)
    # contribution_c,i = scale_c,i * (a_c,i q_c - b_c,i p_c)
    sa = scale * a
    sb = scale * b
    # norm of (a q - b p) is sqrt(a^2 + b^2) because p, q are orthonormal
    norms = np.abs(scale) * np.sqrt(np.where(degenerate, 0.0, r2))
    over = norms > clip_max
    if np.any(over):
        shrink = np.where(over, clip_max / np.where(over, norms, 1.0), 1.0)
        sa = sa * shrink
        sb = sb * shrink
    grad = sa.T @ Q - sb.T @ P
    return grad, int(degenerate.sum()), int(over.sum())


def grad_sliced(X, P, Q, clip_max: float = CLIP_MAX):
    """Loss and gradient of the sliced dispersion objective averaged over circles.

    The gradient is already tangent (Euclidean and Riemannian gradients coincide).
    Returns ``(loss, GradientBatch)``.
    """
    X = check_config(X)
    P, Q = _as_circles(P, Q)
    k = P.shape[0]
    a, b, r2, theta, degenerate = _project(X, P, Q)
    theta_hat, _ = project_circular_dispersed(theta)
    diff = theta - theta_hat
    loss = float(np.mean(0.5 * np.sum(diff * diff, axis=-1)))
    grad, n_pole, n_clip = _chain_to_points(X, P, Q, a, b, r2, degenerate, diff, clip_max)
    return loss, GradientBatch.full(grad / k, pole=n_pole, clipped=n_clip)


def circle_w2_uniform(u) -> np.ndarray:
    """Squared Wasserstein-2 distance between the empirical measure of ``u`` and
    the uniform measure on the circle of circumference 1.

    ``u`` holds coordinates in [0, 1) along the last axis (any order).
    """
    u = np.sort(np.asarray(u, dtype=float), axis=-1)
    n = u.shape[-1]
    i = np.arange(1, n + 1)
    mean = u.mean(axis=-1)
    return np.mean(u * u, axis=-1) - mean**2 + (u * (n + 1 - 2 * i)).sum(axis=-1) / n**2 + 1.0 / 12.0


def _ssw_unit_coords(theta):
    return (theta + np.pi) / (2.0 * np.pi)


def ssw_distances(X, P, Q) -> np.ndarray:
    X = check_config(X)
    P, Q = _as_circles(P, Q)
    _, _, _, theta, _ = _project(X, P, Q)
    return circle_w2_uniform(_ssw_unit_coords(theta))


def loss_ssw(X, P, Q) -> float:
    return float(np.mean(ssw_distances(X, P, Q)))


def grad_ssw(X, P, Q, clip_max: float = CLIP_MAX):
    """Loss and gradient of the spherical sliced Wasserstein distance to uniform."""
    X = check_config(X)
    P, Q = _as_circles(P, Q)
    k = P.shape[0]
    a, b, r2, theta, degenerate = _project(X, P, Q)
    u = _ssw_unit_coords(theta)
    n = u.shape[-1]
    order = np.argsort(u, axis=-1, kind="stable")
    ranks = np.argsort(order, axis=-1, kind="stable") + 1
    loss = float(np.mean(circle_w2_uniform(u)))
    du = 2.0 * (u - u.mean(axis=-1, keepdims=True)) / n + (n + 1 - 2 * ranks) / n**2
    dtheta = du / (2.0 * np.pi)
    grad, n_pole, n_clip = _chain_to_points(X, P, Q, a, b, r2, degenerate, dtheta, clip_max)
    return loss, GradientBatch.full(grad / k, pole=n_pole, clipped=n_clip)
