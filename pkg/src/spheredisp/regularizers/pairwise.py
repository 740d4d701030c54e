"""Pairwise objectives: max-min (MM), KoLeo, hyperspherical energy (MHE) and
the log-mean-kernel uniformity loss (WI).

Everything is written in terms of the Gram matrix ``t_ij = <x_i, x_j>``, so the
Euclidean gradient of a loss with respect to ``x_i`` is ``sum_j dL/dt_ij * x_j``
and the Riemannian gradient is its tangent projection.
"""

from __future__ import annotations

import numpy as np

from ..geometry import tangent_project
from ..kernels import Kernel, _dcos, kernel_eval, mmd_constant
from .base import GradientBatch, check_config

DISTANCES = ("geodesic", "chordal", "squared-chordal")
_SIN_FLOOR = 1e-12


def distance_from_cos(t, distance: str):
    t = np.clip(t, -1.0, 1.0)
    if distance == "geodesic":
        return np.arccos(t)
    if distance == "chordal":
        return np.sqrt(np.clip(2.0 - 2.0 * t, 0.0, None))
    if distance == "squared-chordal":
        return 2.0 - 2.0 * t
    raise ValueError(f"unknown distance {distance!r}; expected one of {DISTANCES}")


def distance_dcos(t, distance: str):
    t = np.clip(t, -1.0, 1.0)
    if distance == "geodesic":
        return -1.0 / np.maximum(np.sqrt(1.0 - t * t), _SIN_FLOOR)
    if distance == "chordal":
        return -1.0 / np.maximum(np.sqrt(np.clip(2.0 - 2.0 * t, 0.0, None)), _SIN_FLOOR)
    if distance == "squared-chordal":
        return np.full_like(t, -2.0)
    raise ValueError(f"unknown distance {distance!r}; expected one of {DISTANCES}")


def nearest_neighbors(X, block: int = 2048):
    """Index of and cosine to each point's nearest neighbour (ties: lowest index)."""
    X = check_config(X, 2)
    n = X.shape[0]
    idx = np.empty(n, dtype=np.int64)
    cos = np.empty(n)
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        g = X[i0:i1] @ X.T
        g[np.arange(i1 - i0), np.arange(i0, i1)] = -np.inf
        j = np.argmax(g, axis=1)
        idx[i0:i1] = j
        cos[i0:i1] = g[np.arange(i1 - i0), j]
    return idx, np.clip(cos, -1.0, 1.0)


def loss_mm(X, distance: str = "geodesic") -> float:
    """``-(1/n) sum_i min_{j != i} d(x_i, x_j)``."""
    _, cos = nearest_neighbors(X)
    return float(-np.mean(distance_from_cos(cos, distance)))


def loss_koleo(X, distance: str = "geodesic") -> float:
    """``-(1/n) sum_i log min_{j != i} d(x_i, x_j)``; coincident points raise."""
    _, cos = nearest_neighbors(X)
    d = distance_from_cos(cos, distance)
    if np.any(d <= 0):
        raise ValueError("KoLeo loss undefined: configuration has coincident points")
    return float(-np.mean(np.log(d)))


def _gram(X):
    # unit rows: the diagonal is exactly 1 even when the product rounds below it
    G = np.clip(X @ X.T, -1.0, 1.0)
    np.fill_diagonal(G, 1.0)
    return G


def _offdiag_sum(K):
    # subtracting the trace would cancel catastrophically for singular kernels
    K = K.copy()
    np.fill_diagonal(K, 0.0)
    return K.sum()


def loss_mhe(X, kernel: Kernel, normalized: bool = True) -> float:
    """Mean kernel value over ordered pairs ``i != j``."""
    X = check_config(X, 2)
    n = X.shape[0]
    total = _offdiag_sum(kernel_eval(kernel, _gram(X)))
    return float(total / (n * (n - 1)) if normalized else total)


def loss_mmd_estimate(X, kernel: Kernel, m: int | None = None) -> float:
    """Unbiased estimate of MMD^2 between the configuration and the uniform measure.

    Equals the normalized energy minus the constant ``E[k(z, Y)]``.
    """
    X = check_config(X, 2)
    return loss_mhe(X, kernel) - mmd_constant(kernel, X.shape[1] if m is None else m)


def loss_wi(X, kernel: Kernel) -> float:
    """``log((1/n^2) sum_{i,j} k(x_i, x_j))``, diagonal included."""
    X = check_config(X, 1)
    n = X.shape[0]
    K = kernel_eval(kernel, _gram(X))
    return float(np.log(K.sum() / (n * n)))


def _mm_koleo_grad(X, distance: str, log: bool, euclidean: bool):
    n = X.shape[0]
    nn, cos = nearest_neighbors(X)
    d = distance_from_cos(cos, distance)
    dd = distance_dcos(cos, distance)
    if log:
        if np.any(d <= 0):
            raise ValueError("KoLeo loss undefined: configuration has coincident points")
        loss = -np.mean(np.log(d))
        coef = -dd / (d * n)
    else:
        loss = -np.mean(d)
        coef = -dd / n
    # d t_{i,nn(i)} / d x_i = x_nn(i), and / d x_nn(i) = x_i
    grad = coef[:, None] * X[nn]
    np.add.at(grad, nn, coef[:, None] * X)
    if not euclidean:
        grad = tangent_project(X, grad)
    return float(loss), grad


def _kernel_grad(X, kernel: Kernel, wi: bool, normalized: bool, euclidean: bool):
    n = X.shape[0]
    G = _gram(X)
    K = kernel_eval(kernel, G)
    D = _dcos(kernel, G)
    np.fill_diagonal(D, 0.0)
    if wi:
        total = K.sum()
        loss = np.log(total / (n * n))
        # the diagonal k(1) is constant on the sphere and contributes nothing
        grad = 2.0 * (D @ X) / total
    else:
        total = _offdiag_sum(K)
        scale = 1.0 / (n * (n - 1)) if normalized else 1.0
        loss = total * scale
        grad = 2.0 * scale * (D @ X)
    if not euclidean:
        grad = tangent_project(X, grad)
    return float(loss), grad


def pairwise_loss_and_grad(X, kind: str, distance: str | None = None, kernel: Kernel | None = None,
                           normalized: bool = True, euclidean: bool = False):
    """Loss and full-batch gradient (Riemannian unless ``euclidean``) for one pairwise kind."""
    X = check_config(X, 2)
    if kind == "mm":
        return _mm_koleo_grad(X, distance, log=False, euclidean=euclidean)
    if kind == "koleo":
        return _mm_koleo_grad(X, distance, log=True, euclidean=euclidean)
    if kind == "mhe":
        return _kernel_grad(X, kernel, wi=False, normalized=normalized, euclidean=euclidean)
    if kind == "wi":
        return _kernel_grad(X, kernel, wi=True, normalized=normalized, euclidean=euclidean)
    raise ValueError(f"not a pairwise regularizer: {kind!r}")


def grad_pairwise(X, kind: str, batch_indices=None, distance: str | None = None, kernel: Kernel | None = None,
                  normalized: bool = True, euclidean: bool = False):
    """Gradient of a pairwise loss restricted to the points in ``batch_indices``.

    The loss is evaluated on the sub-configuration alone, so a minibatch gives an
    estimate of the full objective at a fraction of the quadratic cost.
    Returns ``(loss, GradientBatch)``.
    """
    X = check_config(X, 2)
    idx = np.arange(X.shape[0]) if batch_indices is None else np.asarray(batch_indices, dtype=np.int64)
    loss, grad = pairwise_loss_and_grad(X[idx], kind, distance, kernel, normalized, euclidean)
    return loss, GradientBatch(idx, grad)
