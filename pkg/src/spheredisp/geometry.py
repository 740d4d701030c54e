"""Geometry of the unit hypersphere S^{m-1} embedded in R^m.

All functions operate on numpy arrays whose last axis holds the ambient
coordinates, so a single point has shape ``(m,)`` and a configuration of
``n`` points has shape ``(n, m)``. Batched inputs broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import as_generator

NORM_REPAIR_TOL = 1e-12
ANTIPODAL_TOL = 1e-6
POLE_TOL = 1e-24


class DimensionMismatchError(ValueError):
    pass


class AntipodalError(ValueError):
    """Raised by :func:`log_map` when the direction toward ``y`` is not unique."""

    code = "antipodal"


class DegenerateRetractionError(ValueError):
    pass


@dataclass(frozen=True)
class GreatCircle:
    """Orthonormal pair ``(p, q)`` spanning a 2-plane; the circle is
    ``cos(theta) p + sin(theta) q``."""

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if p.shape != q.shape or p.ndim != 1:
            raise DimensionMismatchError(f"p and q must be vectors of equal length, got {p.shape} and {q.shape}")
        if abs(np.linalg.norm(p) - 1) > 1e-9 or abs(np.linalg.norm(q) - 1) > 1e-9:
            raise ValueError("p and q must be unit vectors")
        if abs(p @ q) > 1e-8:
            raise ValueError(f"p and q must be orthogonal, <p,q> = {p @ q:.3e}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def dim(self) -> int:
        return self.p.shape[0]

    def embed(self, theta):
        theta = np.asarray(theta, dtype=float)[..., None]
        return np.cos(theta) * self.p + np.sin(theta) * self.q


def _check_same_dim(x, y):
    if x.shape[-1] != y.shape[-1]:
        raise DimensionMismatchError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")


def normalize(x, axis=-1):
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x, axis=axis, keepdims=True)


def repair_norm(x):
    """Renormalize rows whose norm drifted by more than 1e-12."""
    x = np.asarray(x, dtype=float)
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    drift = np.abs(norms - 1.0) > NORM_REPAIR_TOL
    if np.any(drift):
        x = np.where(drift, x / norms, x)
    return x


def inner(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same_dim(x, y)
    return np.sum(x * y, axis=-1)


def geodesic_distance(x, y):
    """Arc length ``arccos(<x, y>)`` in radians, in ``[0, pi]``.

    Evaluated as ``2 atan2(|x - y|, |x + y|)``, which equals the clamped arccos
    for unit inputs but keeps full precision for nearly equal or antipodal points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same_dim(x, y)
    return 2.0 * np.arctan2(np.linalg.norm(x - y, axis=-1), np.linalg.norm(x + y, axis=-1))


def chordal_distance(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same_dim(x, y)
    return np.linalg.norm(x - y, axis=-1)


def tangent_project(x, g):
    """Riemannian projection ``(I - x x^T) g`` onto the tangent space at ``x``."""
    x = np.asarray(x, dtype=float)
    g = np.asarray(g, dtype=float)
    _check_same_dim(x, g)
    return g - np.sum(x * g, axis=-1, keepdims=True) * x


def retract_exp(x, v):
    """Exponential map: follow the great circle from ``x`` with initial velocity ``v``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_same_dim(x, v)
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    small = norm < 1e-12
    safe = np.where(small, 1.0, norm)
    y = np.cos(norm) * x + np.sin(norm) * v / safe
    y = np.where(small, x, y)
    return repair_norm(y)


def retract_proj(x, v):
    """Projection retraction ``(x + v) / ||x + v||``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_same_dim(x, v)
    y = x + v
    norm = np.linalg.norm(y, axis=-1, keepdims=True)
    if np.any(norm <= 1e-12):
        raise DegenerateRetractionError("projection retraction undefined: x + v is at the origin")
    return repair_norm(y / norm)


RETRACTIONS = {"exp": retract_exp, "proj": retract_proj}


def retract(x, v, method: str = "exp"):
    try:
        fn = RETRACTIONS[method]
    except KeyError:
        raise ValueError(f"unknown retraction {method!r}; expected one of {sorted(RETRACTIONS)}") from None
    return fn(x, v)


def log_map(x, y):
    """Inverse of :func:`retract_exp`: the tangent vector at ``x`` pointing to ``y``
    with length equal to their geodesic distance.

    Raises :class:`AntipodalError` when ``y`` is within 1e-6 rad of ``-x``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same_dim(x, y)
    t = np.clip(np.sum(x * y, axis=-1, keepdims=True), -1.0, 1.0)
    u = y - t * x
    unorm = np.linalg.norm(u, axis=-1, keepdims=True)
    # atan2 keeps full relative precision for nearby points, unlike arccos
    dist = np.arctan2(unorm, t)
    if np.any(dist > np.pi - ANTIPODAL_TOL):
        raise AntipodalError("log map undefined for (near-)antipodal points")
    small = unorm < 1e-15
    scale = np.where(small, 1.0, dist / np.where(small, 1.0, unorm))
    return np.where(small, 0.0, u * scale)


def project_great_circle(x, circle: GreatCircle, return_degenerate: bool = False):
    """Angle of the point on ``circle`` nearest to ``x`` (geodesically or chordally).

    Points orthogonal to the circle's plane have no unique projection; they get
    angle 0 and, with ``return_degenerate=True``, a True flag.
    """
    x = np.asarray(x, dtype=float)
    _check_same_dim(x, circle.p)
    a = x @ circle.p
    b = x @ circle.q
    degenerate = a * a + b * b < POLE_TOL
    theta = np.where(degenerate, 0.0, np.arctan2(b, a))
    # arctan2 can return +pi; the angle chart is [-pi, pi)
    theta = np.where(theta >= np.pi, theta - 2 * np.pi, theta)
    if return_degenerate:
        return theta, degenerate
    return theta


def sample_uniform(n: int, m: int, rng=None) -> np.ndarray:
    """``n`` i.i.d. uniform points on S^{m-1} (normalized standard Gaussians)."""
    if n < 1 or m < 2:
        raise ValueError(f"need n >= 1 and m >= 2, got n={n}, m={m}")
    rng = as_generator(rng)
    z = rng.standard_normal((n, m))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    # a zero Gaussian vector has probability zero, but resample rather than divide by it
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        z[bad] = rng.standard_normal((int(bad.sum()), m))
        norms = np.linalg.norm(z, axis=1, keepdims=True)
    return z / norms


def sample_power_spherical(n: int, m: int, mu, kappa: float, rng=None) -> np.ndarray:
    """Power spherical samples with density proportional to ``(1 + <mu, x>)**kappa``.

    Exact sampler: draw the cosine to ``mu`` from its Beta marginal, attach a
    uniform direction in the orthogonal complement of ``e_1``, and reflect
    ``e_1`` onto ``mu`` with a Householder map.
    """
    if kappa < 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    if n < 1 or m < 2:
        raise ValueError(f"need n >= 1 and m >= 2, got n={n}, m={m}")
    mu = normalize(np.asarray(mu, dtype=float))
    if mu.shape != (m,):
        raise DimensionMismatchError(f"mu has shape {mu.shape}, expected ({m},)")
    rng = as_generator(rng)
    half = (m - 1) / 2.0
    t = 2.0 * rng.beta(half + kappa, half, size=n) - 1.0
    v = sample_uniform(n, m - 1, rng) if m > 2 else rng.choice([-1.0, 1.0], size=(n, 1))
    y = np.concatenate([t[:, None], np.sqrt(np.clip(1.0 - t * t, 0.0, None))[:, None] * v], axis=1)
    e1 = np.zeros(m)
    e1[0] = 1.0
    u = e1 - mu
    unorm = np.linalg.norm(u)
    if unorm > 1e-12:
        u = u / unorm
        y = y - 2.0 * np.outer(y @ u, u)
    return repair_norm(y)


CIRCLE_MODES = ("uniform", "axis")


def sample_great_circles(k: int, m: int, mode: str = "uniform", rng=None) -> tuple[np.ndarray, np.ndarray]:
    """``k`` random great circles as stacked ``(P, Q)`` arrays of shape ``(k, m)``.

    ``uniform`` orthogonalizes two standard Gaussian vectors; ``axis`` picks
    ``p = e_i, q = e_j`` with ``i != j`` drawn without replacement.
    """
    if m < 2:
        raise ValueError(f"need m >= 2, got {m}")
    rng = as_generator(rng)
    if mode == "uniform":
        g = rng.standard_normal((k, 2, m))
        p = normalize(g[:, 0])
        q = g[:, 1] - np.sum(g[:, 1] * p, axis=1, keepdims=True) * p
        q = normalize(q)
        # one re-orthogonalization pass tightens <p, q> to ~1e-16
        q = normalize(q - np.sum(q * p, axis=1, keepdims=True) * p)
        return p, q
    if mode in ("axis", "axis-aligned"):
        idx = np.array([rng.choice(m, size=2, replace=False) for _ in range(k)]).reshape(k, 2)
        eye = np.eye(m)
        return eye[idx[:, 0]], eye[idx[:, 1]]
    raise ValueError(f"unknown circle mode {mode!r}; expected 'uniform' or 'axis'")


def sample_great_circle(m: int, mode: str = "uniform", rng=None) -> GreatCircle:
    p, q = sample_great_circles(1, m, mode, rng)
    return GreatCircle(p[0], q[0])


def random_rotation(m: int, rng=None) -> np.ndarray:
    """Haar-distributed orthogonal matrix."""
    rng = as_generator(rng)
    a = rng.standard_normal((m, m))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))
