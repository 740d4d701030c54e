"""Rotation-invariant kernels on the sphere, written as functions of the cosine
``t = <x, y>``.

Families: RBF, Laplace and Riesz, each with geodesic (``arccos t``) or chordal
(``sqrt(2 - 2t)``) distance. RBF-chordal uses the ambient-space form
``exp(gamma * t)``, which equals ``exp(-gamma/2 * ||x - y||^2)`` up to a constant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

RIESZ_EPS = 1e-7

FAMILIES = ("rbf", "laplace", "riesz")
METRICS = ("geodesic", "chordal")
_METRIC_ALIASES = {"geodesic": "geodesic", "s": "geodesic", "chordal": "chordal", "euclidean": "chordal", "r": "chordal"}

# (conditionally) positive definite status per family/metric
POSITIVE_DEFINITE = {
    ("rbf", "chordal"): "yes",
    ("rbf", "geodesic"): "no",
    ("laplace", "chordal"): "yes",
    ("laplace", "geodesic"): "yes",
    ("riesz", "geodesic"): "conditionally, for s < m - 1",
    ("riesz", "chordal"): "conditionally, for s < m - 1",
}


class NotIntegrableError(ValueError):
    pass


class RBFGeodesicWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Kernel:
    family: str
    metric: str
    param: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        metric = _METRIC_ALIASES.get(str(self.metric).lower())
        if metric is None:
            raise ValueError(f"unknown kernel metric {self.metric!r}; expected one of {METRICS}")
        object.__setattr__(self, "metric", metric)
        param = float(self.param)
        if self.family == "riesz":
            if param < 0:
                raise ValueError(f"Riesz exponent s must be >= 0, got {param}")
        elif param <= 0:
            raise ValueError(f"{self.family} bandwidth gamma must be > 0, got {param}")
        object.__setattr__(self, "param", param)
        if (self.family, metric) == ("rbf", "geodesic"):
            warnings.warn(
                "the geodesic RBF kernel is not positive definite on the sphere; "
                "its MHE energy has no MMD interpretation",
                RBFGeodesicWarning,
                stacklevel=3,
            )

    @classmethod
    def parse(cls, text: str) -> "Kernel":
        """Parse ``family-metric:param``, e.g. ``rbf-chordal:1.0`` or ``riesz-geodesic:1``."""
        head, sep, param = text.strip().lower().partition(":")
        family, dash, metric = head.partition("-")
        if not sep or not dash:
            raise ValueError(f"kernel {text!r} must look like 'family-metric:param'")
        try:
            value = float(param)
        except ValueError:
            raise ValueError(f"kernel {text!r}: parameter {param!r} is not a number") from None
        return cls(family, metric, value)

    def __str__(self) -> str:
        return f"{self.family}-{self.metric}:{self.param:g}"

    @property
    def positive_definite(self) -> str:
        return POSITIVE_DEFINITE[(self.family, self.metric)]

    @property
    def singular(self) -> bool:
        return self.family == "riesz"

    def __call__(self, t):
        return kernel_eval(self, t)

    def profile(self, phi):
        """Kernel value as a function of the angle ``phi`` (no singularity clamp)."""
        phi = np.asarray(phi, dtype=float)
        g, fam = self.param, self.family
        if self.metric == "geodesic":
            d = phi
        else:
            d = 2.0 * np.sin(0.5 * phi)
        if fam == "rbf":
            if self.metric == "chordal":
                return np.exp(g * np.cos(phi))
            return np.exp(-g * d * d)
        if fam == "laplace":
            return np.exp(-g * d)
        with np.errstate(divide="ignore"):
            if g == 0:
                return -np.log(d)
            return d ** (-g)


def _clip_cos(t):
    return np.clip(np.asarray(t, dtype=float), -1.0, 1.0)


def _distance_from_cos(k: Kernel, t):
    if k.metric == "geodesic":
        return np.arccos(t)
    return np.sqrt(np.clip(2.0 - 2.0 * t, 0.0, None))


def kernel_eval(k: Kernel, t, return_clamped: bool = False):
    """Kernel value at cosine ``t``. Riesz distances are clamped below at 1e-7."""
    t = _clip_cos(t)
    g = k.param
    clamped = np.zeros(np.shape(t), dtype=bool)
    if k.family == "rbf" and k.metric == "chordal":
        out = np.exp(g * t)
    else:
        d = _distance_from_cos(k, t)
        if k.family == "rbf":
            out = np.exp(-g * d * d)
        elif k.family == "laplace":
            out = np.exp(-g * d)
        else:
            clamped = d < RIESZ_EPS
            d = np.maximum(d, RIESZ_EPS)
            out = -np.log(d) if g == 0 else d ** (-g)
    if return_clamped:
        return out, clamped
    return out


def _dcos(k: Kernel, t):
    """d kernel / dt without endpoint checks; the cosine is kept inside (-1, 1)."""
    t = np.clip(np.asarray(t, dtype=float), -1.0 + 1e-15, 1.0 - 1e-15)
    g = k.param
    if k.family == "rbf" and k.metric == "chordal":
        return g * np.exp(g * t)
    if k.metric == "geodesic":
        phi = np.arccos(t)
        s = np.sqrt(1.0 - t * t)
        if k.family == "rbf":
            return 2.0 * g * phi * np.exp(-g * phi * phi) / s
        if k.family == "laplace":
            return g * np.exp(-g * phi) / s
        phi = np.maximum(phi, RIESZ_EPS)
        if g == 0:
            return 1.0 / (phi * s)
        return g * phi ** (-g - 1.0) / s
    r = np.sqrt(2.0 - 2.0 * t)
    if k.family == "laplace":
        return g * np.exp(-g * r) / r
    r = np.maximum(r, RIESZ_EPS)
    if g == 0:
        return 1.0 / (r * r)
    return g * r ** (-g - 2.0)


def kernel_dcos(k: Kernel, t):
    """Derivative of :func:`kernel_eval` with respect to the cosine, for ``t`` in (-1, 1)."""
    t = np.asarray(t, dtype=float)
    if np.any((t <= -1.0) | (t >= 1.0)):
        raise ValueError("kernel derivative is only defined for cosines strictly inside (-1, 1)")
    return _dcos(k, t)


def gradient_norm_curve(k: Kernel, angles):
    """Norm of the Riemannian gradient of ``k(x, y)`` w.r.t. ``x`` as the angle varies."""
    angles = np.asarray(angles, dtype=float)
    return np.abs(_dcos(k, np.cos(angles))) * np.sin(angles)


def _check_integrable(k: Kernel, m: int):
    if k.family == "riesz" and k.param >= m - 1:
        raise NotIntegrableError(f"Riesz kernel with s={k.param:g} is not integrable on S^{m - 1} (need s < {m - 1})")


@lru_cache(maxsize=None)
def _gauss_jacobi(q: int, alpha: float):
    return special.roots_jacobi(q, 0.0, alpha)


@lru_cache(maxsize=None)
def _gauss_legendre(q: int):
    return np.polynomial.legendre.leggauss(q)


def _angular_integral(k: Kernel, m: int, q: int, levels: int = 40) -> float:
    """Integral of ``f(cos phi) sin(phi)^(m-2)`` over [0, pi].

    Panels are graded geometrically toward ``phi = 0``; the innermost panel uses
    Gauss-Jacobi quadrature carrying the algebraic singularity of the integrand.
    """
    power_law = k.family == "riesz" and k.param > 0
    alpha = float(m - 2) - k.param if power_law else 0.0

    def integrand(phi):
        return k.profile(phi) * np.sin(phi) ** (m - 2)

    def innermost(phi):
        # integrand / phi^alpha, written to stay finite as phi -> 0
        if not power_law:
            return integrand(phi)
        return k.profile(phi) * phi ** k.param * (np.sin(phi) / phi) ** (m - 2)

    x, w = _gauss_legendre(q)
    total = 0.0
    # outer half [pi/2, pi] split into four panels
    edges = np.linspace(0.5 * np.pi, np.pi, 5)
    for a, b in zip(edges[:-1], edges[1:]):
        phi = 0.5 * (b - a) * x + 0.5 * (a + b)
        total += 0.5 * (b - a) * np.dot(w, integrand(phi))
    # geometric panels [h/2, h] for h = pi/2, pi/4, ...
    h = 0.5 * np.pi
    for _ in range(levels):
        a, b = 0.5 * h, h
        phi = 0.5 * (b - a) * x + 0.5 * (a + b)
        total += 0.5 * (b - a) * np.dot(w, integrand(phi))
        h = a
    # innermost [0, h]: weight phi^alpha handled exactly
    xj, wj = _gauss_jacobi(q, alpha)
    phi = 0.5 * h * (xj + 1.0)
    total += (0.5 * h) ** (alpha + 1.0) * np.dot(wj, innermost(phi))
    return float(total)


def mmd_constant(
    k: Kernel, m: int, quadrature_points: int = 16, rtol: float = 1e-8, atol: float = 1e-13, max_points: int = 512
) -> float:
    """``E_{Y ~ Unif}[k(z, Y)]``, the same for every ``z`` on S^{m-1}.

    Computed as ``B(1/2, (m-1)/2)^-1 * int_{-1}^{1} f(t) (1 - t^2)^((m-3)/2) dt`` in
    the angle variable ``t = cos(phi)``; the node count doubles until two
    successive estimates agree to ``rtol`` (or ``atol`` for constants near zero).
    """
    if m < 2:
        raise ValueError(f"need m >= 2, got {m}")
    _check_integrable(k, m)
    norm = special.beta(0.5, 0.5 * (m - 1))
    q = quadrature_points
    prev = _angular_integral(k, m, q)
    while q < max_points:
        q *= 2
        cur = _angular_integral(k, m, q)
        if abs(cur - prev) <= max(rtol * abs(cur), atol):
            return cur / norm
        prev = cur
    raise RuntimeError(f"quadrature for {k} in m={m} did not converge to rtol={rtol}")


def rbf_chordal_constant(gamma: float, m: int) -> float:
    """Closed form of :func:`mmd_constant` for ``exp(gamma t)`` via the modified Bessel function."""
    nu = 0.5 * m - 1.0
    # ive(nu, g) = iv(nu, g) * exp(-g); keeps large gamma finite in log space
    log_c = special.gammaln(0.5 * m) + (1.0 - 0.5 * m) * np.log(0.5 * gamma) + np.log(special.ive(nu, gamma)) + gamma
    return float(np.exp(log_c))


def rbf_chordal_constant_series(gamma: float, m: int, terms: int = 200) -> float:
    """Same constant from the power series ``I_nu(z) = sum (z/2)^(2j+nu) / (j! Gamma(j+nu+1))``."""
    nu = 0.5 * m - 1.0
    j = np.arange(terms)
    log_terms = (2 * j) * np.log(0.5 * gamma) - special.gammaln(j + 1) - special.gammaln(j + nu + 1)
    # (gamma/2)^(1 - m/2) * (gamma/2)^nu = 1
    return float(special.gamma(0.5 * m) * np.exp(log_terms).sum())
