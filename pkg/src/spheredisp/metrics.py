"""Dispersion diagnostics: minimum pairwise angle and spherical variance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BLOCK = 2048
MATERIALIZE_LIMIT = 20_000_000


@dataclass(frozen=True)
class DispersionReport:
    d_min: float
    svar: float
    mean_resultant_length: float
    step: int = 0

    @property
    def d_min_deg(self) -> float:
        return float(np.degrees(self.d_min))


def _as_config(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"configuration must be a 2-d array (n, m), got shape {X.shape}")
    return X


def _blocks(n: int, block: int):
    for start in range(0, n, block):
        yield start, min(start + block, n)


def max_cosine(X, block: int = BLOCK) -> float:
    """Largest off-diagonal inner product, computed blockwise."""
    X = _as_config(X)
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least two points")
    best = -np.inf
    for i0, i1 in _blocks(n, block):
        for j0, j1 in _blocks(n, block):
            if j1 <= i0:
                continue
            g = X[i0:i1] @ X[j0:j1].T
            if i0 == j0:
                np.fill_diagonal(g, -np.inf)
            best = max(best, float(g.max()))
    return best


def min_geodesic_distance(X, block: int = BLOCK) -> float:
    """Minimum pairwise angle (radians)."""
    return float(np.arccos(np.clip(max_cosine(X, block), -1.0, 1.0)))


def per_point_min_angles(X, block: int = BLOCK) -> np.ndarray:
    """For each point, the angle (radians) to its nearest neighbour."""
    X = _as_config(X)
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least two points")
    best = np.full(n, -np.inf)
    for i0, i1 in _blocks(n, block):
        for j0, j1 in _blocks(n, block):
            g = X[i0:i1] @ X[j0:j1].T
            if i0 == j0:
                np.fill_diagonal(g, -np.inf)
            best[i0:i1] = np.maximum(best[i0:i1], g.max(axis=1))
    return np.arccos(np.clip(best, -1.0, 1.0))


def mean_resultant_length(X) -> float:
    X = _as_config(X)
    return float(np.linalg.norm(X.mean(axis=0)))


def spherical_variance(X) -> float:
    return 1.0 - mean_resultant_length(X)


def dispersion_report(X, step: int = 0) -> DispersionReport:
    r = mean_resultant_length(X)
    return DispersionReport(d_min=min_geodesic_distance(X), svar=1.0 - r, mean_resultant_length=r, step=step)


def _pair_values(X, metric: str, i0, i1, j0, j1):
    g = np.clip(X[i0:i1] @ X[j0:j1].T, -1.0, 1.0)
    if i0 == j0:
        g = g[np.triu_indices(i1 - i0, k=1)]
    else:
        g = g.ravel()
    if metric == "geodesic":
        return np.arccos(g)
    if metric == "chordal":
        return np.sqrt(np.clip(2.0 - 2.0 * g, 0.0, None))
    raise ValueError(f"unknown metric {metric!r}")


def _median_of_sorted_pair(lo: float, hi: float) -> float:
    return 0.5 * (lo + hi)


def pairwise_distance_summary(X, metric: str = "geodesic", block: int = BLOCK) -> dict[str, float]:
    """Exact min / median / max of the ``n(n-1)/2`` pairwise distances.

    Small problems materialize the upper triangle; large ones use a two-pass
    blockwise selection (histogram to locate the median, then an exact partition
    of the values falling in that bin).
    """
    X = _as_config(X)
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least two points")
    total = n * (n - 1) // 2
    if total <= MATERIALIZE_LIMIT:
        d = _pair_values(X, metric, 0, n, 0, n)
        lo_k, hi_k = (total - 1) // 2, total // 2
        part = np.partition(d, [lo_k, hi_k])
        return {"min": float(d.min()), "median": _median_of_sorted_pair(part[lo_k], part[hi_k]), "max": float(d.max())}

    upper = np.pi if metric == "geodesic" else 2.0
    edges = np.linspace(0.0, upper, 1 << 16)
    counts = np.zeros(edges.size + 1, dtype=np.int64)
    dmin, dmax = np.inf, -np.inf
    for i0, i1 in _blocks(n, block):
        for j0, j1 in _blocks(n, block):
            if j1 <= i0:
                continue
            d = _pair_values(X, metric, i0, i1, j0, j1)
            dmin, dmax = min(dmin, float(d.min())), max(dmax, float(d.max()))
            counts += np.bincount(np.searchsorted(edges, d, side="right"), minlength=counts.size)
    cum = np.cumsum(counts)
    ranks = [(total - 1) // 2, total // 2]
    picked = []
    for k in ranks:
        b = int(np.searchsorted(cum, k, side="right"))
        below = int(cum[b - 1]) if b > 0 else 0
        lo = edges[b - 1] if b > 0 else -np.inf
        hi = edges[b] if b < edges.size else np.inf
        vals = []
        for i0, i1 in _blocks(n, block):
            for j0, j1 in _blocks(n, block):
                if j1 <= i0:
                    continue
                d = _pair_values(X, metric, i0, i1, j0, j1)
                vals.append(d[(d >= lo) & (d < hi)])
        vals = np.sort(np.concatenate(vals))
        picked.append(float(vals[k - below]))
    return {"min": dmin, "median": _median_of_sorted_pair(*picked), "max": dmax}
