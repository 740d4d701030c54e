from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class GradientBatch:
    """Gradients for a subset of points.

    ``tangents[k]`` belongs to point ``indices[k]``. ``counters`` records
    measure-zero events handled along the way (skipped samples, pole
    projections, clipped contributions).
    """

    indices: np.ndarray
    tangents: np.ndarray
    counters: dict = field(default_factory=dict)

    def dense(self, n: int) -> np.ndarray:
        out = np.zeros((n, self.tangents.shape[1]))
        out[self.indices] = self.tangents
        return out

    def norm(self) -> float:
        return float(np.linalg.norm(self.tangents))

    @classmethod
    def full(cls, tangents: np.ndarray, **counters) -> "GradientBatch":
        return cls(np.arange(tangents.shape[0]), tangents, dict(counters))


def check_config(X, min_points: int = 1) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"configuration must have shape (n, m), got {X.shape}")
    if X.shape[0] < min_points:
        raise ValueError(f"need at least {min_points} points, got {X.shape[0]}")
    return X
