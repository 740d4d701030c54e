"""Dispersion regularizers with stochastic Riemannian gradients.

A :class:`Regularizer` bundles an objective with its sampling recipe
(minibatch of points, Lloyd samples, random great circles); calling
:meth:`Regularizer.loss_and_grad` draws those ingredients from the given
random stream and returns the loss estimate and a :class:`GradientBatch`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import CIRCLE_MODES, sample_great_circles, sample_uniform
from ..kernels import Kernel
from .base import GradientBatch
from .lloyd import grad_lloyd, loss_lloyd
from .pairwise import (
    DISTANCES,
    grad_pairwise,
    loss_koleo,
    loss_mhe,
    loss_mm,
    loss_mmd_estimate,
    loss_wi,
    nearest_neighbors,
)
from .sliced import (
    dispersed_offsets,
    grad_sliced,
    grad_ssw,
    loss_sliced,
    loss_ssw,
    project_circular_dispersed,
)

KINDS = ("mm", "koleo", "mhe", "wi", "lloyd", "sliced", "ssw")
PAIRWISE = ("mm", "koleo", "mhe", "wi")

__all__ = [
    "GradientBatch",
    "KINDS",
    "Regularizer",
    "dispersed_offsets",
    "grad_lloyd",
    "grad_pairwise",
    "grad_sliced",
    "grad_ssw",
    "loss_koleo",
    "loss_lloyd",
    "loss_mhe",
    "loss_mm",
    "loss_mmd_estimate",
    "loss_sliced",
    "loss_ssw",
    "loss_wi",
    "nearest_neighbors",
    "parse_regularizer",
    "project_circular_dispersed",
]


@dataclass(frozen=True)
class Regularizer:
    kind: str
    distance: str | None = None
    kernel: Kernel | None = None
    lloyd_samples: int = 300
    circles_per_step: int = 1
    circle_mode: str = "uniform"
    minibatch: int | None = None
    normalized: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown regularizer kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in ("mm", "koleo"):
            if self.distance is None:
                object.__setattr__(self, "distance", "geodesic")
            if self.distance not in DISTANCES:
                raise ValueError(f"regularizer {self.kind}: unknown distance {self.distance!r}; expected one of {DISTANCES}")
        if (self.kernel is not None) != (self.kind in ("mhe", "wi")):
            raise ValueError(f"regularizer {self.kind}: a kernel is required for mhe/wi and not allowed otherwise")
        if self.circle_mode == "axis-aligned":
            object.__setattr__(self, "circle_mode", "axis")
        if self.circle_mode not in CIRCLE_MODES:
            raise ValueError(f"circle_mode must be one of {CIRCLE_MODES}, got {self.circle_mode!r}")
        for name in ("lloyd_samples", "circles_per_step"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.minibatch is not None and self.minibatch < 2:
            raise ValueError(f"minibatch must be >= 2 or None (full batch), got {self.minibatch}")

    def __str__(self) -> str:
        if self.kind in ("mm", "koleo"):
            return f"{self.kind}:{self.distance}"
        if self.kind in ("mhe", "wi"):
            return f"{self.kind}:{self.kernel}"
        if self.kind == "lloyd":
            return f"lloyd:{self.lloyd_samples}"
        return f"{self.kind}:{self.circle_mode}:{self.circles_per_step}"

    @property
    def slug(self) -> str:
        return str(self).replace(":", "_").replace(".", "p")

    def _batch(self, n: int, rng: np.random.Generator):
        if self.minibatch is None or self.minibatch >= n:
            return None
        return np.sort(rng.choice(n, size=self.minibatch, replace=False))

    def loss_and_grad(self, X, rng: np.random.Generator, euclidean: bool = False):
        """One stochastic evaluation: ``(loss estimate, GradientBatch)``.

        ``euclidean=True`` returns ambient gradients (with radial parts) for
        the projected-gradient baseline.
        """
        X = np.asarray(X, dtype=float)
        n, m = X.shape
        if self.kind in PAIRWISE:
            idx = self._batch(n, rng)
            return grad_pairwise(X, self.kind, idx, self.distance, self.kernel, self.normalized, euclidean)
        if self.kind == "lloyd":
            idx = self._batch(n, rng)
            Y = sample_uniform(self.lloyd_samples, m, rng)
            centers = X if idx is None else X[idx]
            loss = loss_lloyd(centers, Y)
            g = grad_lloyd(centers, Y, euclidean=euclidean)
            if idx is not None:
                g = GradientBatch(idx, g.tangents, g.counters)
            return loss, g
        P, Q = sample_great_circles(self.circles_per_step, m, self.circle_mode, rng)
        if self.kind == "sliced":
            return grad_sliced(X, P, Q)
        return grad_ssw(X, P, Q)

    def loss(self, X, rng: np.random.Generator) -> float:
        return self.loss_and_grad(X, rng)[0]


def parse_regularizer(text: str, minibatch: int | None = None) -> Regularizer:
    """Parse ``kind[:distance|kernel][:count]``.

    Examples: ``mm:geodesic``, ``koleo:chordal``, ``mhe:rbf-chordal:1.0``,
    ``wi:rbf-chordal:2``, ``lloyd:300``, ``sliced:axis:13``, ``ssw:uniform:50``.
    """
    parts = text.strip().lower().split(":")
    kind = parts[0]
    if kind not in KINDS:
        raise ValueError(f"regularizer {text!r}: unknown kind {kind!r}; expected one of {KINDS}")
    rest = parts[1:]
    try:
        if kind in ("mm", "koleo"):
            if len(rest) > 1:
                raise ValueError("expected at most one field (distance)")
            return Regularizer(kind, distance=rest[0] if rest else "geodesic", minibatch=minibatch)
        if kind in ("mhe", "wi"):
            if len(rest) != 2:
                raise ValueError("expected 'family-metric:param' kernel")
            return Regularizer(kind, kernel=Kernel.parse(":".join(rest)), minibatch=minibatch)
        if kind == "lloyd":
            if len(rest) > 1:
                raise ValueError("expected at most one field (sample count)")
            return Regularizer(kind, lloyd_samples=int(rest[0]) if rest else 300, minibatch=minibatch)
        mode, count = "uniform", 1
        for field_ in rest:
            if field_.isdigit():
                count = int(field_)
            else:
                mode = field_
        return Regularizer(kind, circle_mode=mode, circles_per_step=count, minibatch=minibatch)
    except ValueError as exc:
        raise ValueError(f"regularizer {text!r}: {exc}") from None
