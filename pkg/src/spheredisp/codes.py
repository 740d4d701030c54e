"""Reference spherical codes with known optimal minimum angle."""

from __future__ import annotations

import itertools

import numpy as np

from .metrics import min_geodesic_distance


def tribonacci_constant() -> float:
    """Real root of ``t^3 = t^2 + t + 1``."""
    r = np.sqrt(33.0)
    return float((1.0 + np.cbrt(19.0 + 3.0 * r) + np.cbrt(19.0 - 3.0 * r)) / 3.0)


def snub_cube() -> np.ndarray:
    """The 24 vertices of the snub cube, scaled onto the unit sphere.

    Even permutations of ``(1, 1/t, t)`` with an even number of plus signs,
    odd permutations with an odd number, ``t`` the tribonacci constant.
    """
    t = tribonacci_constant()
    base = np.array([1.0, 1.0 / t, t])
    even = [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
    odd = [(0, 2, 1), (2, 1, 0), (1, 0, 2)]
    pts = []
    for perms, parity in ((even, 0), (odd, 1)):
        for perm in perms:
            for signs in itertools.product((1.0, -1.0), repeat=3):
                if sum(s > 0 for s in signs) % 2 == parity:
                    pts.append(base[list(perm)] * np.array(signs))
    X = np.array(pts)
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def known_optimum_deg(n: int, dim: int) -> float | None:
    """Optimal Tammes angle in degrees where we have an exact construction."""
    if dim == 3 and n == 24:
        return float(np.degrees(min_geodesic_distance(snub_cube())))
    return None
