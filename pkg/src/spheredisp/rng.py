"""Counter-based, splittable random streams.

Every stochastic ingredient of a run (initialization, minibatches, Lloyd
samples, great circles) gets its own stream keyed by ``(seed, *key)``, so
trajectories do not depend on call order across components.
"""

from __future__ import annotations

import zlib

import numpy as np

_NAMES: dict[str, int] = {}


def _key_int(key: int | str) -> int:
    if isinstance(key, str):
        if key not in _NAMES:
            _NAMES[key] = zlib.crc32(key.encode("utf-8"))
        return _NAMES[key]
    return int(key)


def stream(seed: int, *key: int | str) -> np.random.Generator:
    """Philox generator for ``seed`` and an arbitrary tuple of sub-keys."""
    entropy = [int(seed)] + [_key_int(k) for k in key]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def as_generator(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(0 if rng is None else int(rng))
