"""Seeded Gaussian sampling on a counter-based generator.

Box-Muller on Philox-4x64 uniforms: the sampling algorithm is pinned
explicitly so generated datasets are reproducible bit-for-bit from the
seed alone, independent of numpy's default normal() implementation.
"""

from __future__ import annotations

import numpy as np


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def normal(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normal draws via Box-Muller."""
    count = int(np.prod(size)) if not np.isscalar(size) else int(size)
    pairs = (count + 1) // 2
    u1 = rng.random(pairs)
    u2 = rng.random(pairs)
    # guard log(0); rng.random() is in [0, 1)
    u1 = np.where(u1 == 0.0, np.finfo(float).tiny, u1)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
    return z[:count].reshape(size)
