"""Seeded synthetic data generators for the shipped experiment drivers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._rand import normal, philox
from .errors import DimensionMismatch
from .kernels import StructuredSample

CLUSTER_CENTERS = np.array(
    [
        [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
        [[1.0, 1.0], [0.0, 0.0], [0.0, 0.0]],
        [[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]],
        [[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]],
    ]
)


def gen_interacting(m: int, steps: int, sigma: float, seed: int,
                    x0: np.ndarray | None = None) -> list[StructuredSample]:
    """Mean-coupled interacting scalar system, steps+1 samples x_0..x_steps.

    x_{t+1, i} = 1 + x_{t, i} - mean_j x_{t, j} + noise, starting from
    x_{0, i} = (i + 1) / m; each sample has m one-dimensional elements.
    """
    if m < 1 or steps < 1:
        raise DimensionMismatch("need m >= 1 and steps >= 1")
    if sigma < 0:
        raise DimensionMismatch("noise sigma must be >= 0")
    rng = philox(seed)
    x = np.arange(1, m + 1, dtype=np.float64) / m if x0 is None else np.asarray(x0, dtype=np.float64)
    out = [StructuredSample(x[:, None].copy())]
    for _ in range(steps):
        xi = sigma * normal(rng, m) if sigma > 0 else np.zeros(m)
        x = 1.0 + x - x.mean() + xi
        out.append(StructuredSample(x[:, None].copy()))
    return out


def gen_clusters(count: int, sigma: float, seed: int,
                 centers: np.ndarray | None = None) -> tuple[list[StructuredSample], np.ndarray]:
    """Noisy replicas of cluster centers; returns (samples, labels).

    With the default centers this yields four groups of ``count`` samples,
    each sample made of three elements in R^2, in label order 0..3.
    """
    if count < 1:
        raise DimensionMismatch("need count >= 1 per cluster")
    centers = CLUSTER_CENTERS if centers is None else np.asarray(centers, dtype=np.float64)
    rng = philox(seed)
    samples: list[StructuredSample] = []
    labels: list[int] = []
    for label, center in enumerate(centers):
        for _ in range(count):
            noise = sigma * normal(rng, center.shape) if sigma > 0 else np.zeros(center.shape)
            samples.append(StructuredSample(center + noise))
            labels.append(label)
    return samples, np.asarray(labels)


@dataclass(frozen=True)
class GeneratorSpec:
    """Declarative generator description used by the CLI."""

    kind: str
    m: int = 50
    steps: int = 30
    count: int = 20
    noise_sigma: float = 0.01
    seed: int = 0
    centers: np.ndarray | None = field(default=None, repr=False)

    def generate(self):
        if self.kind == "interacting":
            return gen_interacting(self.m, self.steps, self.noise_sigma, self.seed)
        if self.kind == "clusters":
            return gen_clusters(self.count, self.noise_sigma, self.seed, self.centers)
        raise DimensionMismatch(f"unknown generator kind {self.kind!r}")
