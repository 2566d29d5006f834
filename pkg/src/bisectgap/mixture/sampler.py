"""Correlated Gaussian pairs with reproducible, splittable streams.

A pair at correlation rho is realized as y = rho*x + sqrt(1-rho^2)*g
with x, g independent standard normal vectors, which gives the exact
per-coordinate covariance [[1, rho], [rho, 1]] and makes rho = 1 yield
y = x bit-for-bit.

Streams are split by spawn keys on a shared SeedSequence: draw index
for the one-pair API, (purpose, configuration, chunk) for the batch
estimators.  Any consumer that aggregates across chunks does so in
chunk-index order, so results never depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateInput


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream of `seed` named by the key tuple."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


@dataclass
class CorrelatedSampler:
    """Stream of correlated standard normal pairs in a fixed dimension."""

    rho: float
    dim: int
    seed: int
    _next: int = field(default=0, init=False, repr=False)

    def __post_init__(self) -> None:
        if not -1.0 <= self.rho <= 1.0:
            raise DegenerateInput(f"correlation {self.rho!r} outside [-1, 1]")
        if self.dim < 1:
            raise DegenerateInput("dimension must be at least 1")

    def pair_at(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        """The pair at a given draw index; independent of call order."""
        rng = substream(self.seed, 0, index)
        x = rng.standard_normal(self.dim)
        g = rng.standard_normal(self.dim)
        y = self.rho * x + math.sqrt(max(0.0, 1.0 - self.rho * self.rho)) * g
        return x, y

    def pairs(self, n: int, *, chunk: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """n pairs as (n, dim) arrays from the sampler's chunk substream."""
        rng = substream(self.seed, 1, chunk)
        x = rng.standard_normal((n, self.dim))
        g = rng.standard_normal((n, self.dim))
        y = self.rho * x + math.sqrt(max(0.0, 1.0 - self.rho * self.rho)) * g
        return x, y


def sample_pair(s: CorrelatedSampler) -> tuple[np.ndarray, np.ndarray]:
    """Next pair from the sampler's own counter."""
    pair = s.pair_at(s._next)
    s._next += 1
    return pair
