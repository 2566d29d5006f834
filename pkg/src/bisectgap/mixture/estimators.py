"""Monte Carlo estimators for the correlated-Gaussian graph.

Both estimators stratify by configuration: samples are split evenly
across the support, per-configuration means are combined with the
configuration weights, and the standard error follows from the
weighted combination.  Sampling runs in fixed-size chunks on substreams
keyed by (purpose, configuration, chunk), and chunk statistics are
combined in chunk order, so estimates depend only on the seed.

The completeness estimator averages (1 - u.v)/2 over normalized
correlated pairs; in high dimension u.v concentrates at the pairwise
bias, recovering the blueprint's completeness up to o(1) in the
dimension.  The soundness estimator realizes the threshold cut: both
endpoints project a shared Gaussian direction onto their unit solution
vectors and compare against their bias's quantile.  Those two
projections are exactly bivariate normal with the configuration's
correlation, in any ambient dimension, so the cut frequency is an
unbiased estimate of the blueprint's soundness at that threshold
function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from ..blueprint import Blueprint, ThresholdFunction, relative_bias
from ..errors import DegenerateInput
from .sampler import substream

_CHUNK = 1 << 14

# purpose tags for the substream keys
_COMPLETENESS = 0
_SOUNDNESS = 1


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n_samples: int

    def distance_to(self, lo: float, hi: float) -> float:
        """Distance from the estimate to the interval [lo, hi], in values."""
        if self.value < lo:
            return lo - self.value
        if self.value > hi:
            return self.value - hi
        return 0.0


def _allocation(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if k < extra else 0) for k in range(parts)]


def _config_streams(bp: Blueprint) -> list[tuple[int, float, float, float]]:
    """(index, weight, rho, sqrt(1-rho^2)) per configuration, canonical order."""
    out = []
    for k, cfg in enumerate(bp.configs):
        rho = relative_bias(cfg.theta).mid
        out.append((k, cfg.weight.mid, rho, math.sqrt(max(0.0, 1.0 - rho * rho))))
    return out


def _normalized_pairs(rng: np.random.Generator, m: int, d: int, rho: float,
                      comp: float) -> tuple[np.ndarray, np.ndarray]:
    x = rng.standard_normal((m, d))
    y = rho * x + comp * rng.standard_normal((m, d))
    u = x / np.linalg.norm(x, axis=1, keepdims=True)
    v = y / np.linalg.norm(y, axis=1, keepdims=True)
    return u, v


def _combine(stats: list[tuple[float, float, float, int]], total: int) -> Estimate:
    value = math.fsum(w * mean for w, mean, _, _ in stats)
    var = math.fsum(
        w * w * max(0.0, sq / n - mean * mean) / n
        for w, mean, sq, n in stats
    )
    return Estimate(value, math.sqrt(var), total)


def estimate_mixture_completeness(bp: Blueprint, d: int, n_samples: int,
                                  seed: int) -> Estimate:
    """Mean of (1 - u.v)/2 over configuration-weighted normalized pairs."""
    if d < 2:
        raise DegenerateInput("dimension must be at least 2")
    if n_samples < len(bp.configs):
        raise DegenerateInput("need at least one sample per configuration")
    counts = _allocation(n_samples, len(bp.configs))
    stats = []
    for (k, w, rho, comp), n_k in zip(_config_streams(bp), counts):
        sums: list[float] = []
        sqs: list[float] = []
        done = 0
        chunk = 0
        while done < n_k:
            m = min(_CHUNK, n_k - done)
            rng = substream(seed, _COMPLETENESS, k, chunk)
            u, v = _normalized_pairs(rng, m, d, rho, comp)
            vals = 0.5 * (1.0 - np.einsum("ij,ij->i", u, v))
            sums.append(float(vals.sum()))
            sqs.append(float((vals * vals).sum()))
            done += m
            chunk += 1
        mean = math.fsum(sums) / n_k
        stats.append((w, mean, math.fsum(sqs), n_k))
    return _combine(stats, n_samples)


def estimate_mixture_soundness(bp: Blueprint, t: ThresholdFunction, d: int,
                               n_samples: int, seed: int) -> Estimate:
    """Cut frequency of the threshold rounding on correlated pairs.

    Per sample, a shared random direction is compared against each
    endpoint's threshold: the endpoint with bias b lands on the positive
    side when the direction's projection on its unit vector exceeds the
    quantile of (1 - t(b))/2.  The projections of a standard Gaussian
    direction in R^d onto two unit vectors with inner product rho form
    an exact bivariate normal pair with correlation rho, whatever d is
    (rotational invariance), so the pair is realized directly from two
    scalar normals and the estimate is unbiased at every dimension.
    """
    if d < 2:
        raise DegenerateInput("dimension must be at least 2")
    if n_samples < len(bp.configs):
        raise DegenerateInput("need at least one sample per configuration")
    for symbol in bp.symbols():
        if symbol not in t:
            raise DegenerateInput(f"threshold undefined on {symbol}")
    cuts = {s: float(ndtri(min(1.0, max(0.0, 0.5 * (1.0 - t[s].mid)))))
            for s in bp.symbols()}

    counts = _allocation(n_samples, len(bp.configs))
    stats = []
    for ((k, w, rho, comp), n_k, cfg) in zip(_config_streams(bp), counts, bp.configs):
        xi, xj = cuts[cfg.i], cuts[cfg.j]
        sums: list[float] = []
        done = 0
        chunk = 0
        while done < n_k:
            m = min(_CHUNK, n_k - done)
            rng = substream(seed, _SOUNDNESS, k, chunk)
            z1 = rng.standard_normal(m)
            z2 = rho * z1 + comp * rng.standard_normal(m)
            cut = (z1 > xi) != (z2 > xj)
            sums.append(float(np.count_nonzero(cut)))
            done += m
            chunk += 1
        total = math.fsum(sums)
        mean = total / n_k
        # indicator variable: the sum of squares is the sum itself
        stats.append((w, mean, total, n_k))
    return _combine(stats, n_samples)
