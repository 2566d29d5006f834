"""Non-rigorous floating-point mirror of the soundness surface.

This module re-derives everything the certifier bounds, in plain float64
with library special functions, sharing no numerics with `rigor`.  It
serves three purposes: contour/grid reproduction at speed, independent
point oracles for the rigorous route's tests (an enclosure that disagrees
with a careful float evaluation is wrong far more often than the float is
off by more than 1e-12), and heuristic argmax hunting.  Nothing here
carries proof weight.

The quadrant probability uses the single-integral form

    Phi2(h, k; rho) = Phi(h) Phi(k)
        + (1/2pi) int_0^{asin rho} exp(-(h^2 + k^2 - 2 h k sin u)
                                        / (2 cos^2 u)) du,

with fixed 48-node Gauss-Legendre quadrature; the integrand is analytic, so
the error is far below float noise for |rho| <= 0.95.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import label
from scipy.special import ndtr, ndtri

from ..blueprint import Blueprint, relative_bias

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)
_XMAX = 8.2  # beyond this the threshold is numerically +-1


@dataclass(frozen=True)
class PointModel:
    """Float snapshot of a blueprint in the certifier's variable layout.

    Index order follows the blueprint's bias order; `pairs` holds config
    endpoint indices into it.  `ratio` is mu(b1)/mu(b4) for the balance
    elimination t4 = -ratio * t1.
    """

    symbols: tuple[str, ...]
    weights: np.ndarray
    rhos: np.ndarray
    pairs: tuple[tuple[int, int], ...]
    ratio: float

    @staticmethod
    def from_blueprint(bp: Blueprint) -> "PointModel":
        symbols = bp.symbols()
        index = {s: k for k, s in enumerate(symbols)}
        weights = np.array([wc.weight.mid for wc in bp.configs])
        rhos = np.array([relative_bias(wc.theta).mid for wc in bp.configs])
        pairs = tuple((index[wc.i], index[wc.j]) for wc in bp.configs)
        support = bp.support()
        ratio = bp.mu[support[0]].mid / bp.mu[support[-1]].mid if len(support) == 2 else 0.0
        return PointModel(tuple(symbols), weights, rhos, pairs, ratio)


def phi2_point(h, k, rho):
    """Bivariate normal CDF P(X <= h, Y <= k) at correlation rho."""
    h, k, rho = np.broadcast_arrays(np.asarray(h, float), np.asarray(k, float),
                                    np.asarray(rho, float))
    a = np.arcsin(np.clip(rho, -1.0, 1.0))
    u = 0.5 * a[..., None] * (_GL_NODES + 1.0)
    su, cu = np.sin(u), np.cos(u)
    num = h[..., None] ** 2 + k[..., None] ** 2 - 2.0 * h[..., None] * k[..., None] * su
    integrand = np.exp(-num / (2.0 * cu ** 2))
    integral = 0.5 * a * (integrand @ _GL_WEIGHTS)
    return ndtr(h) * ndtr(k) + integral / (2.0 * np.pi)


def gamma_point(rho, q1, q2):
    """Gamma_rho(q1, q2) in float arithmetic, exact at the q edges."""
    rho, q1, q2 = np.broadcast_arrays(np.asarray(rho, float), np.asarray(q1, float),
                                      np.asarray(q2, float))
    q1c = np.clip(q1, 1e-300, 1.0 - 1e-16)
    q2c = np.clip(q2, 1e-300, 1.0 - 1e-16)
    out = phi2_point(ndtri(q1c), ndtri(q2c), rho)
    out = np.where(q1 <= 0.0, 0.0, out)
    out = np.where(q2 <= 0.0, 0.0, out)
    out = np.where(q1 >= 1.0, q2, out)
    out = np.where(q2 >= 1.0, q1, out)
    return out


def pair_value_point(rho, q1, q2):
    return q1 + q2 - 2.0 * gamma_point(rho, q1, q2)


def soundness_point(model: PointModel, t: np.ndarray) -> np.ndarray:
    """Soundness at threshold vectors t of shape (..., m)."""
    t = np.asarray(t, float)
    q = 0.5 * (1.0 - t)
    total = 0.0
    for w, rho, (i, j) in zip(model.weights, model.rhos, model.pairs):
        total = total + w * pair_value_point(rho, q[..., i], q[..., j])
    return total


def _inner_partial(x, x_other, rho, w):
    """One config's term of a partial derivative in threshold units,
    evaluated at quantile coordinates: w * (-1/2 + Phi((x_o - rho x)/s))."""
    s = np.sqrt(1.0 - rho * rho)
    return w * (ndtr((x_other - rho * x) / s) - 0.5)


def _solve_inner(x_fixed: dict[int, np.ndarray], model: PointModel, var: int,
                 tol: float = 1e-13) -> np.ndarray:
    """Root of the partial derivative for one inner variable, in x-space.

    The partial in t is decreasing; in x = Phi^{-1}((1-t)/2) it is
    increasing for negative-rho configurations, so plain bisection works.
    Boundary-saturated roots clamp to +-XMAX.
    """
    touching = [(w, rho, i if j == var else j)
                for w, rho, (i, j) in zip(model.weights, model.rhos, model.pairs)
                if var in (i, j)]

    def df(x):
        total = 0.0
        for w, rho, other in touching:
            total = total + _inner_partial(x, x_fixed[other], rho, w)
        return total

    shape = np.broadcast_shapes(*(np.shape(x_fixed[o]) for _, _, o in touching))
    lo = np.full(shape, -_XMAX)
    hi = np.full(shape, _XMAX)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        pos = df(mid) < 0.0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.max(hi - lo) < tol:
            break
    return 0.5 * (lo + hi)


def _layout(model: PointModel) -> tuple[int, int, int, int, int]:
    """Indices of (t1, t2, t3, t4, t5) in the blueprint's bias order."""
    if len(model.symbols) != 5:
        raise ValueError("the reduced surface is defined for the five-bias layout")
    return 0, 1, 2, 3, 4


def reduced_point(model: PointModel, t1, t2) -> np.ndarray:
    """max over (t3, t5) of soundness at (t1, t2, t4 from balance)."""
    i1, i2, i3, i4, i5 = _layout(model)
    t1 = np.asarray(t1, float)
    t2 = np.asarray(t2, float)
    t4 = -model.ratio * t1
    x = {
        i1: ndtri(np.clip(0.5 * (1.0 - t1), 1e-300, 1.0 - 1e-16)),
        i2: ndtri(np.clip(0.5 * (1.0 - t2), 1e-300, 1.0 - 1e-16)),
        i4: ndtri(np.clip(0.5 * (1.0 - t4), 1e-300, 1.0 - 1e-16)),
    }
    x3 = _solve_inner(x, model, i3)
    x5 = _solve_inner(x, model, i5)
    t = np.stack([t1, t2, 1.0 - 2.0 * ndtr(x3), t4, 1.0 - 2.0 * ndtr(x5)], axis=-1)
    return soundness_point(model, t)


def inner_root(model: PointModel, var_symbol: str, t_fixed: dict[str, float],
               tol: float = 1e-13) -> float:
    """Point-bisection root for one inner variable, in t units.

    The oracle the rigorous root_find is tested against: all thresholds in
    `t_fixed` are pinned, the partial for `var_symbol` is driven to zero.
    """
    index = {s: k for k, s in enumerate(model.symbols)}
    var = index[var_symbol]
    x_fixed = {
        index[s]: np.asarray(ndtri(np.clip(0.5 * (1.0 - v), 1e-300, 1.0 - 1e-16)))
        for s, v in t_fixed.items()
    }
    x = _solve_inner(x_fixed, model, var, tol=tol)
    return float(1.0 - 2.0 * ndtr(x))


def grid_values(model: PointModel, n: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint grid of the reduced surface over [-1, 1]^2.

    Returns (centers, values) with values[i, j] = s(centers[i], centers[j]);
    the first axis is t1.
    """
    centers = -1.0 + (2.0 * np.arange(n) + 1.0) / n
    t1, t2 = np.meshgrid(centers, centers, indexing="ij")
    return centers, reduced_point(model, t1, t2)


def superlevel_components(values: np.ndarray, threshold: float) -> int:
    """Number of 4-connected components of {values > threshold}."""
    _, count = label(values > threshold)
    return int(count)


def argmax_refine(model: PointModel, n: int = 200) -> tuple[float, float, float]:
    """(t1, t2, value) of a local maximum of the reduced surface.

    Coordinate-wise golden-section polish from the grid argmax; the surface
    is smooth and single-peaked there, so this is enough for a heuristic.
    """
    centers, values = grid_values(model, n)
    k = int(np.argmax(values))
    t1, t2 = centers[k // n], centers[k % n]
    step = 2.0 / n

    def value_at(a, b):
        return float(reduced_point(model, np.asarray(a), np.asarray(b)))

    for _ in range(40):
        moved = False
        for axis in (0, 1):
            base = value_at(t1, t2)
            for sign in (1.0, -1.0):
                a = np.clip(t1 + sign * step, -1.0, 1.0) if axis == 0 else t1
                b = np.clip(t2 + sign * step, -1.0, 1.0) if axis == 1 else t2
                if value_at(a, b) > base:
                    t1, t2 = float(a), float(b)
                    moved = True
                    break
        if not moved:
            step *= 0.5
            if step < 1e-12:
                break
    return t1, t2, value_at(t1, t2)
