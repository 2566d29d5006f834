"""Completeness and soundness functionals on blueprints.

Rounding a vertex of bias b with threshold t sends it to the +1 side with
probability (1 + t)/2; writing q = (1 - t)/2 for the complementary mass,
the probability that the two endpoints of a configuration theta land on
different sides is

    pair_value(theta, t_i, t_j) = q_i + q_j - 2 Gamma_rho(q_i, q_j),

where rho is the relative pairwise bias of theta and Gamma is the Gaussian
quadrant probability from `rigor`.  At t = 0 this collapses to the familiar
acos(rho)/pi.  Soundness of a blueprint at a threshold function is the
config-weighted average of pair values; completeness is the weighted
average of (1 - b_ij)/2.

Sums over configurations always follow the blueprint's canonical config
order, so repeated evaluations are bit-identical.
"""

from __future__ import annotations

from ..errors import DegenerateInput
from ..rigor import Interval, gamma
from .model import Blueprint, Configuration, ThresholdFunction

_UNIT = Interval(0.0, 1.0)


def relative_bias(theta: Configuration) -> Interval:
    """rho(theta) = (b_ij - b_i b_j) / sqrt((1 - b_i^2)(1 - b_j^2)).

    When the denominator is exactly zero (an endpoint bias of magnitude 1)
    the convention is rho = 0.  A denominator enclosure that straddles zero
    without being the exact point 0 admits both readings, which is a
    modeling error in the input rather than a value we can enclose.
    """
    den_sq = (1.0 - theta.b_i.sqr()) * (1.0 - theta.b_j.sqr())
    if den_sq.hi <= 0.0:
        return Interval.point(0.0)
    if den_sq.lo <= 0.0:
        raise DegenerateInput(
            f"bias magnitudes too close to 1 to separate: denominator {den_sq}")
    num = theta.b_ij - theta.b_i * theta.b_j
    return (num / den_sq.sqrt()).intersect(Interval(-1.0, 1.0))


def completeness(bp: Blueprint) -> Interval:
    """Weighted average of (1 - b_ij)/2 over the configurations."""
    total = Interval.point(0.0)
    for wc in bp.configs:
        total = total + wc.weight * ((1.0 - wc.theta.b_ij) * 0.5)
    return total.intersect(_UNIT)


def pair_value(theta: Configuration, ti: Interval, tj: Interval, *,
               cells: int | None = None) -> Interval:
    """Probability that the endpoints of theta round to different sides."""
    qi = (1.0 - ti) * 0.5
    qj = (1.0 - tj) * 0.5
    rho = relative_bias(theta)
    kwargs = {} if cells is None else {"cells": cells}
    g = gamma(rho, qi.intersect(_UNIT), qj.intersect(_UNIT), **kwargs)
    return (qi + qj - 2.0 * g).intersect(_UNIT)


def soundness_at(bp: Blueprint, t: ThresholdFunction, *,
                 cells: int | None = None) -> Interval:
    """Config-weighted average of pair values at the thresholds t."""
    total = Interval.point(0.0)
    for wc in bp.configs:
        total = total + wc.weight * pair_value(wc.theta, t[wc.i], t[wc.j], cells=cells)
    return total.intersect(_UNIT)


def balance_residual(bp: Blueprint, t: ThresholdFunction) -> Interval:
    """sum_b mu(b) t(b); the threshold function is balanced when this is 0."""
    total = Interval.point(0.0)
    for symbol in bp.symbols():
        total = total + bp.mu[symbol] * t[symbol]
    return total
