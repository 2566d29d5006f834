"""Certified enclosures of the rounding constants.

The critical correlation b* is the unique root in (-1, 0) of

    g(b) = acos(b) - (1 - b) / sqrt(1 - b^2),

which is the numerator of the derivative of b -> acos(b)/(1 - b); g is
negative at -0.8, positive at -0.5, and increasing between them, so interval
bisection with sign proofs at every step yields a certified bracket.  The
approximation ratio and the completeness constant follow as interval
expressions in b*:

    alpha = 2 acos(b*) / (pi (1 - b*)),       c = (1 - b*) / 2,

and the uncorrelated-threshold value of a single clause is
k = acos(b*) / pi = alpha * c.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DegenerateInput
from .functions import acos_iv, pi_iv
from .interval import Interval

_BRACKET = (-0.8, -0.5)


def _g(b: Interval) -> Interval:
    one_minus = 1.0 - b
    denom = (1.0 - b.sqr()).sqrt()
    return acos_iv(b) - one_minus / denom


def compute_bgw(precision_bits: int = 48) -> Interval:
    """Certified enclosure of b*, width at most 2^-precision_bits.

    Bisection keeps endpoints with proven signs of g; it stops early only
    if interval evaluation can no longer separate g from zero, which at
    double precision happens near width 1e-15, far below the default target.
    """
    if not 2 <= precision_bits <= 52:
        raise DegenerateInput("precision_bits must be in [2, 52]")
    lo, hi = _BRACKET
    if not _g(Interval.point(lo)).strictly_below(0.0):
        raise DegenerateInput("left bracket endpoint lost its sign proof")
    if not _g(Interval.point(hi)).strictly_above(0.0):
        raise DegenerateInput("right bracket endpoint lost its sign proof")

    target = 2.0 ** (-precision_bits)
    for _ in range(200):
        if hi - lo <= target:
            break
        mid = 0.5 * (lo + hi)
        gm = _g(Interval.point(mid))
        if gm.strictly_below(0.0):
            lo = mid
        elif gm.strictly_above(0.0):
            hi = mid
        else:
            break       # cannot refine further at this precision
    return Interval(lo, hi)


@dataclass(frozen=True)
class Constants:
    """Shared certified constants, all as intervals.

    b_gw is the critical correlation; alpha_gw the approximation ratio;
    c_gw the completeness value (1 - b_gw)/2; b the bias unit 1 + b_gw;
    nu1, nu2 the two calibration offsets used by the reference blueprint;
    k_uncorrelated = acos(b_gw)/pi, the per-clause value at zero thresholds.
    """

    b_gw: Interval
    alpha_gw: Interval
    c_gw: Interval
    b: Interval
    nu1: Interval
    nu2: Interval
    k_uncorrelated: Interval

    @staticmethod
    def compute(precision_bits: int = 48) -> "Constants":
        b_gw = compute_bgw(precision_bits)
        acos_b = acos_iv(b_gw)
        pi = pi_iv()
        alpha = (2.0 * acos_b) / (pi * (1.0 - b_gw))
        c = (1.0 - b_gw) * 0.5
        return Constants(
            b_gw=b_gw,
            alpha_gw=alpha,
            c_gw=c,
            b=1.0 + b_gw,
            nu1=Interval.from_decimal("0.004"),
            nu2=Interval.from_decimal("0.013"),
            k_uncorrelated=acos_b / pi,
        )


_cache: dict[int, Constants] = {}


def constants(precision_bits: int = 48) -> Constants:
    """Memoized Constants.compute (the enclosure is deterministic)."""
    got = _cache.get(precision_bits)
    if got is None:
        got = Constants.compute(precision_bits)
        _cache[precision_bits] = got
    return got
