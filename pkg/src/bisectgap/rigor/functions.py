"""Rigorous enclosures of exp, erf, the normal CDF, arccos, and the normal
quantile, built from series with explicit tail bounds.

Nothing in this module calls a library transcendental on the rigorous path.
Each kernel evaluates a truncated series in outward-rounded interval
arithmetic and then widens by a proven remainder bound:

* exp: argument reduction x = k ln2 + r with |r| <= 0.36, degree-14 Taylor
  polynomial, remainder |r|^15/15! / (1 - |r|/16) <= 2e-19, exact ldexp.
* erf on [0, 4.31]: the cancellation-free form
  erf(z) = (2/sqrt(pi)) e^{-z^2} sum_n (2 z^2)^n z / (2n+1)!!,
  56 terms, geometric tail (term ratio 2 z^2/(2n+3) <= 0.33).
* Phi beyond the erf range: the Mills-ratio envelope
  pdf(a) (1/a - 1/a^3) <= 1 - Phi(a) <= pdf(a) (1/a - 1/a^3 + 3/a^5),
  valid for a > 0 (alternating asymptotic series, remainder has the sign
  of the first omitted term).  Past |x| = 8 the tail is enclosed in
  [0, 7e-16], which already contains 1 - Phi(8) = 6.22e-16.
* asin on [-0.5, 0.5]: sum_n C(2n,n) u^{2n+1} / (4^n (2n+1)), 32 terms,
  geometric tail with ratio u^2; arccos by the half-angle reductions
  acos(u) = 2 asin(sqrt((1-u)/2)) for u >= 1/2 and the reflection
  acos(u) = pi - acos(-u).
* Phi^{-1}: a non-rigorous rational seed stepped outward until the interval
  Phi proves the bracketing.  Only the final proofs matter for rigor.

All kernels are vectorized over ndarrays; the scalar API wraps them.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DegenerateInput
from .interval import (
    Interval,
    _add,
    _clip,
    _const,
    _div,
    _div_pos,
    _dn,
    _mul,
    _mul_pos,
    _neg,
    _point,
    _sqr,
    _sqrt,
    _sub,
    _up,
)

# -- shared interval constants (1 ulp of slack on each side) ---------------

LN2 = _const(math.log(2.0))
PI = _const(math.pi)
HALF_PI = (0.5 * PI[0], 0.5 * PI[1])
TWO_PI = (2.0 * PI[0], 2.0 * PI[1])
SQRT2 = _sqrt(*_point(2.0))
SQRT_2PI = _sqrt(*TWO_PI)
TWO_OVER_SQRT_PI = _div(*_point(2.0), *_sqrt(*PI))

_N_EXP = 15
_EXP_TAIL = 2e-19          # >= 0.36^15/15! / (1 - 0.36/16)
_N_ERF = 56
_ERF_ZMAX = 4.31           # 6/sqrt(2) plus slack; 2 z^2/(2*56+3) < 0.33
_N_ASIN = 32
_TAIL_CROSSOVER = 6.0
_TAIL_CLAMP = 8.0
_CLAMP_TAIL = 7e-16        # encloses 1 - Phi(8) = 6.22e-16

_INV_FACT = [_const(1.0 / math.factorial(n)) for n in range(_N_EXP)]
_INV_FACT[0] = _point(1.0)
_INV_FACT[1] = _point(1.0)
_INV_FACT[2] = _point(0.5)


def v_exp(xlo: np.ndarray, xhi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Enclosure of exp over an interval array; monotone, so endpoint evals."""
    lo, _ = _exp_point(np.asarray(xlo, dtype=np.float64))
    _, hi = _exp_point(np.asarray(xhi, dtype=np.float64))
    return lo, hi


def _exp_point(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    if np.any(x > 4.0):
        raise DegenerateInput("exp kernel is restricted to arguments <= 4")
    tiny = x < -744.0        # exp(-744) underflows; enclose by [0, 5e-324]
    xs = np.where(tiny, 0.0, x)

    k = np.rint(xs / math.log(2.0))
    klo, khi = _mul(k, k, *LN2)
    rlo, rhi = _sub(xs, xs, klo, khi)
    if np.any(np.maximum(np.abs(rlo), np.abs(rhi)) > 0.36):
        raise DegenerateInput("exp argument reduction left |r| > 0.36")

    plo = np.broadcast_to(_INV_FACT[_N_EXP - 1][0], xs.shape).copy()
    phi_ = np.broadcast_to(_INV_FACT[_N_EXP - 1][1], xs.shape).copy()
    for n in range(_N_EXP - 2, -1, -1):
        plo, phi_ = _mul(plo, phi_, rlo, rhi)
        plo, phi_ = _add(plo, phi_, *_INV_FACT[n])
    plo = _dn(plo - _EXP_TAIL)
    phi_ = _up(phi_ + _EXP_TAIL)

    ki = k.astype(np.int64)
    lo = _dn(np.ldexp(plo, ki))
    hi = _up(np.ldexp(phi_, ki))
    lo = np.maximum(lo, 0.0)
    lo = np.where(tiny, 0.0, lo)
    hi = np.where(tiny, 5e-324, hi)
    return lo, hi


# series length ladder keyed on each lane's own z^2, so a lane's result
# never depends on what else shares the batch
_ERF_EDGES = np.array([0.7, 2.4, 6.5])
_ERF_TERMS = (18, 26, 38, _N_ERF)


def _erf_series(z: np.ndarray, z2lo: np.ndarray, z2hi: np.ndarray, n_terms: int,
                ) -> tuple[np.ndarray, np.ndarray]:
    wlo, whi = 2.0 * z2lo, 2.0 * z2hi
    tlo, thi = z.copy(), z.copy()
    slo, shi = z.copy(), z.copy()
    for n in range(n_terms):
        tlo, thi = _mul_pos(tlo, thi, wlo, whi)
        c = 2.0 * n + 3.0
        tlo, thi = _div_pos(tlo, thi, c, c)
        slo, shi = _add(slo, shi, tlo, thi)
    # geometric tail: remaining terms are positive and dominated by
    # t_N * q^j with q = 2 z^2 / (2 N + 3) < 1
    q = _up(whi / (2.0 * n_terms + 3.0))
    if np.any(q >= 1.0):
        raise DegenerateInput("erf tail ratio >= 1")
    tail = _up(_up(thi * q) / _dn(1.0 - q))
    shi = _up(shi + tail)

    elo, ehi = v_exp(*_neg(z2lo, z2hi))
    flo, fhi = _mul(slo, shi, elo, ehi)
    flo, fhi = _mul(flo, fhi, *TWO_OVER_SQRT_PI)
    return np.maximum(flo, 0.0), np.minimum(fhi, 1.0)


def _erf_point(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """erf at nonnegative points z <= _ERF_ZMAX."""
    z = np.asarray(z, dtype=np.float64)
    if np.any((z < 0.0) | (z > _ERF_ZMAX)):
        raise DegenerateInput("erf kernel expects 0 <= z <= 4.31")
    z2lo, z2hi = _sqr(z, z)

    zf = z.reshape(-1)
    lof = z2lo.reshape(-1)
    hif = z2hi.reshape(-1)
    out_lo = np.empty_like(zf)
    out_hi = np.empty_like(zf)
    bucket = np.searchsorted(_ERF_EDGES, hif, side="left")
    for k, n_terms in enumerate(_ERF_TERMS):
        sel = np.flatnonzero(bucket == k)
        if sel.size:
            out_lo[sel], out_hi[sel] = _erf_series(
                zf[sel], lof[sel], hif[sel], n_terms)
    return out_lo.reshape(z.shape), out_hi.reshape(z.shape)


def _upper_tail(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Enclosure of 1 - Phi(a) for point array a > 0 (Mills envelope)."""
    alo, ahi = a.copy(), a.copy()
    a2lo, a2hi = _sqr(alo, ahi)
    pdf_lo, pdf_hi = v_exp(*_neg(*(0.5 * a2lo, 0.5 * a2hi)))
    pdf_lo, pdf_hi = _div(pdf_lo, pdf_hi, *SQRT_2PI)

    inv1lo, inv1hi = _div(*_point(1.0), alo, ahi)
    inv3lo, inv3hi = _mul(inv1lo, inv1hi, *_div(*_point(1.0), a2lo, a2hi))
    inv5lo, inv5hi = _mul(inv3lo, inv3hi, *_div(*_point(1.0), a2lo, a2hi))
    # bracket: (1/a - 1/a^3) <= (1-Phi)/pdf <= (1/a - 1/a^3 + 3/a^5)
    dlo, dhi = _sub(inv1lo, inv1hi, inv3lo, inv3hi)
    _, bhi = _add(dlo, dhi, *_mul(inv5lo, inv5hi, *_point(3.0)))
    qlo, qhi = _mul(pdf_lo, pdf_hi, dlo, bhi)
    return np.maximum(qlo, 0.0), qhi


def _phi_point(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Enclosure of the standard normal CDF at point array x."""
    x = np.asarray(x, dtype=np.float64)
    ax = np.abs(x)
    in_erf = ax <= _TAIL_CROSSOVER
    in_mills = ~in_erf & (ax < _TAIL_CLAMP)

    if np.any(in_erf):
        axa = np.minimum(ax, _TAIL_CROSSOVER)
        zlo, zhi = _div(axa, axa, *SQRT2)
        zlo = np.clip(zlo, 0.0, _ERF_ZMAX)
        zhi = np.clip(zhi, 0.0, _ERF_ZMAX)
        erf_lo_e, _ = _erf_point(zlo)
        _, erf_hi_e = _erf_point(zhi)
        pa_lo = _dn(0.5 + 0.5 * erf_lo_e)
        pa_hi = _up(0.5 + 0.5 * erf_hi_e)
    else:
        pa_lo = pa_hi = np.zeros_like(ax)

    if np.any(in_mills):
        axb = np.clip(ax, _TAIL_CROSSOVER, _TAIL_CLAMP)
        qb_lo, qb_hi = _upper_tail(axb)
        pb_lo = _dn(1.0 - qb_hi)
        pb_hi = _up(1.0 - qb_lo)
    else:
        pb_lo = pb_hi = np.zeros_like(ax)

    up_lo = np.where(in_erf, pa_lo, np.where(in_mills, pb_lo, 1.0 - _CLAMP_TAIL))
    up_hi = np.where(in_erf, pa_hi, np.where(in_mills, pb_hi, 1.0))

    neg = x < 0.0
    lo = np.where(neg, _dn(1.0 - up_hi), up_lo)
    hi = np.where(neg, _up(1.0 - up_lo), up_hi)
    return np.clip(lo, 0.0, 1.0), np.clip(hi, 0.0, 1.0)


def v_phi(xlo: np.ndarray, xhi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Enclosure of Phi over interval arrays (monotone, endpoint evals)."""
    lo, _ = _phi_point(np.asarray(xlo, dtype=np.float64))
    _, hi = _phi_point(np.asarray(xhi, dtype=np.float64))
    return lo, hi


def _asin_small_point(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """asin at point arrays with |u| <= 0.5 + a little slack."""
    u = np.asarray(u, dtype=np.float64)
    if np.any(np.abs(u) > 0.501):
        raise DegenerateInput("asin kernel expects |u| <= 0.5")
    u2lo, u2hi = _sqr(u, u)
    tlo, thi = u.copy(), u.copy()
    slo, shi = u.copy(), u.copy()
    for n in range(_N_ASIN):
        num = (2.0 * n + 1.0) ** 2          # exact for n <= 31
        den = (2.0 * n + 2.0) * (2.0 * n + 3.0)
        tlo, thi = _mul(tlo, thi, u2lo, u2hi)
        tlo, thi = _mul(tlo, thi, *_point(num))
        tlo, thi = _div(tlo, thi, *_point(den))
        slo, shi = _add(slo, shi, tlo, thi)
    # all terms share the sign of u and the ratio is < u^2 <= 0.2511
    q = _up(u2hi)
    tmag = np.maximum(np.abs(tlo), np.abs(thi))
    tail = _up(_up(tmag * q) / _dn(1.0 - q))
    return _dn(slo - tail), _up(shi + tail)


def _acos_point(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """arccos at point arrays, -1 <= u <= 1."""
    u = np.asarray(u, dtype=np.float64)
    if np.any((u < -1.0) | (u > 1.0)):
        raise DegenerateInput("acos argument outside [-1, 1]")

    # high branch u >= 0.5: acos(u) = 2 asin(sqrt((1-u)/2))
    uh = np.maximum(u, 0.5)
    hlo, hhi = _sqrt(*_clip(*(0.5 * _dn(1.0 - uh), 0.5 * _up(1.0 - uh)), 0.0, 0.2501))
    ah_lo, ah_hi = _asin_endpoints(hlo, hhi)
    high = (2.0 * ah_lo, 2.0 * ah_hi)

    # low branch u <= -0.5: acos(u) = pi - 2 asin(sqrt((1+u)/2))
    ul = np.minimum(u, -0.5)
    llo, lhi = _sqrt(*_clip(*(0.5 * _dn(1.0 + ul), 0.5 * _up(1.0 + ul)), 0.0, 0.2501))
    al_lo, al_hi = _asin_endpoints(llo, lhi)
    low = _sub(*PI, 2.0 * al_lo, 2.0 * al_hi)

    # middle branch |u| <= 0.5: acos(u) = pi/2 - asin(u)
    um = np.clip(u, -0.5, 0.5)
    am_lo, am_hi = _asin_small_point(um)
    midb = _sub(*HALF_PI, am_lo, am_hi)

    lo = np.where(u >= 0.5, high[0], np.where(u <= -0.5, low[0], midb[0]))
    hi = np.where(u >= 0.5, high[1], np.where(u <= -0.5, low[1], midb[1]))
    return np.maximum(lo, 0.0), np.minimum(hi, _up(PI[1]))


def _asin_endpoints(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, _ = _asin_small_point(lo)
    _, b = _asin_small_point(hi)
    return a, b


def v_acos(xlo: np.ndarray, xhi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Enclosure of arccos over interval arrays (decreasing, swap ends)."""
    lo, _ = _acos_point(np.asarray(xhi, dtype=np.float64))
    _, hi = _acos_point(np.asarray(xlo, dtype=np.float64))
    return lo, hi


# -- normal quantile ---------------------------------------------------------

# Rational approximation coefficients for the inverse normal CDF
# (Acklam's widely used fit, |relative error| < 1.15e-9).  The value is only
# a seed; every returned endpoint is certified by the interval Phi above.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)


def _ndtri_seed(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    p = np.clip(p, 1e-300, 1.0 - 1e-16)
    out = np.empty_like(p)

    low = p < 0.02425
    high = p > 1.0 - 0.02425
    mid = ~(low | high)

    if np.any(mid):
        q = p[mid] - 0.5
        r = q * q
        num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        out[mid] = q * num / den
    if np.any(low):
        q = np.sqrt(-2.0 * np.log(p[low]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        out[low] = num / den
    if np.any(high):
        q = np.sqrt(-2.0 * np.log(1.0 - p[high]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        out[high] = -num / den
    return out


def v_phi_inv(qlo: np.ndarray, qhi: np.ndarray, clamp: float = _TAIL_CLAMP,
              ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Certified enclosure of Phi^{-1} over interval arrays.

    Returns (xlo, xhi, saturated) where xlo is proven to satisfy
    Phi(xlo) <= qlo and xhi to satisfy Phi(xhi) >= qhi, both within
    [-clamp, clamp].  When a target is unreachable inside the clamp the
    endpoint saturates and the lane is flagged.
    """
    qlo = np.asarray(qlo, dtype=np.float64)
    qhi = np.asarray(qhi, dtype=np.float64)
    if np.any(qlo > qhi) or np.any(qlo < 0.0) or np.any(qhi > 1.0):
        raise DegenerateInput("phi_inv expects subintervals of [0, 1]")

    seed_lo = np.clip(_ndtri_seed(qlo), -clamp, clamp)
    seed_hi = np.clip(_ndtri_seed(qhi), -clamp, clamp)

    xlo, sat_lo = _certify_side(seed_lo, qlo, clamp, lower=True)
    xhi, sat_hi = _certify_side(seed_hi, qhi, clamp, lower=False)
    return xlo, xhi, sat_lo | sat_hi


def _certify_side(seed: np.ndarray, q: np.ndarray, clamp: float, *, lower: bool,
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Find per-lane x with a Phi-proof on the requested side of q.

    lower=True:  Phi(x).hi <= q, as large as conveniently possible.
    lower=False: Phi(x).lo >= q, as small as conveniently possible.
    The seed is untrusted; the direction of every move is driven by proofs.
    """
    sign = -1.0 if lower else 1.0
    edge = sign * clamp

    def proven(x):
        p_lo, p_hi = _phi_point(x)
        return (p_hi <= q) if lower else (p_lo >= q)

    x = seed.copy()
    sat = np.zeros(q.shape, dtype=bool)
    step = 1e-8
    for _ in range(64):
        ok = proven(x)
        if np.all(ok | sat):
            break
        at_edge = ~ok & (sign * x >= clamp)
        sat |= at_edge
        move = ~ok & ~at_edge
        if not np.any(move):
            break
        x = np.where(move, np.clip(x + sign * step, -clamp, clamp), x)
        step *= 4.0
    else:
        raise DegenerateInput("phi_inv certification did not converge")
    x = np.where(sat, edge, x)

    # tighten: bisect between the proven point and the unproven seed
    good, bad = x.copy(), seed.copy()
    for _ in range(6):
        m = 0.5 * (good + bad)
        ok = proven(m)
        good = np.where(ok & ~sat, m, good)
        bad = np.where(~ok, m, bad)
    return good, sat


# -- scalar API --------------------------------------------------------------

def exp_iv(x: Interval) -> Interval:
    lo, hi = v_exp(*_point(x.lo), *_point(x.hi))
    return Interval(float(lo), float(hi))


def phi_cdf(x: Interval) -> Interval:
    """Enclosure of the standard normal CDF over the interval x."""
    lo, hi = v_phi(np.asarray(x.lo), np.asarray(x.hi))
    return Interval(float(lo), float(hi))


def acos_iv(x: Interval) -> Interval:
    lo, hi = v_acos(np.asarray(x.lo), np.asarray(x.hi))
    return Interval(float(lo), float(hi))


def asin_iv(x: Interval) -> Interval:
    """asin through acos to reuse the reductions: asin(u) = pi/2 - acos(u)."""
    a = acos_iv(x)
    return Interval(float(_dn(0.5 * PI[0] - a.hi)), float(_up(0.5 * PI[1] - a.lo)))


def pi_iv() -> Interval:
    return Interval(float(PI[0]), float(PI[1]))


def phi_inv(q: Interval, *, clamp: float = _TAIL_CLAMP) -> Interval:
    iv, _ = phi_inv_ex(q, clamp=clamp)
    return iv


def phi_inv_ex(q: Interval, *, clamp: float = _TAIL_CLAMP) -> tuple[Interval, bool]:
    """phi_inv plus a flag telling whether either endpoint saturated at the
    clamp magnitude (degenerate tail probabilities).

    The probability argument is intersected with [0, 1] first; only a q
    entirely outside the domain is an error.
    """
    if q.hi < 0.0 or q.lo > 1.0:
        raise EmptyDomain(f"probability interval {q} misses [0, 1]")
    qlo = min(max(q.lo, 0.0), 1.0)
    qhi = min(max(q.hi, 0.0), 1.0)
    xlo, xhi, sat = v_phi_inv(np.asarray(qlo), np.asarray(qhi), clamp)
    return Interval(float(xlo), float(xhi)), bool(sat)
