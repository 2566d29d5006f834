"""Rigorous enclosures of the Gaussian quadrant probability

    Gamma_rho(q1, q2) = P[X <= x1, Y <= x2],   x_i = Phi^{-1}(q_i),

for (X, Y) standard bivariate normal with correlation rho, via the classical
single-integral form

    Gamma_rho(q1, q2) = q1 q2 + int_0^rho f(r) dr,
    f(r) = exp(-(x1^2 - 2 r x1 x2 + x2^2) / (2 (1 - r^2))) / (2 pi sqrt(1 - r^2)),

which follows from d(Gamma)/d(rho) being the bivariate density at (x1, x2).

The integral is enclosed by the midpoint rule with an explicit second
derivative remainder per cell: for each cell [a, b] with exact midpoint m*,

    int_a^b f = (b - a) f(m*) + f''(xi) (b - a)^3 / 24,   xi in [a, b],

where f'' is enclosed in closed form.  Writing f = exp(h)/(2 pi) with
h(r) = -log(1 - r^2)/2 - P(r)/(2 (1 - r^2)) and P(r) = x1^2 - 2 r x1 x2 + x2^2,

    h'(r)  = r/(1-r^2) - N/(1-r^2)^2,          N = r P - x1 x2 (1 - r^2),
    h''(r) = (1+r^2)/(1-r^2)^2 - (P (1-r^2) + 4 r N)/(1-r^2)^3,
    f''    = f (h'' + h'^2).

Monotonicity (Gamma is nondecreasing in each of rho, q1, q2) reduces interval
arguments to two corner evaluations.  Results are intersected with the
comonotone bounds max(0, q1 + q2 - 1) <= Gamma <= min(q1, q2).
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateInput
from .interval import (
    Interval,
    _add,
    _clip,
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
from .functions import TWO_PI, v_exp, v_phi, v_phi_inv

_EPS = float(np.finfo(np.float64).eps)
_RHO_MAX = 0.995
_SAT_PAD = 1e-15        # covers a coordinate truncated at the |x| = 8 clamp
DEFAULT_CELLS = 256


def _sum_enclose(los: np.ndarray, his: np.ndarray, axis: int = -1,
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Enclosure of the exact sum of interval arrays along an axis.

    Uses the standard forward-error bound |fl(sum) - sum| <= n eps sum|x|,
    valid for any summation order at this padding level.
    """
    n = los.shape[axis]
    slo = np.sum(los, axis=axis)
    shi = np.sum(his, axis=axis)
    bound = 1.01 * n * _EPS
    err_lo = _up(bound * np.sum(np.abs(los), axis=axis))
    err_hi = _up(bound * np.sum(np.abs(his), axis=axis))
    return _dn(slo - err_lo), _up(shi + err_hi)


def _density_terms(rlo, rhi, x1lo, x1hi, x2lo, x2hi):
    """Shared pieces of f over an r interval: returns (flo, fhi, plo, phi,
    omlo, omhi) with P and 1 - r^2 exposed for the f'' formula."""
    omlo, omhi = _sub(*_point(1.0), *_sqr(rlo, rhi))
    if np.any(omlo <= 0.0):
        raise DegenerateInput("correlation magnitude too close to 1")
    cross_lo, cross_hi = _mul(x1lo, x1hi, x2lo, x2hi)
    plo, phi_ = _add(*_sqr(x1lo, x1hi), *_sqr(x2lo, x2hi))
    plo, phi_ = _sub(plo, phi_, *_mul(rlo, rhi, 2.0 * cross_lo, 2.0 * cross_hi))
    plo = np.maximum(plo, 0.0)      # P = (x1 - r x2)^2 + (1 - r^2) x2^2 >= 0
    arg_lo, arg_hi = _neg(*_div_pos(plo, phi_, 2.0 * omlo, 2.0 * omhi))
    elo, ehi = v_exp(arg_lo, arg_hi)
    den_lo, den_hi = _mul_pos(*TWO_PI, *_sqrt(omlo, omhi))
    flo, fhi = _div_pos(np.maximum(elo, 0.0), ehi, den_lo, den_hi)
    return np.maximum(flo, 0.0), fhi, plo, phi_, omlo, omhi


def _fpp_bound(rlo, rhi, x1lo, x1hi, x2lo, x2hi):
    """Enclosure of f'' over the r interval (see module docstring)."""
    flo, fhi, plo, phi_, omlo, omhi = _density_terms(rlo, rhi, x1lo, x1hi, x2lo, x2hi)
    cross_lo, cross_hi = _mul(x1lo, x1hi, x2lo, x2hi)
    nlo, nhi = _sub(*_mul(rlo, rhi, plo, phi_),
                    *_mul(cross_lo, cross_hi, omlo, omhi))
    om2lo, om2hi = _sqr(omlo, omhi)
    om3lo, om3hi = _mul(om2lo, om2hi, omlo, omhi)

    h1lo, h1hi = _sub(*_div(rlo, rhi, omlo, omhi), *_div(nlo, nhi, om2lo, om2hi))
    num_lo, num_hi = _add(*_mul(plo, phi_, omlo, omhi),
                          *_mul(4.0 * rlo, 4.0 * rhi, nlo, nhi))
    h2lo, h2hi = _sub(*_div(*_add(*_point(1.0), *_sqr(rlo, rhi)), om2lo, om2hi),
                      *_div(num_lo, num_hi, om3lo, om3hi))
    glo, ghi = _add(h2lo, h2hi, *_sqr(h1lo, h1hi))
    return _mul(flo, fhi, glo, ghi)


def _integral_to(rho_pt: np.ndarray, x1lo, x1hi, x2lo, x2hi, cells: int,
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Enclosure of int_0^rho f(r) dr at per-lane point endpoints rho_pt.

    rho_pt has shape (...,); x arrays broadcast against it.  The cell grids
    are per-lane linspaces from 0 to rho (signed integral handled directly:
    cells run from 0 to rho, so h < 0 encodes the orientation).
    """
    rho_pt = np.asarray(rho_pt, dtype=np.float64)
    shape = rho_pt.shape
    edges = np.linspace(np.zeros(shape), rho_pt, cells + 1, axis=-1)
    e0 = edges[..., :-1]
    e1 = edges[..., 1:]

    hlo, hhi = _sub(e1, e1, e0, e0)              # signed cell widths
    mid = 0.5 * (e0 + e1)
    mlo, mhi = _dn(mid), _up(mid)                # true midpoint enclosure

    x1lo_b = np.expand_dims(np.broadcast_to(x1lo, shape), -1)
    x1hi_b = np.expand_dims(np.broadcast_to(x1hi, shape), -1)
    x2lo_b = np.expand_dims(np.broadcast_to(x2lo, shape), -1)
    x2hi_b = np.expand_dims(np.broadcast_to(x2hi, shape), -1)

    flo, fhi, *_ = _density_terms(mlo, mhi, x1lo_b, x1hi_b, x2lo_b, x2hi_b)
    main_lo, main_hi = _mul(hlo, hhi, flo, fhi)
    sum_lo, sum_hi = _sum_enclose(main_lo, main_hi, axis=-1)

    # The f'' factor of the midpoint-rule remainder only needs a crude
    # magnitude bound, so it is evaluated on blocks of cells rather than per
    # cell; the h^3 factor keeps its per-cell resolution.
    bs = 16 if cells % 16 == 0 else 1
    blocks = cells // bs
    b0 = edges[..., :-1:bs]
    b1 = edges[..., bs::bs]
    blk_lo = np.minimum(b0, b1)
    blk_hi = np.maximum(b0, b1)
    plo, phi_ = _fpp_bound(blk_lo, blk_hi, x1lo_b, x1hi_b, x2lo_b, x2hi_b)
    mag_fpp = np.maximum(np.abs(plo), np.abs(phi_))

    mag_h = np.maximum(np.abs(hlo), np.abs(hhi))
    h3 = _up(_up(mag_h * mag_h) * mag_h)
    h3_blk = _up(np.sum(h3.reshape(*h3.shape[:-1], blocks, bs), axis=-1)
                 * (1.0 + 32.0 * _EPS))
    rem_blk = _up(_up(mag_fpp * h3_blk) / 24.0)
    rem = _up(np.sum(rem_blk, axis=-1) * (1.0 + 1.01 * blocks * _EPS))

    return _dn(sum_lo - rem), _up(sum_hi + rem)


def v_gamma(rho_lo: np.ndarray, rho_hi: np.ndarray,
            q1lo: np.ndarray, q1hi: np.ndarray,
            q2lo: np.ndarray, q2hi: np.ndarray,
            *, cells: int = DEFAULT_CELLS,
            ) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Gamma enclosure over interval arrays (lanes broadcast)."""
    rho_lo, rho_hi, q1lo, q1hi, q2lo, q2hi = np.broadcast_arrays(
        np.asarray(rho_lo, dtype=np.float64), np.asarray(rho_hi, dtype=np.float64),
        np.asarray(q1lo, dtype=np.float64), np.asarray(q1hi, dtype=np.float64),
        np.asarray(q2lo, dtype=np.float64), np.asarray(q2hi, dtype=np.float64))
    if np.any(np.maximum(np.abs(rho_lo), np.abs(rho_hi)) > _RHO_MAX):
        raise DegenerateInput(f"|rho| > {_RHO_MAX} is outside the quadrature domain")
    q1lo, q1hi = _clip(q1lo, q1hi, 0.0, 1.0)
    q2lo, q2hi = _clip(q2lo, q2hi, 0.0, 1.0)

    lo = _corner(rho_lo, q1lo, q2lo, cells, lower=True)
    hi = _corner(rho_hi, q1hi, q2hi, cells, lower=False)

    # comonotone bounds, also the exact values at degenerate q
    fre_lo = np.maximum(_dn(_dn(q1lo + q2lo) - 1.0), 0.0)
    fre_hi = np.minimum(q1hi, q2hi)
    lo = np.minimum(np.maximum(lo, fre_lo), fre_hi)
    hi = np.minimum(np.maximum(hi, fre_lo), fre_hi)
    return lo, hi


def _corner(rho_pt, q1_pt, q2_pt, cells: int, *, lower: bool) -> np.ndarray:
    x1lo, x1hi, sat1 = v_phi_inv(q1_pt, q1_pt)
    x2lo, x2hi, sat2 = v_phi_inv(q2_pt, q2_pt)
    ilo, ihi = _integral_to(rho_pt, x1lo, x1hi, x2lo, x2hi, cells)
    qq_lo, qq_hi = _mul(q1_pt, q1_pt, q2_pt, q2_pt)
    glo, ghi = _add(qq_lo, qq_hi, ilo, ihi)
    pad = _SAT_PAD * (sat1.astype(np.float64) + sat2.astype(np.float64))
    if lower:
        return _dn(glo - pad)
    return _up(ghi + pad)


# -- scalar API --------------------------------------------------------------

def gamma(rho: Interval, q1: Interval, q2: Interval,
          *, cells: int = DEFAULT_CELLS) -> Interval:
    """Enclosure of Gamma_rho(q1, q2) over interval arguments.

    Degenerate limits return exact results: either q at 0 gives 0, q at 1
    returns the other coordinate, rho = 0 gives the product, and rho = +-1
    gives the comonotone/antimonotone values.
    """
    q1 = Interval(max(q1.lo, 0.0), min(q1.hi, 1.0))
    q2 = Interval(max(q2.lo, 0.0), min(q2.hi, 1.0))

    if q1.hi == 0.0 or q2.hi == 0.0:
        return Interval.point(0.0)
    if q1.lo == 1.0:
        return q2
    if q2.lo == 1.0:
        return q1
    if rho.lo == 0.0 and rho.hi == 0.0:
        return q1 * q2
    if rho.lo == 1.0 and rho.hi == 1.0:
        return Interval(min(q1.lo, q2.lo), min(q1.hi, q2.hi))
    if rho.lo == -1.0 and rho.hi == -1.0:
        s = q1 + q2 - 1.0
        return Interval(max(s.lo, 0.0), max(s.hi, 0.0))

    lo, hi = v_gamma(np.asarray(rho.lo), np.asarray(rho.hi),
                     np.asarray(q1.lo), np.asarray(q1.hi),
                     np.asarray(q2.lo), np.asarray(q2.hi), cells=cells)
    return Interval(float(lo), float(hi))


def gamma_partials(rho: Interval, q1: Interval, q2: Interval,
                   ) -> tuple[Interval, Interval, Interval]:
    """Enclosures of (dGamma/drho, dGamma/dq1, dGamma/dq2).

    dGamma/drho is the bivariate density at (x1, x2); dGamma/dq1 is
    Phi((x2 - rho x1)/sqrt(1 - rho^2)) and symmetrically for q2.  Requires
    interior probabilities (no quantile saturation) and |rho| < 1.
    """
    if max(abs(rho.lo), abs(rho.hi)) > _RHO_MAX:
        raise DegenerateInput(f"|rho| > {_RHO_MAX} is outside the partials domain")
    x1lo, x1hi, sat1 = v_phi_inv(np.asarray(q1.lo), np.asarray(q1.hi))
    x2lo, x2hi, sat2 = v_phi_inv(np.asarray(q2.lo), np.asarray(q2.hi))
    if bool(sat1) or bool(sat2):
        raise DegenerateInput("gamma_partials needs interior probabilities")
    rlo, rhi = np.asarray(rho.lo), np.asarray(rho.hi)

    flo, fhi, *_ = _density_terms(rlo, rhi, x1lo, x1hi, x2lo, x2hi)
    d_rho = Interval(float(flo), float(fhi))

    slo, shi = _sqrt(*_sub(*_point(1.0), *_sqr(rlo, rhi)))
    a1lo, a1hi = _div(*_sub(x2lo, x2hi, *_mul(rlo, rhi, x1lo, x1hi)), slo, shi)
    a2lo, a2hi = _div(*_sub(x1lo, x1hi, *_mul(rlo, rhi, x2lo, x2hi)), slo, shi)
    p1 = v_phi(a1lo, a1hi)
    p2 = v_phi(a2lo, a2hi)
    d_q1 = Interval(float(p1[0]), float(p1[1]))
    d_q2 = Interval(float(p2[0]), float(p2[1]))
    return d_rho, d_q1, d_q2
