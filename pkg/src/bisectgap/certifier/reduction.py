"""Reduction of the soundness maximization to two outer variables.

The certified blueprint's measure sits on the extreme biases, so balance
pins t4 = -(mu_1/mu_4) t1, and since mu_1 < mu_4 the dependent threshold
never reaches +-1.  Of the remaining free thresholds, t3 and t5 each occur
only in configurations not containing the other, so once (t1, t2) are
fixed the maximization over (t3, t5) splits into two one-dimensional
problems.  Every configuration is positive (rho < 0), which makes each
inner partial derivative strictly decreasing in its own threshold; its
root set over a whole (t1, t2) region is therefore contained in an
interval that plain bisection with interval sign proofs can find.  The
certifier never assumes the optimum is unique or interior: it encloses
every root (clamping to the domain edge when no sign proof exists) and
evaluates soundness on the entire enclosure.

Quantile convention: q = (1 - t)/2 and x = Phi^{-1}(q), so x is the
rounding threshold in Gaussian units.  Partials take the form

    d pair(i, j) / d t_i = -1/2 + Phi((x_j - rho x_i) / sqrt(1 - rho^2)),

increasing in both x's because rho < 0.  Thresholds at t = +-1 put x at
+-infinity; those lanes are tracked with explicit flags and the Phi terms
widened to their exact limits 0 or 1, which keeps every enclosure sound
without extended reals.

Region bounds combine two sound upper bounds and take the smaller: the
naive interval evaluation of s over the whole region, and a centered form
s(center) + sum |ds/dt_k over region| * radius_k, whose width shrinks
quadratically near the flat maximum and is what makes the stated running
times reachable.  Both evaluate s with the inner variables on their full
root enclosures, so each upper-bounds the true inner maximum pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from ..blueprint import Blueprint, relative_bias
from ..errors import UnsupportedMeasure
from ..rigor import DEFAULT_CELLS, Interval
from ..rigor.functions import v_phi, v_phi_inv
from ..rigor.gamma import v_gamma
from ..rigor.interval import _add, _div, _half, _mul, _sub, _up

#: Gaussian-unit search window for inner roots; beyond it Phi is within
#: one kernel tail width of {0, 1} and the root is treated as boundary.
_XR = 8.0

#: Probabilities this close to {0, 1} are treated as saturated quantiles.
_Q_SAT = 1e-15

#: Floor for the inner root-finding tolerance (threshold units).
EPS_FLOOR = 2.0 ** -30

#: Indices of the variable roles in bias-sorted order.
_OUTER = (0, 1)
_DEP = 3
_INNER = (2, 4)
_REQUIRED_PAIRS = {(0, 4), (1, 2), (1, 3), (1, 4), (2, 3)}


@dataclass(frozen=True)
class _XQ:
    """Per-lane x-quantile enclosure with saturation flags.

    lo_inf / hi_inf mark lanes whose true quantile lies below -_XR / above
    +_XR; on those lanes the stored endpoint is the clamp value and any
    monotone consumer must widen to the exact limit instead of using it.
    """

    lo: np.ndarray
    hi: np.ndarray
    lo_inf: np.ndarray
    hi_inf: np.ndarray


@dataclass(frozen=True)
class ReducedModel:
    """Validated, precomputed view of a blueprint in the reduced layout."""

    bp: Blueprint
    ratio: Interval
    weights: tuple[Interval, ...]
    rhos: tuple[Interval, ...]
    sdens: tuple[Interval, ...]
    pairs: tuple[tuple[int, int], ...]

    @staticmethod
    def from_blueprint(bp: Blueprint) -> "ReducedModel":
        symbols = bp.symbols()
        if len(symbols) != 5:
            raise UnsupportedMeasure(
                f"reduction needs exactly five biases, got {len(symbols)}")
        support = bp.support()
        expected = (symbols[_OUTER[0]], symbols[_DEP])
        if support != expected:
            raise UnsupportedMeasure(
                f"reduction needs the measure supported on {expected}, got {support}")
        index = {s: k for k, s in enumerate(symbols)}
        pairs = tuple(sorted((index[wc.i], index[wc.j])) for wc in bp.configs)
        pairs = tuple((a, b) for a, b in pairs)
        if set(pairs) != _REQUIRED_PAIRS or len(pairs) != len(_REQUIRED_PAIRS):
            raise UnsupportedMeasure(
                f"configuration pair structure {sorted(pairs)} does not match "
                f"the reduced layout {sorted(_REQUIRED_PAIRS)}")
        weights, rhos, sdens = [], [], []
        for wc in bp.configs:
            rho = relative_bias(wc.theta)
            if rho.hi >= 0.0:
                raise UnsupportedMeasure(
                    f"configuration ({wc.i}, {wc.j}) is not strictly positive; "
                    f"inner partials would not be monotone")
            weights.append(wc.weight)
            rhos.append(rho)
            sdens.append((1.0 - rho.sqr()).sqrt())
        ratio = _mu_ratio(bp)
        return ReducedModel(bp, ratio, tuple(weights), tuple(rhos), tuple(sdens), pairs)

    def touching(self, var: int) -> tuple[tuple[int, int], ...]:
        """(config index, other variable index) for configs containing var."""
        out = []
        for k, (a, b) in enumerate(self.pairs):
            if var == a:
                out.append((k, b))
            elif var == b:
                out.append((k, a))
        return tuple(out)


def _mu_ratio(bp: Blueprint) -> Interval:
    symbols = bp.symbols()
    lo_sym, hi_sym = symbols[_OUTER[0]], symbols[_DEP]
    f1, f4 = bp.mu_fraction(lo_sym), bp.mu_fraction(hi_sym)
    if f1 is not None and f4 is not None and f4 != 0:
        return Interval.from_decimal(str(Fraction(f1, 1) / f4))
    return bp.mu[lo_sym] / bp.mu[hi_sym]


# -- scalar operations (the spec-level API) -----------------------------------


def t4_from_balance(bp: Blueprint, t1: Interval) -> Interval:
    """The dependent threshold -(mu_1/mu_4) t1, intersected with [-1, 1]."""
    symbols = bp.symbols()
    if len(symbols) != 5 or bp.support() != (symbols[_OUTER[0]], symbols[_DEP]):
        raise UnsupportedMeasure(
            "balance elimination needs the measure supported on the first and "
            "fourth biases in sorted order")
    return (-(_mu_ratio(bp) * t1)).intersect(Interval(-1.0, 1.0))


def _quantile(t: Interval) -> Interval:
    """q = (1 - t)/2 with outward rounding."""
    lo, hi = _half(*_sub(1.0, 1.0, t.hi, t.hi))
    lo2, hi2 = _half(*_sub(1.0, 1.0, t.lo, t.lo))
    q = Interval(float(lo), float(hi2))
    return q.intersect(Interval(0.0, 1.0))


def _xq_scalar(t: Interval) -> tuple[Interval, bool, bool]:
    """x-quantile of a threshold interval plus per-side saturation flags."""
    q = _quantile(t)
    xlo, xhi, _ = v_phi_inv(np.asarray(q.lo), np.asarray(q.hi), clamp=_XR)
    return Interval(float(xlo), float(xhi)), q.lo <= _Q_SAT, q.hi >= 1.0 - _Q_SAT


def _phi_term_scalar(rho: Interval, sden: Interval,
                     x_other: Interval, o_lo_inf: bool, o_hi_inf: bool,
                     x_var: Interval, v_lo_inf: bool, v_hi_inf: bool) -> Interval:
    """Phi((x_other - rho x_var)/sden), widened to exact limits on flags."""
    arg = (x_other - rho * x_var) / sden
    plo, phi_ = v_phi(np.asarray(arg.lo), np.asarray(arg.hi))
    lo = 0.0 if (o_lo_inf or v_lo_inf) else float(plo)
    hi = 1.0 if (o_hi_inf or v_hi_inf) else float(phi_)
    return Interval(lo, hi)


def _dpartial(model: ReducedModel, var: int, others: Mapping[int, Interval],
              t_var: Interval) -> Interval:
    xv, v_lo, v_hi = _xq_scalar(t_var)
    total = Interval.point(0.0)
    for cfg, other in model.touching(var):
        xo, o_lo, o_hi = _xq_scalar(others[other])
        term = _phi_term_scalar(model.rhos[cfg], model.sdens[cfg],
                                xo, o_lo, o_hi, xv, v_lo, v_hi)
        total = total + model.weights[cfg] * (term - 0.5)
    return total


def dpartial_t3(bp: Blueprint, t2: Interval, t3: Interval, t4: Interval) -> Interval:
    """Partial derivative of soundness in t3 at the given thresholds."""
    model = ReducedModel.from_blueprint(bp)
    return _dpartial(model, _INNER[0], {1: t2, _DEP: t4}, t3)


def dpartial_t5(bp: Blueprint, t1: Interval, t2: Interval, t5: Interval) -> Interval:
    """Partial derivative of soundness in t5 at the given thresholds."""
    model = ReducedModel.from_blueprint(bp)
    return _dpartial(model, _INNER[1], {0: t1, 1: t2}, t5)


def root_find(df: Callable[[Interval, Interval, Interval], Interval],
              t1: Interval, t2: Interval, eps: float) -> Interval:
    """Interval containing every root of every point-selection of df.

    df(t, t1, t2) must be monotonically decreasing in its first argument on
    [-1, 1] for every point choice in t1 x t2.  Two bisections run to eps/2:
    one keeps a left endpoint where df is provably positive (so no root can
    lie at or below it), the other a right endpoint where df is provably
    negative.  Inconclusive sign tests shrink toward the root side, never
    past it, so the join always contains the root set; with no sign proof
    at all the corresponding endpoint stays at the domain edge.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    half = 0.5 * eps

    lo, hi = -1.0, 1.0
    while hi - lo > half:
        mid = 0.5 * (lo + hi)
        if df(Interval.point(mid), t1, t2).lo > 0.0:
            lo = mid
        else:
            hi = mid
    left = lo

    lo, hi = -1.0, 1.0
    while hi - lo > half:
        mid = 0.5 * (lo + hi)
        if df(Interval.point(mid), t1, t2).hi < 0.0:
            hi = mid
        else:
            lo = mid
    right = hi

    if left > right:
        # only possible when eps is so coarse the proven brackets crossed;
        # fall back to the hull, which certainly contains the root set
        left, right = min(left, right), max(left, right)
    return Interval(left, right)


def reduced_soundness(bp: Blueprint, t1: Interval, t2: Interval,
                      eps: float | None = None, *,
                      cells: int = DEFAULT_CELLS) -> Interval:
    """Enclosure of the inner-maximized soundness over the (t1, t2) region.

    The upper end bounds sup over all points of the region of the maximum
    over (t3, t5); the lower end is the naive evaluation's, so the interval
    also contains the reduced value at every point of the region.
    """
    model = ReducedModel.from_blueprint(bp)
    if eps is None:
        eps = max(EPS_FLOOR, 0.5 * (t1.width + t2.width))
    out = _bound_regions(model,
                         np.asarray([t1.lo]), np.asarray([t1.hi]),
                         np.asarray([t2.lo]), np.asarray([t2.hi]),
                         eps=np.asarray([eps]), cells=cells)
    lo = float(out["naive_lo"][0])
    hi = min(float(out["naive_hi"][0]), float(out["mv_hi"][0]))
    return Interval(max(lo, 0.0), min(max(hi, lo), 1.0))


# -- vectorized region machinery (the engine's workhorse) ---------------------


def _vec_quantile(tlo: np.ndarray, thi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    qlo, _ = _half(*_sub(1.0, 1.0, thi, thi))
    _, qhi = _half(*_sub(1.0, 1.0, tlo, tlo))
    return np.clip(qlo, 0.0, 1.0), np.clip(qhi, 0.0, 1.0)


def _vec_xq(qlo: np.ndarray, qhi: np.ndarray) -> _XQ:
    xlo, xhi, _ = v_phi_inv(qlo, qhi, clamp=_XR)
    return _XQ(xlo, xhi, qlo <= _Q_SAT, qhi >= 1.0 - _Q_SAT)


def _vec_phi_term(rho: Interval, sden: Interval, xo: _XQ, xv: _XQ,
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Phi((x_o - rho x_v)/sden) over lanes, with flag widening."""
    nlo, nhi = _sub(xo.lo, xo.hi,
                    *_mul(np.float64(rho.lo), np.float64(rho.hi), xv.lo, xv.hi))
    alo, ahi = _div(nlo, nhi, np.float64(sden.lo), np.float64(sden.hi))
    plo, phi_ = v_phi(alo, ahi)
    plo = np.where(xo.lo_inf | xv.lo_inf, 0.0, plo)
    phi_ = np.where(xo.hi_inf | xv.hi_inf, 1.0, phi_)
    return plo, phi_


def _point_xq(x: np.ndarray) -> _XQ:
    no = np.zeros(x.shape, dtype=bool)
    return _XQ(x, x, no, no)


def _root_enclose(model: ReducedModel, var: int, xfx: dict[int, _XQ],
                  eps_t: np.ndarray) -> tuple[_XQ, np.ndarray, np.ndarray]:
    """Enclose all roots of the inner partial for `var` over the lanes.

    Returns the x-space enclosure (with boundary flags where no sign proof
    exists) and the induced quantile interval (q_lo, q_hi).  The partial is
    increasing in x, so a proven-negative value at x bounds roots from
    below and a proven-positive value bounds them from above.
    """
    touching = model.touching(var)

    def df(x_pt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xq = _point_xq(x_pt)
        tlo = np.zeros_like(x_pt)
        thi = np.zeros_like(x_pt)
        for cfg, other in touching:
            plo, phi_ = _vec_phi_term(model.rhos[cfg], model.sdens[cfg],
                                      xfx[other], xq)
            w = model.weights[cfg]
            term = _mul(np.float64(w.lo), np.float64(w.hi),
                        *_sub(plo, phi_, 0.5, 0.5))
            tlo, thi = _add(tlo, thi, *term)
        return tlo, thi

    # dt = -2 phi(x) dx, |phi| <= 0.399, so an x-bracket of 1.2533 eps_t
    # maps into a threshold bracket of eps_t; each bisection runs to half.
    eps_x = 0.62665 * np.maximum(eps_t, EPS_FLOOR)

    lo = np.full_like(eps_x, -_XR)
    hi = np.full_like(eps_x, _XR)
    proven_lo = np.zeros(eps_x.shape, dtype=bool)
    for _ in range(64):
        open_ = (hi - lo) > eps_x
        if not np.any(open_):
            break
        mid = 0.5 * (lo + hi)
        _, dhi = df(mid)
        neg = dhi < 0.0
        lo = np.where(open_ & neg, mid, lo)
        proven_lo |= open_ & neg
        hi = np.where(open_ & ~neg, mid, hi)
    left = lo
    left_proven = proven_lo

    lo = np.full_like(eps_x, -_XR)
    hi = np.full_like(eps_x, _XR)
    proven_hi = np.zeros(eps_x.shape, dtype=bool)
    for _ in range(64):
        open_ = (hi - lo) > eps_x
        if not np.any(open_):
            break
        mid = 0.5 * (lo + hi)
        dlo, _ = df(mid)
        pos = dlo > 0.0
        hi = np.where(open_ & pos, mid, hi)
        proven_hi |= open_ & pos
        lo = np.where(open_ & ~pos, mid, lo)
    right = hi
    right_proven = proven_hi

    bad = left > right
    if np.any(bad):
        left = np.where(bad, np.minimum(left, right), left)
        right = np.where(bad, np.maximum(left, right), right)

    xq = _XQ(left, right, ~left_proven, ~right_proven)
    p_l_lo, _ = v_phi(left, left)
    _, p_r_hi = v_phi(right, right)
    q_lo = np.where(left_proven, p_l_lo, 0.0)
    q_hi = np.where(right_proven, p_r_hi, 1.0)
    return xq, np.clip(q_lo, 0.0, 1.0), np.clip(q_hi, 0.0, 1.0)


def _soundness_lanes(model: ReducedModel, q: dict[int, tuple[np.ndarray, np.ndarray]],
                     cells: int) -> tuple[np.ndarray, np.ndarray]:
    """s = sum_cfg w (q_i + q_j - 2 Gamma) over lanes, fixed config order."""
    shape = q[0][0].shape
    n = len(model.pairs)
    r_lo = np.empty((n,) + shape)
    r_hi = np.empty((n,) + shape)
    a_lo = np.empty((n,) + shape)
    a_hi = np.empty((n,) + shape)
    b_lo = np.empty((n,) + shape)
    b_hi = np.empty((n,) + shape)
    for k, (i, j) in enumerate(model.pairs):
        r_lo[k], r_hi[k] = model.rhos[k].lo, model.rhos[k].hi
        a_lo[k], a_hi[k] = q[i]
        b_lo[k], b_hi[k] = q[j]
    g_lo, g_hi = v_gamma(r_lo, r_hi, a_lo, a_hi, b_lo, b_hi, cells=cells)

    s_lo = np.zeros(shape)
    s_hi = np.zeros(shape)
    for k in range(n):
        pv = _sub(*_add(a_lo[k], a_hi[k], b_lo[k], b_hi[k]),
                  2.0 * g_lo[k], 2.0 * g_hi[k])
        pv = (np.clip(pv[0], 0.0, 1.0), np.clip(pv[1], 0.0, 1.0))
        w = model.weights[k]
        term = _mul(np.float64(w.lo), np.float64(w.hi), *pv)
        s_lo, s_hi = _add(s_lo, s_hi, *term)
    return s_lo, s_hi


def _bound_regions(model: ReducedModel,
                   t1lo: np.ndarray, t1hi: np.ndarray,
                   t2lo: np.ndarray, t2hi: np.ndarray, *,
                   eps: np.ndarray, cells: int) -> dict[str, np.ndarray]:
    """All per-region quantities the engine needs, vectorized over lanes.

    Returns naive_lo/naive_hi (s over the region), mv_hi (centered bound),
    center_lo (lower end of s at the region center, for refutation).
    """
    ratio = model.ratio

    # dependent threshold and quantiles over the region
    t4 = _mul(np.float64(-ratio.hi), np.float64(-ratio.lo), t1lo, t1hi)
    q1 = _vec_quantile(t1lo, t1hi)
    q2 = _vec_quantile(t2lo, t2hi)
    q4 = _vec_quantile(*t4)
    xq1 = _vec_xq(*q1)
    xq2 = _vec_xq(*q2)
    xq4 = _vec_xq(*q4)

    # inner roots over the whole region
    xq3, q3lo, q3hi = _root_enclose(model, _INNER[0], {1: xq2, _DEP: xq4}, eps)
    xq5, q5lo, q5hi = _root_enclose(model, _INNER[1], {1: xq2, 0: xq1}, eps)
    q3, q5 = (q3lo, q3hi), (q5lo, q5hi)

    naive_lo, naive_hi = _soundness_lanes(
        model, {0: q1, 1: q2, 2: q3, 3: q4, 4: q5}, cells)

    # center evaluation: G(c) only needs root enclosures for the center
    # itself, so a second, floor-tolerance root pass keeps the centered
    # bound's excess quadratic in the region width instead of linear
    c1 = 0.5 * (t1lo + t1hi)
    c2 = 0.5 * (t2lo + t2hi)
    t4c = _mul(np.float64(-ratio.hi), np.float64(-ratio.lo), c1, c1)
    q1c = _vec_quantile(c1, c1)
    q2c = _vec_quantile(c2, c2)
    q4c = _vec_quantile(*t4c)
    xq1c = _vec_xq(*q1c)
    xq2c = _vec_xq(*q2c)
    xq4c = _vec_xq(*q4c)
    floor = np.full_like(eps, EPS_FLOOR)
    _, q3c_lo, q3c_hi = _root_enclose(model, _INNER[0], {1: xq2c, _DEP: xq4c}, floor)
    _, q5c_lo, q5c_hi = _root_enclose(model, _INNER[1], {1: xq2c, 0: xq1c}, floor)
    center_lo, center_hi = _soundness_lanes(
        model, {0: q1c, 1: q2c, 2: (q3c_lo, q3c_hi), 3: q4c, 4: (q5c_lo, q5c_hi)},
        cells)

    # centered mean-value bound: G(p) <= G(c) + sum |dG over region| rad
    cfg = {pair: k for k, pair in enumerate(model.pairs)}

    def term(pair: tuple[int, int], xo: _XQ, xv: _XQ) -> tuple[np.ndarray, np.ndarray]:
        k = cfg[pair]
        plo, phi_ = _vec_phi_term(model.rhos[k], model.sdens[k], xo, xv)
        w = model.weights[k]
        return _mul(np.float64(w.lo), np.float64(w.hi), *_sub(plo, phi_, 0.5, 0.5))

    d15 = term((0, 4), xq5, xq1)
    d24 = term((1, 3), xq2, xq4)
    d34 = term((2, 3), xq3, xq4)
    dep_lo, dep_hi = _add(d24[0], d24[1], d34[0], d34[1])
    via4 = _mul(np.float64(-ratio.hi), np.float64(-ratio.lo), dep_lo, dep_hi)
    d1 = _add(d15[0], d15[1], *via4)

    e24 = term((1, 3), xq4, xq2)
    e23 = term((1, 2), xq3, xq2)
    e25 = term((1, 4), xq5, xq2)
    d2 = _add(*_add(e24[0], e24[1], e23[0], e23[1]), e25[0], e25[1])

    mag1 = np.maximum(np.abs(d1[0]), np.abs(d1[1]))
    mag2 = np.maximum(np.abs(d2[0]), np.abs(d2[1]))
    rad1 = 0.5 * (t1hi - t1lo)
    rad2 = 0.5 * (t2hi - t2lo)
    mv_hi = _up(_up(center_hi + _up(mag1 * rad1)) + _up(mag2 * rad2))

    return {
        "naive_lo": naive_lo,
        "naive_hi": naive_hi,
        "mv_hi": mv_hi,
        "center_lo": center_lo,
    }
