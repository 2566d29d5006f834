"""Interval arithmetic, transcendental enclosures, and the constants."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bisectgap.errors import DegenerateInput, EmptyDomain
from bisectgap.rigor import (
    Interval,
    compute_bgw,
    constants,
    gamma,
    gamma_partials,
    phi_cdf,
    phi_inv,
    phi_inv_ex,
)

from conftest import (
    ORACLE_ACOS_BGW_OVER_PI,
    ORACLE_ALPHA_GW,
    ORACLE_B_GW,
    ORACLE_C_GW,
    assert_contains,
    assert_overlap,
)

finite = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)
small = st.floats(min_value=-0.999, max_value=0.999)
unit_q = st.floats(min_value=0.001, max_value=0.999)


def widen(x: float, r: float = 1e-9) -> Interval:
    return Interval(x - r, x + r)


class TestIntervalArithmetic:
    @given(finite, finite, finite, finite)
    def test_add_mul_containment(self, a, b, c, d):
        x = Interval(min(a, b), max(a, b))
        y = Interval(min(c, d), max(c, d))
        for px in (x.lo, x.hi, x.mid):
            for py in (y.lo, y.hi, y.mid):
                assert_contains(x + y, px + py, "sum")
                assert_contains(x - y, px - py, "difference")
                assert_contains(x * y, px * py, "product")

    @given(finite, finite, st.floats(min_value=0.5, max_value=40.0))
    def test_division_containment(self, a, b, denom):
        x = Interval(min(a, b), max(a, b))
        y = Interval(denom, denom * 1.5)
        for px in (x.lo, x.hi):
            for py in (y.lo, y.hi):
                assert_contains(x / y, px / py, "quotient")

    @given(st.floats(min_value=0.0, max_value=1e6), st.floats(min_value=0.0, max_value=10.0))
    def test_sqrt_sqr_containment(self, base, spread):
        x = Interval(base, base + spread)
        assert_contains(x.sqrt(), math.sqrt(x.mid), "sqrt")
        assert_contains(x.sqr(), x.mid * x.mid, "square")
        assert x.sqrt().lo >= 0.0

    @given(finite)
    def test_point_and_width(self, a):
        p = Interval.point(a)
        assert p.lo == p.hi == a
        assert p.width == 0.0
        assert widen(a).width > 0.0

    def test_mass_point_containment_sweep(self):
        # enclosure soundness on a large cheap sweep: point arithmetic
        # stays inside the interval image of a small box around the point
        rng = np.random.default_rng(20260815)
        xs = rng.uniform(-20, 20, size=20_000)
        ys = rng.uniform(0.1, 20, size=20_000)
        for x, y in zip(xs, ys):
            ix, iy = widen(x, 1e-10), widen(y, 1e-10)
            assert_contains(ix * iy + ix / iy - iy.sqr(), x * y + x / y - y * y)


class TestPhi:
    def test_phi_zero(self):
        assert_contains(phi_cdf(Interval.point(0.0)), 0.5)

    def test_phi_saturation(self):
        assert phi_cdf(Interval.point(-40.0)).lo <= 0.0 + 1e-15
        assert phi_cdf(Interval.point(40.0)).hi >= 1.0 - 1e-15

    def test_phi_small_argument_series(self):
        # 0.5 + c/sqrt(2 pi) - c^3/(6 sqrt(2 pi)) at c = 0.1
        approx = 0.5 + 0.1 / math.sqrt(2 * math.pi) - 0.001 / (6 * math.sqrt(2 * math.pi))
        iv = phi_cdf(Interval.point(0.1))
        assert abs(iv.mid - approx) <= 1e-6

    def test_phi_oracle_value(self):
        # mpmath ncdf(1.2345) at 25 digits
        assert_contains(phi_cdf(Interval.point(1.2345)), 0.8914916766373298392559653)

    @given(finite, finite)
    def test_phi_monotone(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert phi_cdf(Interval.point(lo)).lo <= phi_cdf(Interval.point(hi)).hi + 1e-15

    @given(st.floats(min_value=-8.0, max_value=8.0))
    def test_phi_symmetry(self, x):
        total = phi_cdf(Interval.point(x)) + phi_cdf(Interval.point(-x))
        assert_contains(total, 1.0, "phi symmetry")

    @given(st.floats(min_value=-6.0, max_value=6.0))
    def test_phi_bounds(self, x):
        iv = phi_cdf(widen(x, 1e-6))
        assert iv.lo >= -1e-15 and iv.hi <= 1.0 + 1e-15


class TestPhiInv:
    def test_median(self):
        assert_contains(phi_inv(Interval.point(0.5)), 0.0)

    def test_known_quantile(self):
        iv = phi_inv(Interval.point(0.975))
        assert abs(iv.mid - 1.959964) <= 1e-5

    @given(st.floats(min_value=-5.0, max_value=5.0))
    def test_round_trip(self, x):
        q = phi_cdf(Interval.point(x))
        assert_contains(phi_inv(q), x, "phi_inv round trip")

    def test_degenerate_flagged(self):
        iv, degenerate = phi_inv_ex(Interval(0.0, 0.1))
        assert degenerate and iv.lo <= -8.0
        iv, degenerate = phi_inv_ex(Interval(0.4, 0.6))
        assert not degenerate

    def test_empty_domain(self):
        with pytest.raises(EmptyDomain):
            phi_inv(Interval(1.5, 2.0))


class TestGamma:
    def test_independence(self):
        assert_contains(gamma(Interval.point(0.0), Interval.point(0.5), Interval.point(0.5)), 0.25)

    def test_quadrant_identity_sweep(self):
        half = Interval.point(0.5)
        for k in range(100):
            rho = -0.99 + 1.98 * k / 99
            iv = gamma(Interval.point(rho), half, half)
            target = 0.25 + math.asin(rho) / (2 * math.pi)
            assert abs(iv.mid - target) <= iv.width + 1e-15, (rho, iv, target)

    @given(unit_q, small)
    def test_marginal_limits(self, q, rho):
        r, qq = Interval.point(rho), Interval.point(q)
        assert_contains(gamma(r, qq, Interval.point(1.0)), q, "upper marginal")
        assert_contains(gamma(r, qq, Interval.point(0.0)), 0.0, "lower marginal")

    @given(small, unit_q, unit_q)
    def test_symmetry(self, rho, q1, q2):
        a = gamma(Interval.point(rho), Interval.point(q1), Interval.point(q2))
        b = gamma(Interval.point(rho), Interval.point(q2), Interval.point(q1))
        assert_overlap(a, b, "gamma symmetry")

    @given(small, unit_q, unit_q, unit_q)
    def test_monotone(self, rho, q1, q1p, q2):
        lo_q, hi_q = min(q1, q1p), max(q1, q1p)
        r = Interval.point(rho)
        a = gamma(r, Interval.point(lo_q), Interval.point(q2))
        b = gamma(r, Interval.point(hi_q), Interval.point(q2))
        assert a.lo <= b.hi + 1e-15
        c = gamma(Interval.point(min(rho, 0.5)), Interval.point(q2), Interval.point(lo_q))
        d = gamma(Interval.point(max(rho, 0.5)), Interval.point(q2), Interval.point(lo_q))
        assert c.lo <= d.hi + 1e-15

    def test_degenerate_rho(self):
        q1, q2 = Interval.point(0.3), Interval.point(0.9)
        assert_contains(gamma(Interval.point(1.0), q1, q2), min(0.3, 0.9))
        assert_contains(gamma(Interval.point(-1.0), q1, q2), max(0.0, 0.3 + 0.9 - 1.0))

    def test_interval_inputs_hull(self):
        # interval arguments enclose every point selection
        r = Interval(-0.7, -0.6)
        q1, q2 = Interval(0.3, 0.4), Interval(0.5, 0.6)
        hull = gamma(r, q1, q2)
        for pr in (r.lo, r.mid, r.hi):
            for p1 in (q1.lo, q1.hi):
                for p2 in (q2.lo, q2.hi):
                    inner = gamma(Interval.point(pr), Interval.point(p1), Interval.point(p2))
                    assert hull.lo <= inner.hi and inner.lo <= hull.hi


class TestGammaPartials:
    def test_collapsed_q1(self):
        dq1, dq2, drho = gamma_partials(
            Interval.point(0.0), Interval.point(0.3), Interval.point(0.7)
        )
        assert_contains(dq1, 0.7, "dq1 at rho 0")
        assert_contains(dq2, 0.3, "dq2 at rho 0")

    def test_density_at_origin(self):
        _, _, drho = gamma_partials(
            Interval.point(0.0), Interval.point(0.5), Interval.point(0.5)
        )
        assert_contains(drho, 1.0 / (2 * math.pi), "drho at origin")

    def test_finite_difference_match(self):
        h = 1e-5
        for rho, q1, q2 in [(-0.5, 0.4, 0.6), (0.3, 0.2, 0.8), (-0.8, 0.55, 0.35)]:
            dq1, dq2, drho = gamma_partials(
                Interval.point(rho), Interval.point(q1), Interval.point(q2)
            )

            def g(r, a, b):
                return gamma(Interval.point(r), Interval.point(a), Interval.point(b), cells=2048).mid

            fd_q1 = (g(rho, q1 + h, q2) - g(rho, q1 - h, q2)) / (2 * h)
            fd_q2 = (g(rho, q1, q2 + h) - g(rho, q1, q2 - h)) / (2 * h)
            fd_rho = (g(rho + h, q1, q2) - g(rho - h, q1, q2)) / (2 * h)
            assert abs(dq1.mid - fd_q1) <= 1e-6
            assert abs(dq2.mid - fd_q2) <= 1e-6
            assert abs(drho.mid - fd_rho) <= 1e-6

    def test_nonnegative_structure(self):
        dq1, dq2, drho = gamma_partials(
            Interval.point(-0.65), Interval.point(0.37), Interval.point(0.74)
        )
        assert -1e-15 <= dq1.lo and dq1.hi <= 1.0 + 1e-15
        assert -1e-15 <= dq2.lo and dq2.hi <= 1.0 + 1e-15
        assert drho.lo >= -1e-15

    def test_boundary_rejected(self):
        with pytest.raises(DegenerateInput):
            gamma_partials(Interval.point(0.0), Interval.point(0.0), Interval.point(0.5))


class TestConstants:
    def test_bgw_width_and_value(self):
        iv = compute_bgw(53)
        assert iv.width <= 1e-10
        assert_contains(iv, ORACLE_B_GW, "b_GW")

    def test_constant_enclosures(self):
        c = constants()
        for iv, target, name in [
            (c.b_gw, ORACLE_B_GW, "b_GW"),
            (c.c_gw, ORACLE_C_GW, "c_GW"),
            (c.alpha_gw, ORACLE_ALPHA_GW, "alpha_GW"),
        ]:
            assert iv.width <= 1e-8, name
            assert_contains(iv, target, name)

    def test_interval_identities(self):
        c = constants()
        assert_overlap(c.c_gw, (Interval.point(1.0) - c.b_gw) / Interval.point(2.0))
        product = c.alpha_gw * c.c_gw
        assert_contains(product, ORACLE_ACOS_BGW_OVER_PI, "alpha * c")

    def test_b_and_nu(self):
        c = constants()
        assert_overlap(c.b, Interval.point(1.0) + c.b_gw)
        assert c.nu1.lo <= 0.004 <= c.nu1.hi
        assert c.nu2.lo <= 0.013 <= c.nu2.hi
