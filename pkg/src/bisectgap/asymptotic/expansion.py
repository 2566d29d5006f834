"""Small-threshold Taylor machinery for the soundness functional.

Everything here is derived, not transcribed: the expansions come from
symbolic differentiation of the closed-form partial derivatives of the
normal CDF and of the bivariate orthant function, composed with the
algebraic elimination of the pairwise correlation at a fixed pairwise
bias.  The only numeric constant entering the pipeline is the midpoint
of the rigorously enclosed b_GW (or a caller-supplied value of it).

The bivariate orthant function here takes integral limits as arguments,

    Phi_rho(c1, c2) = P(X <= c1, Y <= c2),  (X, Y) standard bivariate
    normal with correlation rho,

not rounding probabilities; the two parameterizations are linked by
Phi_rho(c1, c2) = Gamma_rho(Phi(c1), Phi(c2)).  Its partial derivatives
are classical closed forms (the conditional-CDF formulas in c1 and c2,
and the bivariate density in rho), which lets a computer algebra system
produce the full multivariate Taylor polynomial mechanically.  Validity
windows are empirical: inside |args| <= 0.3 (and |rho| <= 0.95) the
degree-4 truncations stay within 1e-4 of the exact functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping

from ..errors import DegenerateInput
from ..rigor import constants

#: Largest |b| or |c| the truncated expansions are vouched for.
VALIDITY_WINDOW = 0.3

#: Largest |rho| for the explicit-correlation expansion.
RHO_WINDOW = 0.95

_VARS = ("b1", "b2", "c1", "c2")


def _ipow(x: float, n: int) -> float:
    out = 1.0
    for _ in range(n):
        out *= x
    return out


@dataclass(frozen=True)
class Expansion:
    """A truncated multivariate Taylor polynomial in (b1, b2, c1, c2).

    `coefficients` maps exponent tuples (e_b1, e_b2, e_c1, e_c2) to real
    coefficients, stored in graded lexicographic order.  Evaluation is
    plain polynomial arithmetic over the stored floats; nothing is
    re-derived at call time.
    """

    coefficients: Mapping[tuple[int, int, int, int], float]
    order: int = 4

    def __post_init__(self) -> None:
        ordered = dict(sorted(self.coefficients.items(),
                              key=lambda kv: (sum(kv[0]), kv[0])))
        for expo in ordered:
            if sum(expo) > self.order:
                raise DegenerateInput(
                    f"monomial {expo} exceeds the stated order {self.order}")
        object.__setattr__(self, "coefficients", ordered)

    def evaluate(self, b1: float, b2: float, c1: float, c2: float) -> float:
        point = (b1, b2, c1, c2)
        terms = []
        for expo, coef in self.coefficients.items():
            term = coef
            for x, e in zip(point, expo):
                term *= _ipow(x, e)
            terms.append(term)
        return math.fsum(terms)

    def __call__(self, b1: float, b2: float, c1: float, c2: float) -> float:
        return self.evaluate(b1, b2, c1, c2)


def _sympy_pieces():
    """The shared symbolic scaffolding; imported lazily, built once."""
    import sympy as sp

    def density(x):
        return sp.exp(-x ** 2 / 2) / sp.sqrt(2 * sp.pi)

    def cdf(x):
        return (1 + sp.erf(x / sp.sqrt(2))) / 2

    class Orthant(sp.Function):
        """Phi_rho(c1, c2) with derivatives in closed form."""

        nargs = 3

        def fdiff(self, argindex):
            a, b, rho = self.args
            q = sp.sqrt(1 - rho ** 2)
            if argindex == 1:
                return density(a) * cdf((b - rho * a) / q)
            if argindex == 2:
                return density(b) * cdf((a - rho * b) / q)
            if argindex == 3:
                return sp.exp(-(a ** 2 - 2 * rho * a * b + b ** 2)
                              / (2 * (1 - rho ** 2))) / (2 * sp.pi * q)
            raise ValueError(argindex)

    return sp, density, cdf, Orthant


@lru_cache(maxsize=1)
def _phi_poly() -> tuple[float, float, float]:
    """(constant, c, c^3) coefficients of the univariate CDF at 0."""
    sp, _, cdf, _ = _sympy_pieces()
    c = sp.Symbol("c", real=True)
    ser = sp.series(cdf(c), c, 0, 5).removeO()
    poly = sp.Poly(sp.expand(ser), c)
    return (float(poly.coeff_monomial(1)),
            float(poly.coeff_monomial(c)),
            float(poly.coeff_monomial(c ** 3)))


def taylor_phi(c: float) -> float:
    """Degree-3 expansion of the standard normal CDF near 0.

    Evaluates 1/2 + c/sqrt(2*pi) - c^3/(6*sqrt(2*pi)); the error is
    O(c^5).  The odd part is computed separately so that
    taylor_phi(c) + taylor_phi(-c) == 1 holds exactly in floats.
    """
    if abs(c) > VALIDITY_WINDOW:
        raise DegenerateInput(
            f"|c| = {abs(c)} outside the validity window {VALIDITY_WINDOW}")
    k0, k1, k3 = _phi_poly()
    return k0 + (k1 * c + k3 * (c * c * c))


@lru_cache(maxsize=1)
def _orthant_taylor() -> tuple[tuple[tuple[int, int], Callable], ...]:
    """((i, j), coeff(rho)) for the degree-4 orthant expansion at (0, 0)."""
    sp, _, _, Orthant = _sympy_pieces()
    c1, c2, r, eps = sp.symbols("c1 c2 r eps", real=True)
    ser = sp.series(Orthant(eps * c1, eps * c2, r), eps, 0, 5).removeO()
    ser = ser.subs(Orthant(0, 0, r),
                   sp.Rational(1, 2) - sp.acos(r) / (2 * sp.pi))
    poly = sp.Poly(sp.expand(ser.subs(eps, 1)), c1, c2)
    out = []
    for expo in sorted(poly.monoms(), key=lambda e: (sum(e), e)):
        coef = poly.coeff_monomial(c1 ** expo[0] * c2 ** expo[1])
        out.append(((expo[0], expo[1]), sp.lambdify(r, coef, "math")))
    return tuple(out)


def taylor_phi_rho(c1: float, c2: float, rho: float) -> float:
    """Degree-4 expansion of the orthant function near (0, 0).

    The correlation stays explicit; coefficients are functions of rho
    evaluated per call.  Symmetric monomial pairs are summed together so
    taylor_phi_rho(c1, c2, rho) == taylor_phi_rho(c2, c1, rho) exactly.
    """
    if max(abs(c1), abs(c2)) > VALIDITY_WINDOW:
        raise DegenerateInput(
            f"|c| outside the validity window {VALIDITY_WINDOW}")
    if abs(rho) > RHO_WINDOW:
        raise DegenerateInput(f"|rho| = {abs(rho)} exceeds {RHO_WINDOW}")
    seen = set()
    terms = []
    for (i, j), fn in _orthant_taylor():
        if (i, j) in seen:
            continue
        coef = fn(rho)
        if i == j:
            terms.append(coef * (_ipow(c1, i) * _ipow(c2, j)))
        else:
            seen.add((j, i))
            terms.append(coef * (_ipow(c1, i) * _ipow(c2, j)
                                 + _ipow(c1, j) * _ipow(c2, i)))
    return math.fsum(terms)


@lru_cache(maxsize=8)
def soundness_expansion(b_gw: float | None = None) -> Expansion:
    """Degree-4 expansion of Phi(c1) + Phi(c2) - 2*Phi_rho(c1, c2).

    The pairwise bias is held at b_gw, which pins the correlation to

        rho = (b_gw - b1*b2) / sqrt((1 - b1^2) (1 - b2^2)),

    and the whole composite is Taylor-expanded in (b1, b2, c1, c2)
    around the origin.  Only even total degrees survive (the functional
    is invariant under global negation), so the result has a constant
    term, a quadratic layer, and a quartic layer.
    """
    if b_gw is None:
        b_gw = constants().b_gw.mid
    if not -1.0 < b_gw < 1.0:
        raise DegenerateInput(f"pairwise bias {b_gw} outside (-1, 1)")
    sp, _, cdf, Orthant = _sympy_pieces()
    b1, b2, c1, c2, eps = sp.symbols("b1 b2 c1 c2 eps", real=True)
    g = sp.Float(repr(b_gw), 25)
    rho = (g - (eps * b1) * (eps * b2)) / sp.sqrt(
        (1 - (eps * b1) ** 2) * (1 - (eps * b2) ** 2))
    s = cdf(eps * c1) + cdf(eps * c2) - 2 * Orthant(eps * c1, eps * c2, rho)
    ser = sp.series(s, eps, 0, 5).removeO()
    ser = ser.subs(Orthant(0, 0, g),
                   sp.Rational(1, 2) - sp.acos(g) / (2 * sp.pi))
    poly = sp.Poly(sp.expand(ser.subs(eps, 1)), b1, b2, c1, c2)
    coeffs = {}
    for expo in poly.monoms():
        val = float(poly.coeff_monomial(
            b1 ** expo[0] * b2 ** expo[1] * c1 ** expo[2] * c2 ** expo[3]))
        if val != 0.0:
            coeffs[tuple(int(e) for e in expo)] = val
    return Expansion(coeffs, order=4)


def soundness_expansion_at_bgw(b1: float, b2: float, c1: float,
                               c2: float) -> float:
    """Evaluate the fixed-pairwise-bias soundness expansion.

    All four inputs must lie inside the validity window; the error
    against the exact functional is O(max^6) of the input magnitudes.
    """
    if max(abs(b1), abs(b2), abs(c1), abs(c2)) > VALIDITY_WINDOW:
        raise DegenerateInput(
            f"inputs outside the validity window {VALIDITY_WINDOW}")
    return soundness_expansion().evaluate(b1, b2, c1, c2)
