"""Outward-rounded interval arithmetic on IEEE doubles.

The hardware rounds to nearest, so every elementary operation here pads its
result by one ulp step in the unfavourable direction (``math.nextafter`` /
``numpy.nextafter``).  A round-to-nearest result is within half an ulp of the
true value, and one nextafter step is at least half an ulp, so the padded
endpoints always contain the true result.  Padding is applied after every
floating operation, never once at the end of a compound expression.

Two layers share this rule:

* ``Interval``: a scalar pair used by the public API.
* ``_add, _mul, ...`` vector kernels on ``(lo, hi)`` ndarray pairs, used by
  the certifier to process batches of regions in lock step.  The scalar class
  delegates to the same kernels for anything beyond one arithmetic step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInput, EmptyDomain

_INF = math.inf

# Outward padding step: two ulps relative plus the smallest subnormal.
# For a round-to-nearest result r of a true value t, |r - t| <= ulp(r)/2.
# fl(|r| * 2^-51) >= 2 ulp(r) (1 - 2^-52) > ulp(r)/2, so r +- the padding
# moves strictly past t in either direction; the added 5e-324 covers r = 0
# and the subnormal range where the relative step underflows.  This is
# cheaper than nextafter by a wide margin on large arrays and costs one
# extra ulp of width per operation.
_PAD = 2.0 ** -51
_TINY = 5e-324


def _dn(x: np.ndarray) -> np.ndarray:
    return x - (_PAD * np.abs(x) + _TINY)


def _up(x: np.ndarray) -> np.ndarray:
    return x + (_PAD * np.abs(x) + _TINY)


# ---------------------------------------------------------------------------
# vector kernels: each takes/returns (lo, hi) ndarray pairs
# ---------------------------------------------------------------------------

def _const(x: float, shape=()) -> tuple[np.ndarray, np.ndarray]:
    """Enclose a single float that stands for a possibly inexact constant."""
    a = np.full(shape, x, dtype=np.float64)
    return _dn(a), _up(a)


def _point(x) -> tuple[np.ndarray, np.ndarray]:
    """Treat x as exact (a computed double we want to reason about as-is)."""
    a = np.asarray(x, dtype=np.float64)
    return a.copy(), a.copy()


def _add(alo, ahi, blo, bhi):
    return _dn(alo + blo), _up(ahi + bhi)


def _sub(alo, ahi, blo, bhi):
    return _dn(alo - bhi), _up(ahi - blo)


def _neg(alo, ahi):
    return -ahi, -alo


def _mul(alo, ahi, blo, bhi):
    # Padding once after the min/max is rigorous with the relative pad:
    # each rounded product Ri is within u|Ri| of its true value, and
    # min_i(Ri - u|Ri|) >= min_i(Ri) - u|min_i(Ri)| for every sign pattern,
    # so one outward step from the selected extreme covers all candidates.
    p1 = alo * blo
    p2 = alo * bhi
    p3 = ahi * blo
    p4 = ahi * bhi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return _dn(lo), _up(hi)


def _mul_exact2(alo, ahi):
    # multiplication by 2 is exact in binary floating point
    return 2.0 * alo, 2.0 * ahi


def _mul_pos(alo, ahi, blo, bhi):
    """Product of two nonnegative intervals (monotone, two products)."""
    return _dn(alo * blo), _up(ahi * bhi)


def _div_pos(alo, ahi, blo, bhi):
    """Quotient of a nonnegative interval by a positive interval."""
    return _dn(alo / bhi), _up(ahi / blo)


def _half(alo, ahi):
    # division by 2 is exact
    return 0.5 * alo, 0.5 * ahi


def _div(alo, ahi, blo, bhi):
    if np.any((blo <= 0.0) & (bhi >= 0.0)):
        raise DegenerateInput("interval division by a set containing zero")
    q1 = alo / blo
    q2 = alo / bhi
    q3 = ahi / blo
    q4 = ahi / bhi
    lo = np.minimum(np.minimum(q1, q2), np.minimum(q3, q4))
    hi = np.maximum(np.maximum(q1, q2), np.maximum(q3, q4))
    return _dn(lo), _up(hi)


def _sqr(alo, ahi):
    """x*x, tighter than _mul(a, a) because x*x >= 0."""
    m = np.maximum(np.abs(alo), np.abs(ahi))
    inner = np.minimum(np.abs(alo), np.abs(ahi))
    crosses = (alo <= 0.0) & (ahi >= 0.0)
    lo = np.where(crosses, 0.0, _dn(inner * inner))
    lo = np.maximum(lo, 0.0)
    hi = _up(m * m)
    return lo, hi


def _sqrt(alo, ahi):
    if np.any(ahi < 0.0):
        raise DegenerateInput("sqrt of a negative interval")
    lo = np.maximum(_dn(np.sqrt(np.maximum(alo, 0.0))), 0.0)
    hi = _up(np.sqrt(ahi))
    return lo, hi


def _abs(alo, ahi):
    crosses = (alo <= 0.0) & (ahi >= 0.0)
    lo = np.where(crosses, 0.0, np.minimum(np.abs(alo), np.abs(ahi)))
    hi = np.maximum(np.abs(alo), np.abs(ahi))
    return lo, hi


def _mag(alo, ahi):
    """sup |x| over the interval, as a plain array."""
    return np.maximum(np.abs(alo), np.abs(ahi))


def _clip(alo, ahi, lo: float, hi: float):
    """Intersect with [lo, hi]; raises EmptyDomain when disjoint."""
    nlo = np.maximum(alo, lo)
    nhi = np.minimum(ahi, hi)
    if np.any(nlo > nhi):
        raise EmptyDomain("interval intersection is empty")
    return nlo, nhi


# ---------------------------------------------------------------------------
# scalar wrapper
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """A closed interval [lo, hi] of doubles, lo <= hi, both finite.

    Arithmetic is outward rounded; the result of an operator applied to
    intervals contains every pointwise result.  Construction from a decimal
    string goes through :func:`from_decimal` so that the printed constant is
    contained even when it is not a double.
    """

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi) or math.isinf(lo) or math.isinf(hi):
            raise DegenerateInput(f"non-finite interval endpoints [{lo}, {hi}]")
        if lo > hi:
            raise EmptyDomain(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def point(x: float) -> "Interval":
        return Interval(x, x)

    @staticmethod
    def around(x: float) -> "Interval":
        """One ulp of slack on each side; encloses any real the double x
        approximates to nearest."""
        return Interval(math.nextafter(x, -_INF), math.nextafter(x, _INF))

    @staticmethod
    def from_decimal(text: str) -> "Interval":
        """Tight double enclosure of a decimal literal, via exact rationals."""
        from fractions import Fraction

        value = Fraction(text)
        approx = float(value)
        if Fraction(approx) == value:
            return Interval(approx, approx)
        if Fraction(approx) < value:
            return Interval(approx, math.nextafter(approx, _INF))
        return Interval(math.nextafter(approx, -_INF), approx)

    @staticmethod
    def hull(*members: "Interval") -> "Interval":
        return Interval(min(m.lo for m in members), max(m.hi for m in members))

    # -- predicates / measures ---------------------------------------------

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def mag(self) -> float:
        """sup of |x| over the interval."""
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def encloses(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def strictly_below(self, x: float) -> bool:
        return self.hi < x

    def strictly_above(self, x: float) -> bool:
        return self.lo > x

    def intersect(self, other: "Interval") -> "Interval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise EmptyDomain(f"disjoint intervals {self} and {other}")
        return Interval(lo, hi)

    # -- arithmetic ----------------------------------------------------------

    @staticmethod
    def _coerce(x) -> "Interval":
        if isinstance(x, Interval):
            return x
        if isinstance(x, (int, float)):
            return Interval.point(float(x))
        return NotImplemented

    def __add__(self, other):
        o = Interval._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Interval(math.nextafter(self.lo + o.lo, -_INF),
                        math.nextafter(self.hi + o.hi, _INF))

    __radd__ = __add__

    def __sub__(self, other):
        o = Interval._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Interval(math.nextafter(self.lo - o.hi, -_INF),
                        math.nextafter(self.hi - o.lo, _INF))

    def __rsub__(self, other):
        o = Interval._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o.__sub__(self)

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other):
        o = Interval._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        lo, hi = _mul(*_as_pair(self), *_as_pair(o))
        return Interval(float(lo), float(hi))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = Interval._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        lo, hi = _div(*_as_pair(self), *_as_pair(o))
        return Interval(float(lo), float(hi))

    def __rtruediv__(self, other):
        o = Interval._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o.__truediv__(self)

    def sqr(self) -> "Interval":
        lo, hi = _sqr(*_as_pair(self))
        return Interval(float(lo), float(hi))

    def sqrt(self) -> "Interval":
        lo, hi = _sqrt(*_as_pair(self))
        return Interval(float(lo), float(hi))

    def __abs__(self) -> "Interval":
        lo, hi = _abs(*_as_pair(self))
        return Interval(float(lo), float(hi))

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


def _as_pair(iv: Interval) -> tuple[np.ndarray, np.ndarray]:
    return (np.asarray(iv.lo, dtype=np.float64),
            np.asarray(iv.hi, dtype=np.float64))


def from_pair(lo, hi) -> Interval:
    return Interval(float(lo), float(hi))
