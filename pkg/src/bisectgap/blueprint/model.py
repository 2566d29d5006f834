"""Domain model for rounding blueprints.

A blueprint is a triple (D, B, mu): a finite set B of vertex biases in
(-1, 1), a probability measure mu on B, and a weighted list D of
configurations.  A configuration records the biases of a vertex pair
together with their pairwise inner-product bias b_ij; its weight is the
probability of drawing that pair.  Threshold functions assign each bias a
rounding threshold t(b) in [-1, 1]; the rounding sends a vertex with bias b
to the +1 side with probability (1 + t(b))/2.

All numeric fields are enclosures (`Interval`), so every derived quantity
is an enclosure of the corresponding real number.  Measure values and
configuration weights additionally keep an exact `Fraction` when they were
given as decimal literals; downstream reductions use the fractions where
exactness matters (the balance substitution t_j = -(mu_i/mu_j) t_i in
particular).

Blueprints and threshold functions are immutable; every functional on them
is pure, so concurrent evaluation needs no locking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from ..errors import DegenerateInput, InfeasibleBlueprint
from ..rigor import Interval

#: Largest |sum mu(b) * b| accepted by validation.  The balance of a measure
#: given by finite decimals against irrational biases cannot be an exact
#: zero, so validation bounds the magnitude instead; the default matches the
#: tolerance used by the discretized-instance checks.
BALANCE_TOL = 1e-9

#: Slack allowed when checking that weights or measure values sum to 1.
SUM_TOL = 1e-12


def _fraction_interval(x: Fraction) -> Interval:
    return Interval.from_decimal(str(x))


@dataclass(frozen=True)
class Configuration:
    """One vertex-pair type: biases of the endpoints and their pairwise bias.

    The fields are enclosures of reals in [-1, 1].  Geometric realizability
    of a pair of unit vectors with inner products (b_i, b_j, b_ij) against a
    common reference direction is the triangle condition

        -1 + |b_i + b_j|  <=  b_ij  <=  1 - |b_i - b_j|,

    which `triangle_slacks` exposes as a pair of slack enclosures (lower,
    upper).  A slack whose enclosure reaches below 0 may still satisfy the
    condition with equality; only `slack.hi < 0` proves a violation.
    """

    b_i: Interval
    b_j: Interval
    b_ij: Interval

    def __post_init__(self) -> None:
        box = Interval(-1.0, 1.0)
        for name in ("b_i", "b_j", "b_ij"):
            iv: Interval = getattr(self, name)
            if iv.hi < -1.0 or iv.lo > 1.0:
                raise InfeasibleBlueprint(f"{name} = {iv} lies outside [-1, 1]")
            object.__setattr__(self, name, iv.intersect(box))

    def triangle_slacks(self) -> tuple[Interval, Interval]:
        """(b_ij - (-1 + |b_i + b_j|), (1 - |b_i - b_j|) - b_ij)."""
        lower = self.b_ij - (abs(self.b_i + self.b_j) - 1.0)
        upper = (1.0 - abs(self.b_i - self.b_j)) - self.b_ij
        return lower, upper

    def triangle_ok(self) -> bool:
        """True unless a triangle inequality is provably violated."""
        lower, upper = self.triangle_slacks()
        return lower.hi >= 0.0 and upper.hi >= 0.0

    def triangle_strict(self) -> bool:
        """True when both triangle inequalities provably hold strictly."""
        lower, upper = self.triangle_slacks()
        return lower.lo > 0.0 and upper.lo > 0.0

    def is_positive(self) -> bool:
        """True when the relative pairwise bias is provably <= 0."""
        from .functionals import relative_bias

        return relative_bias(self).hi <= 0.0


@dataclass(frozen=True)
class WeightedConfiguration:
    """A configuration tied to its bias symbols and sampling weight."""

    i: str
    j: str
    theta: Configuration
    weight: Interval
    weight_exact: Fraction | None = None
    pair_expr: str | None = None


@dataclass(frozen=True)
class ThresholdFunction:
    """A map from bias symbols to thresholds in [-1, 1]."""

    values: Mapping[str, Interval]

    def __post_init__(self) -> None:
        fixed = {}
        for symbol, value in self.values.items():
            iv = value if isinstance(value, Interval) else Interval.point(float(value))
            if iv.lo < -1.0 or iv.hi > 1.0:
                raise DegenerateInput(f"threshold t({symbol}) = {iv} outside [-1, 1]")
            fixed[symbol] = iv
        object.__setattr__(self, "values", dict(fixed))

    @staticmethod
    def constant(symbols: Iterable[str], value: float = 0.0) -> "ThresholdFunction":
        return ThresholdFunction({s: Interval.point(value) for s in symbols})

    def __getitem__(self, symbol: str) -> Interval:
        return self.values[symbol]

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.values

    def symbols(self) -> tuple[str, ...]:
        return tuple(self.values)


@dataclass(frozen=True)
class Blueprint:
    """An immutable, validated blueprint.

    `biases` maps symbols to value enclosures and is kept in ascending order
    of the enclosure midpoints.  `mu` assigns every symbol a probability
    (zero off the support); `mu_exact` mirrors it with exact fractions when
    the measure was given in decimals, else is None.  `configs` is stored in
    canonical order, sorted by the (b_i, b_j) enclosure endpoints, so that
    every weighted sum over configurations has a fixed summation order and
    identical runs produce bit-identical results.

    `bias_exprs` preserves the defining expressions from the text format
    (see `textio`); they are what certification hashes, since the decimal
    image of an irrational bias cannot round-trip exactly.
    """

    name: str
    biases: Mapping[str, Interval]
    mu: Mapping[str, Interval]
    configs: tuple[WeightedConfiguration, ...]
    mu_exact: Mapping[str, Fraction] | None = None
    bias_exprs: Mapping[str, str] | None = None
    balance_tol: float = field(default=BALANCE_TOL)

    def __post_init__(self) -> None:
        biases = dict(sorted(self.biases.items(), key=lambda kv: (kv[1].mid, kv[0])))
        object.__setattr__(self, "biases", biases)
        for symbol, value in biases.items():
            if value.lo <= -1.0 or value.hi >= 1.0:
                raise InfeasibleBlueprint(f"bias {symbol} = {value} not inside (-1, 1)")

        mu = {s: self.mu.get(s, Interval.point(0.0)) for s in biases}
        unknown = set(self.mu) - set(biases)
        if unknown:
            raise InfeasibleBlueprint(f"measure on unknown biases: {sorted(unknown)}")
        for symbol, m in mu.items():
            if m.hi < 0.0:
                raise InfeasibleBlueprint(f"mu({symbol}) = {m} is negative")
        object.__setattr__(self, "mu", mu)
        if self.mu_exact is not None:
            exact = {s: self.mu_exact.get(s, Fraction(0)) for s in biases}
            if sum(exact.values()) != 1:
                raise InfeasibleBlueprint("exact measure does not sum to 1")
            object.__setattr__(self, "mu_exact", exact)

        total = Interval.point(0.0)
        for m in mu.values():
            total = total + m
        if total.lo > 1.0 + SUM_TOL or total.hi < 1.0 - SUM_TOL:
            raise InfeasibleBlueprint(f"measure sums to {total}, not 1")

        if not self.configs:
            raise InfeasibleBlueprint("blueprint has no configurations")
        order = sorted(
            self.configs,
            key=lambda wc: (wc.theta.b_i.lo, wc.theta.b_i.hi, wc.theta.b_j.lo, wc.theta.b_j.hi),
        )
        object.__setattr__(self, "configs", tuple(order))
        wsum = Interval.point(0.0)
        for wc in self.configs:
            if wc.i not in biases or wc.j not in biases:
                raise InfeasibleBlueprint(f"configuration ({wc.i}, {wc.j}) uses unknown biases")
            if wc.weight.hi < 0.0:
                raise InfeasibleBlueprint(f"negative weight on ({wc.i}, {wc.j})")
            if not wc.theta.triangle_ok():
                raise InfeasibleBlueprint(
                    f"configuration ({wc.i}, {wc.j}) violates a triangle inequality")
            wsum = wsum + wc.weight
        if wsum.lo > 1.0 + SUM_TOL or wsum.hi < 1.0 - SUM_TOL:
            raise InfeasibleBlueprint(f"config weights sum to {wsum}, not 1")

        residual = self.measure_balance()
        if residual.lo > self.balance_tol or residual.hi < -self.balance_tol:
            raise InfeasibleBlueprint(
                f"measure balance residual {residual} exceeds {self.balance_tol}")

    # -- accessors -----------------------------------------------------------

    def symbols(self) -> tuple[str, ...]:
        return tuple(self.biases)

    def bias_value(self, symbol: str) -> Interval:
        return self.biases[symbol]

    def support(self) -> tuple[str, ...]:
        return tuple(s for s, m in self.mu.items() if m.hi > 0.0)

    def mu_fraction(self, symbol: str) -> Fraction | None:
        if self.mu_exact is None:
            return None
        return self.mu_exact.get(symbol, Fraction(0))

    def measure_balance(self) -> Interval:
        """Enclosure of sum_b mu(b) * b."""
        total = Interval.point(0.0)
        for symbol, value in self.biases.items():
            total = total + self.mu[symbol] * value
        return total

    def zero_threshold(self) -> ThresholdFunction:
        return ThresholdFunction.constant(self.symbols(), 0.0)


def exact_measure(values: Mapping[str, str | Fraction]) -> tuple[dict[str, Interval], dict[str, Fraction]]:
    """Build the (interval, fraction) views of a measure given in decimals."""
    exact = {s: Fraction(v) for s, v in values.items()}
    intervals = {s: _fraction_interval(f) for s, f in exact.items()}
    return intervals, exact
