"""Perturbation constructions: full-support measures and strict triangles.

`perturb_mu` mixes the measure with a balanced full-support measure nu,
mu' = (1 - lam) mu + lam nu, choosing the smallest lam that provably puts
mass >= eps on every bias.  nu spreads equal mass over all biases except
one designated balancer, whose mass is solved from the balance equation;
the balancer is the largest-magnitude bias opposite in sign to the equal-
mass average, so its solved mass is positive whenever B contains biases of
both signs.  Configurations and weights are untouched, so completeness is
preserved exactly.

`perturb_pairwise` shifts every pairwise bias b_ij upward by delta, which
loosens the lower triangle inequality everywhere; it refuses shifts that
provably break an upper triangle inequality.
"""

from __future__ import annotations

from dataclasses import replace

from ..errors import InfeasiblePerturbation
from ..rigor import Interval
from .model import Blueprint, Configuration, WeightedConfiguration


def _balancer_symbol(bp: Blueprint) -> str:
    """The bias that absorbs the balance correction in nu."""
    symbols = bp.symbols()
    total = Interval.point(0.0)
    for s in symbols:
        total = total + bp.bias_value(s)
    # sign of the equal-mass average decides which side must absorb mass
    if total.mid > 0.0:
        pool = [s for s in symbols if bp.bias_value(s).hi < 0.0]
    elif total.mid < 0.0:
        pool = [s for s in symbols if bp.bias_value(s).lo > 0.0]
    else:
        pool = list(symbols)
    if not pool:
        raise InfeasiblePerturbation(
            "cannot balance a full-support measure: biases all share one sign")
    return max(pool, key=lambda s: (bp.bias_value(s).mag, s))


def _full_support_measure(bp: Blueprint) -> dict[str, Interval]:
    """A balanced probability measure nu with nu(b) > 0 for every b."""
    symbols = bp.symbols()
    if len(symbols) < 2:
        raise InfeasiblePerturbation("need at least two biases to balance")
    k = _balancer_symbol(bp)
    bk = bp.bias_value(k)
    rest = Interval.point(0.0)
    for s in symbols:
        if s != k:
            rest = rest + bp.bias_value(s)
    # unit mass on each non-balancer bias, y = -rest/b_k on the balancer,
    # then normalize; y > 0 must be provable for nu to be a measure
    y = -rest / bk
    if y.lo <= 0.0:
        raise InfeasiblePerturbation(
            f"balancer mass enclosure {y} on {k} is not provably positive")
    total = y + float(len(symbols) - 1)
    return {s: (y if s == k else Interval.point(1.0)) / total for s in symbols}


def perturb_mu(bp: Blueprint, eps: float) -> Blueprint:
    """A blueprint with the same configurations and mu'(b) >= eps for all b.

    mu' = (1 - lam) mu + lam nu with nu balanced and fully supported; lam is
    the smallest value with lam * min nu >= eps.  Raises
    InfeasiblePerturbation when eps exceeds min nu (lam would pass 1).
    """
    if eps < 0.0:
        raise InfeasiblePerturbation("eps must be nonnegative")
    if eps == 0.0:
        return bp
    nu = _full_support_measure(bp)
    nu_min = min(m.lo for m in nu.values())
    # a hair above eps/nu_min so that lam * nu(b) >= eps survives both the
    # width of the nu enclosures and the outward rounding of the mix below
    lam = (eps / nu_min) * (1.0 + 1e-12)
    if lam > 1.0:
        raise InfeasiblePerturbation(
            f"eps = {eps} exceeds the feasible budget {nu_min} for this bias set")
    mu_prime = {
        s: (1.0 - lam) * bp.mu[s] + lam * nu[s]
        for s in bp.symbols()
    }
    short = [s for s, m in mu_prime.items() if m.lo < eps]
    if short:
        raise InfeasiblePerturbation(
            f"constructed measure misses the eps floor on {short}")
    return Blueprint(
        name=f"{bp.name}+mu{eps:g}",
        biases=dict(bp.biases),
        mu=mu_prime,
        configs=bp.configs,
        mu_exact=None,
        bias_exprs=bp.bias_exprs,
        balance_tol=bp.balance_tol,
    )


def perturb_pairwise(bp: Blueprint, delta: float) -> Blueprint:
    """Shift every configuration's b_ij by +delta.

    Completeness moves by exactly -delta/2; the lower triangle inequalities
    gain slack delta.  Raises InfeasiblePerturbation if any shifted
    configuration provably violates an upper triangle inequality or leaves
    [-1, 1].
    """
    if delta == 0.0:
        return bp
    shifted = []
    for wc in bp.configs:
        theta = Configuration(wc.theta.b_i, wc.theta.b_j, wc.theta.b_ij + delta)
        if not theta.triangle_ok():
            raise InfeasiblePerturbation(
                f"shift {delta} breaks a triangle inequality on ({wc.i}, {wc.j})")
        expr = None if wc.pair_expr is None else f"({wc.pair_expr}) + {delta!r}"
        shifted.append(replace(wc, theta=theta, pair_expr=expr))
    return Blueprint(
        name=f"{bp.name}+pw{delta:g}",
        biases=dict(bp.biases),
        mu=dict(bp.mu),
        configs=tuple(shifted),
        mu_exact=bp.mu_exact,
        bias_exprs=bp.bias_exprs,
        balance_tol=bp.balance_tol,
    )
