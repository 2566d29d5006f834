"""Shared fixtures and frozen numeric oracles.

The ORACLE_* literals were computed independently with mpmath at 50+
decimal digits (root solve of the critical-bias stationarity condition,
exact decimal mu literals, closed forms for the quadrant mass); they are
frozen here so the tests do not depend on the package's own arithmetic.
"""

from __future__ import annotations

import math

import pytest
from hypothesis import HealthCheck, settings

from bisectgap.blueprint import builtin_dstar
from bisectgap.rigor import constants

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

# stationary point of b -> acos(b)/(1 - b) scaled by 2/pi, and derived values
ORACLE_B_GW = -0.689157736645164443889295388603
ORACLE_C_GW = 0.844578868322582221944647694301
ORACLE_ALPHA_GW = 0.878567205784851604217301033678
ORACLE_ACOS_BGW_OVER_PI = 0.742019296407103180807610096916

# builtin blueprint, exact symbolic biases evaluated at the oracle root
ORACLE_BIASES = {
    "b1": -0.6346845267096711122214092,
    "b2": -0.3148422633548355561107046,
    "b3": 0.004,
    "b4": 0.3068422633548355561107046,
    "b5": 0.6256845267096711122214092,
}
ORACLE_RHO = {
    ("b1", "b5"): -0.48446499995228483465,
    ("b2", "b3"): -0.72476238016219304372,
    ("b2", "b4"): -0.655942653916047708,
    ("b2", "b5"): -0.66472543765725655168,
    ("b3", "b4"): -0.72538281866482882868,
}
# config-weighted acos(rho)/pi at the all-zero thresholds
ORACLE_SOUNDNESS_ZERO = 0.7419820573831518155928128
ORACLE_S0_OVER_CGW = 0.8785231139595075417658022
# -mu(b1)/mu(b4) from the exact decimal mu literals
ORACLE_T4_RATIO = -0.4834563478538395223754908
# residual mu(b1) b1 + mu(b4) b4 (the mu decimals are rounded to 12 places)
ORACLE_MU_RESIDUAL = 2.186467942e-11

DSTAR_HASH = "2f034b485596cc94421caa13d95bc68cb8bd7549325414743630dfc08bf911ea"


@pytest.fixture(scope="session")
def dstar():
    return builtin_dstar()


@pytest.fixture(scope="session")
def consts():
    return constants()


def assert_contains(iv, x: float, label: str = "") -> None:
    assert iv.lo <= x <= iv.hi, f"{label or 'interval'} {iv} does not contain {x!r}"


def assert_overlap(a, b, label: str = "") -> None:
    assert a.lo <= b.hi and b.lo <= a.hi, f"{label or 'intervals'} {a} and {b} are disjoint"


def dist_to_interval(x: float, iv) -> float:
    if x < iv.lo:
        return iv.lo - x
    if x > iv.hi:
        return x - iv.hi
    return 0.0


def check_ulp_tolerance(value: float, target: float, tol: float, label: str) -> None:
    assert math.isfinite(value), f"{label} is not finite"
    assert abs(value - target) <= tol, f"{label}: {value!r} vs {target!r} (tol {tol!r})"
