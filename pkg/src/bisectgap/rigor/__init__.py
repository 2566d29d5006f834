"""Self-contained interval arithmetic with certified transcendental
enclosures: the rigorous numerical core everything else builds on."""

from .constants import Constants, compute_bgw, constants
from .functions import (
    acos_iv,
    asin_iv,
    exp_iv,
    phi_cdf,
    phi_inv,
    phi_inv_ex,
    pi_iv,
)
from .gamma import DEFAULT_CELLS, gamma, gamma_partials
from .interval import Interval

__all__ = [
    "Constants",
    "DEFAULT_CELLS",
    "Interval",
    "acos_iv",
    "asin_iv",
    "compute_bgw",
    "constants",
    "exp_iv",
    "gamma",
    "gamma_partials",
    "phi_cdf",
    "phi_inv",
    "phi_inv_ex",
    "pi_iv",
]
