"""Small-bias Taylor analysis and the quartic-gap configuration family."""

from .expansion import (
    Expansion,
    RHO_WINDOW,
    VALIDITY_WINDOW,
    soundness_expansion,
    soundness_expansion_at_bgw,
    taylor_phi,
    taylor_phi_rho,
)
from .family import (
    FAMILY_PATTERNS,
    FamilyRow,
    FamilyTable,
    FamilyWeights,
    ModifiedFamilyCheck,
    family_coefficients,
    hyperplane_sanity,
    modified_family_performance,
    solve_family_weights,
)

__all__ = [
    "Expansion",
    "RHO_WINDOW",
    "VALIDITY_WINDOW",
    "soundness_expansion",
    "soundness_expansion_at_bgw",
    "taylor_phi",
    "taylor_phi_rho",
    "FAMILY_PATTERNS",
    "FamilyRow",
    "FamilyTable",
    "FamilyWeights",
    "ModifiedFamilyCheck",
    "family_coefficients",
    "hyperplane_sanity",
    "modified_family_performance",
    "solve_family_weights",
]
