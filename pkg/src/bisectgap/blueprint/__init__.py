"""Blueprint domain model, functionals, perturbations, and text format."""

from .builtin import DSTAR_TEXT, builtin_dstar
from .functionals import (
    balance_residual,
    completeness,
    pair_value,
    relative_bias,
    soundness_at,
)
from .model import (
    BALANCE_TOL,
    Blueprint,
    Configuration,
    ThresholdFunction,
    WeightedConfiguration,
)
from .perturb import perturb_mu, perturb_pairwise
from .textio import (
    blueprint_hash,
    eval_expr,
    format_blueprint,
    parse_blueprint,
    read_blueprint,
    write_blueprint,
)

__all__ = [
    "BALANCE_TOL",
    "Blueprint",
    "Configuration",
    "DSTAR_TEXT",
    "ThresholdFunction",
    "WeightedConfiguration",
    "balance_residual",
    "blueprint_hash",
    "builtin_dstar",
    "completeness",
    "eval_expr",
    "format_blueprint",
    "pair_value",
    "parse_blueprint",
    "perturb_mu",
    "perturb_pairwise",
    "read_blueprint",
    "relative_bias",
    "soundness_at",
    "write_blueprint",
]
