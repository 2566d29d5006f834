"""Reduction of the soundness maximization to two free thresholds and
branch-and-bound certification of a global upper bound."""

from .engine import (
    STATUS_INCONCLUSIVE,
    STATUS_REFUTED,
    STATUS_VERIFIED,
    Certificate,
    Region,
    ReplayResult,
    canonical_bytes,
    certificate_text,
    certify,
    check_tiling,
    parse_certificate,
    read_certificate,
    replay,
    write_certificate,
)
from .pointwise import (
    PointModel,
    argmax_refine,
    grid_values,
    inner_root,
    soundness_point,
    superlevel_components,
)
from .reduction import (
    EPS_FLOOR,
    ReducedModel,
    dpartial_t3,
    dpartial_t5,
    reduced_soundness,
    root_find,
    t4_from_balance,
)

__all__ = [
    "STATUS_INCONCLUSIVE",
    "STATUS_REFUTED",
    "STATUS_VERIFIED",
    "Certificate",
    "EPS_FLOOR",
    "PointModel",
    "ReducedModel",
    "Region",
    "ReplayResult",
    "argmax_refine",
    "canonical_bytes",
    "certificate_text",
    "certify",
    "check_tiling",
    "dpartial_t3",
    "dpartial_t5",
    "grid_values",
    "inner_root",
    "parse_certificate",
    "read_certificate",
    "reduced_soundness",
    "replay",
    "root_find",
    "soundness_point",
    "superlevel_components",
    "t4_from_balance",
    "write_certificate",
]
