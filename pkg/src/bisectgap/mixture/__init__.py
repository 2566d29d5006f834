"""Monte Carlo realization of the correlated-Gaussian graph and its
finite discretizations on the circle and the sphere."""

from .sampler import CorrelatedSampler, sample_pair, substream
from .estimators import (
    Estimate,
    estimate_mixture_completeness,
    estimate_mixture_soundness,
)
from .partition import SphereCell, SpherePartition, partition_sphere
from .instance import (
    MixtureInstance,
    Vertex,
    best_balanced_cut_small,
    build_instance,
    edge_triangle_slacks,
    load_instance,
    save_instance,
    sdp_value,
    uncorrelatedness,
    weighted_balance,
)

__all__ = [
    "CorrelatedSampler",
    "Estimate",
    "MixtureInstance",
    "SphereCell",
    "SpherePartition",
    "Vertex",
    "best_balanced_cut_small",
    "build_instance",
    "edge_triangle_slacks",
    "estimate_mixture_completeness",
    "estimate_mixture_soundness",
    "load_instance",
    "partition_sphere",
    "sample_pair",
    "save_instance",
    "sdp_value",
    "substream",
    "uncorrelatedness",
    "weighted_balance",
]
