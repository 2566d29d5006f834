"""Exception taxonomy shared across the package.

Every error raised deliberately by this package derives from BisectGapError,
so callers can catch one type at the CLI boundary and map it to exit code 1.
"""

from __future__ import annotations


class BisectGapError(Exception):
    """Base class for all deliberate failures."""


class EmptyDomain(BisectGapError):
    """An interval operation produced or received an empty set."""


class DegenerateInput(BisectGapError):
    """An input is outside the domain where the operation is defined,
    e.g. division by an interval containing zero."""


class InfeasiblePerturbation(BisectGapError):
    """A requested perturbation cannot satisfy its invariants at the
    requested magnitude."""


class UnsupportedMeasure(BisectGapError):
    """A bias measure violates a structural requirement (negative mass,
    unknown support point, mass not summing to one)."""


class TooLarge(BisectGapError):
    """An exhaustive operation was asked to run beyond its size limit."""


class FormatError(BisectGapError):
    """A serialized object (blueprint, certificate, instance) failed to
    parse or failed its checksum."""


class InfeasibleBlueprint(BisectGapError):
    """A blueprint violates a structural invariant needed by the caller."""


class SingularSystem(BisectGapError):
    """A linear solve required by a construction is singular or
    numerically indistinguishable from singular."""
