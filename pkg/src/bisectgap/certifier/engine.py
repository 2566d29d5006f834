"""Branch-and-bound certification of a global soundness bound.

The driver maintains a frontier of rectangular regions of the (t1, t2)
square, evaluates the region bounds from ``reduction`` on whole waves at
once, and sorts each region into one of three buckets:

* verified: the region's upper bound is strictly below the target
  (compared against a downward-rounded ``bound * c_GW.lo``, so the real
  inequality ``sup s / c_GW < bound`` follows),
* refuting: the rigorous lower bound at the region's center point
  exceeds an upward-rounded ``bound * c_GW.hi``, which proves the target
  false at a concrete threshold assignment,
* undecided: split along the wider axis and requeue.

Splits happen at exact dyadic midpoints, so every coordinate that can
appear in a certificate is an exact double and serialization via
``repr`` round-trips bit-for-bit.  All floating-point work is done per
region with no cross-region reductions, which makes the output
independent of chunking and of the worker count.

A certificate is a line-oriented text file: a header naming the
blueprint by content hash together with the bound and the evaluation
settings, one record per region, and a status footer.  Lines starting
with ``#`` are comments (the wall time lives there) and are excluded
from the byte-identity contract.  ``replay`` re-evaluates every region
from scratch, compares the recomputed enclosures for exact equality,
and re-checks the tiling and the threshold comparisons.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import multiprocessing
import numpy as np

from .. import __version__
from ..blueprint import Blueprint, blueprint_hash, builtin_dstar
from ..errors import DegenerateInput, FormatError, TooLarge
from ..rigor import DEFAULT_CELLS, Interval, constants
from ..rigor.interval import _dn, _up
from .reduction import EPS_FLOOR, ReducedModel, _bound_regions

__all__ = [
    "Region",
    "Certificate",
    "ReplayResult",
    "certify",
    "replay",
    "check_tiling",
    "certificate_text",
    "parse_certificate",
    "write_certificate",
    "read_certificate",
    "canonical_bytes",
    "STATUS_VERIFIED",
    "STATUS_REFUTED",
    "STATUS_INCONCLUSIVE",
]

STATUS_VERIFIED = "verified"
STATUS_REFUTED = "refuted-region"
STATUS_INCONCLUSIVE = "inconclusive"

_MAGIC = "bisectgap-certificate v1"
_CKPT_MAGIC = "bisectgap-checkpoint v1"

# lanes per bound-evaluation call; keeps the quadrature workspace around
# a couple hundred MB
_CHUNK = 1024

# settings are serialized in this fixed order
_SETTING_KEYS = ("generator", "cells", "eps_rule", "eps_floor", "max_depth")


@dataclass(frozen=True)
class Region:
    """Axis-aligned box of threshold values with its subdivision depth."""

    t1: Interval
    t2: Interval
    depth: int

    def key(self) -> tuple[float, float, float, float]:
        return (self.t1.lo, self.t1.hi, self.t2.lo, self.t2.hi)

    def split(self) -> tuple["Region", "Region"]:
        """Bisect the wider axis (t1 on ties) at the exact midpoint."""
        w1 = self.t1.hi - self.t1.lo
        w2 = self.t2.hi - self.t2.lo
        d = self.depth + 1
        if w1 >= w2:
            mid = 0.5 * (self.t1.lo + self.t1.hi)
            return (
                Region(Interval(self.t1.lo, mid), self.t2, d),
                Region(Interval(mid, self.t1.hi), self.t2, d),
            )
        mid = 0.5 * (self.t2.lo + self.t2.hi)
        return (
            Region(self.t1, Interval(self.t2.lo, mid), d),
            Region(self.t1, Interval(mid, self.t2.hi), d),
        )


@dataclass(frozen=True)
class Certificate:
    """Immutable record of one branch-and-bound run.

    ``regions`` pairs each region with its soundness enclosure.  For a
    verified or inconclusive run the regions tile the full square; for a
    refuted run the list holds the single refuting region, whose
    enclosure's lower end is the bound at the region's center point
    (the refutation witness).
    """

    blueprint_id: str
    bound: float
    normalizer: Interval
    regions: tuple[tuple[Region, Interval], ...]
    settings: Mapping[str, object]
    status: str
    wall_time_s: float | None = None


@dataclass(frozen=True)
class ReplayResult:
    status: str  # "verified" or "mismatch"
    detail: str = ""
    region_index: int | None = None


def _limits(bound: float, normalizer: Interval) -> tuple[float, float]:
    """Soundness-scale thresholds with outward rounding.

    ``s_hi < limit_lo`` implies ``s_hi / normalizer.lo < bound`` in real
    arithmetic, and ``center_lo > limit_hi`` implies the bound fails at
    the center point.
    """
    b = np.float64(bound)
    lo = float(_dn(b * np.float64(normalizer.lo)))
    hi = float(_up(b * np.float64(normalizer.hi)))
    return lo, hi


def _parse_eps_rule(rule: str) -> float | None:
    """Return the fixed tolerance, or None for the mean-width rule."""
    if rule == "mean-width":
        return None
    if rule.startswith("fixed:"):
        try:
            value = float(rule[len("fixed:"):])
        except ValueError:
            raise DegenerateInput(f"bad eps rule {rule!r}") from None
        if not value > 0.0:
            raise DegenerateInput(f"eps rule tolerance must be positive, got {rule!r}")
        return value
    raise DegenerateInput(f"unknown eps rule {rule!r}")


def _bound_chunk_task(
    bp: Blueprint,
    t1lo: np.ndarray,
    t1hi: np.ndarray,
    t2lo: np.ndarray,
    t2hi: np.ndarray,
    eps: np.ndarray,
    cells: int,
) -> dict[str, np.ndarray]:
    # module-level so it pickles for worker processes; rebuilding the
    # reduced model costs microseconds next to the bound evaluation
    model = ReducedModel.from_blueprint(bp)
    return _bound_regions(model, t1lo, t1hi, t2lo, t2hi, eps=eps, cells=cells)


def _eval_frontier(
    bp: Blueprint,
    model: ReducedModel,
    frontier: Sequence[Region],
    *,
    cells: int,
    eps_floor: float,
    eps_fixed: float | None,
    pool: ProcessPoolExecutor | None,
) -> dict[str, np.ndarray]:
    n = len(frontier)
    t1lo = np.fromiter((r.t1.lo for r in frontier), dtype=float, count=n)
    t1hi = np.fromiter((r.t1.hi for r in frontier), dtype=float, count=n)
    t2lo = np.fromiter((r.t2.lo for r in frontier), dtype=float, count=n)
    t2hi = np.fromiter((r.t2.hi for r in frontier), dtype=float, count=n)
    if eps_fixed is None:
        eps = np.maximum(eps_floor, 0.5 * ((t1hi - t1lo) + (t2hi - t2lo)))
    else:
        eps = np.full(n, max(eps_fixed, eps_floor))

    spans = [(i, min(i + _CHUNK, n)) for i in range(0, n, _CHUNK)]
    if pool is not None and len(spans) > 1:
        futures = [
            pool.submit(
                _bound_chunk_task,
                bp, t1lo[a:b], t1hi[a:b], t2lo[a:b], t2hi[a:b], eps[a:b], cells,
            )
            for a, b in spans
        ]
        parts = [f.result() for f in futures]
    else:
        parts = [
            _bound_chunk_task(
                bp, t1lo[a:b], t1hi[a:b], t2lo[a:b], t2hi[a:b], eps[a:b], cells,
            )
            for a, b in spans
        ]
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def certify(
    bp: Blueprint,
    bound: float,
    max_depth: int = 40,
    eps_rule: str = "mean-width",
    *,
    cells: int = DEFAULT_CELLS,
    eps_floor: float = EPS_FLOOR,
    workers: int = 1,
    checkpoint: str | os.PathLike | None = None,
    wave_budget: int | None = None,
    time_budget_s: float | None = None,
    log: Callable[[str], None] | None = None,
) -> Certificate | None:
    """Certify ``sup s(t1,t2) / c_GW < bound`` or refute it.

    Runs breadth-first waves over the frontier, so every region in a
    wave shares one depth.  Returns a Certificate, or None when a wave
    or time budget ran out first; in that case the state was saved to
    ``checkpoint`` and a later call with the same arguments resumes it.
    Budgets therefore require a checkpoint path.  ``workers`` > 1
    shards each wave across processes; the per-region arithmetic is
    identical either way, so certificates are byte-identical across
    worker counts.
    """
    if not (bound > 0.0 and np.isfinite(bound)):
        raise DegenerateInput(f"bound must be a positive finite real, got {bound!r}")
    if max_depth < 0:
        raise DegenerateInput("max_depth must be nonnegative")
    if cells < 2:
        raise DegenerateInput("cells must be at least 2")
    if not eps_floor > 0.0:
        raise DegenerateInput("eps_floor must be positive")
    eps_fixed = _parse_eps_rule(eps_rule)
    if (wave_budget is not None or time_budget_s is not None) and checkpoint is None:
        raise DegenerateInput("budgets need a checkpoint path to save progress to")

    model = ReducedModel.from_blueprint(bp)
    bp_id = blueprint_hash(bp)
    normalizer = constants().c_gw
    limit_lo, limit_hi = _limits(bound, normalizer)
    settings = {
        "generator": f"bisectgap {__version__}",
        "cells": cells,
        "eps_rule": eps_rule,
        "eps_floor": eps_floor,
        "max_depth": max_depth,
    }

    start = time.monotonic()
    done: list[tuple[Region, Interval]] = []
    frontier: list[Region] = [Region(Interval(-1.0, 1.0), Interval(-1.0, 1.0), 0)]
    wave = 0
    if checkpoint is not None and os.path.exists(checkpoint):
        done, frontier, wave = _load_checkpoint(checkpoint, bp_id, bound, settings)
        if log:
            log(f"resumed at wave {wave}: {len(done)} verified, frontier {len(frontier)}")

    unresolved: list[tuple[Region, Interval]] = []
    refuter: tuple[Region, Interval] | None = None
    waves_run = 0

    pool: ProcessPoolExecutor | None = None
    try:
        if workers > 1:
            ctx = multiprocessing.get_context("spawn")
            pool = ProcessPoolExecutor(max_workers=workers, mp_context=ctx)
        while frontier:
            if wave_budget is not None and waves_run >= wave_budget:
                _write_checkpoint(checkpoint, bp_id, bound, settings, wave, done, frontier)
                return None
            if time_budget_s is not None and time.monotonic() - start > time_budget_s:
                _write_checkpoint(checkpoint, bp_id, bound, settings, wave, done, frontier)
                return None

            out = _eval_frontier(
                bp, model, frontier,
                cells=cells, eps_floor=eps_floor, eps_fixed=eps_fixed, pool=pool,
            )
            s_hi = np.minimum(out["naive_hi"], out["mv_hi"])
            s_lo = out["naive_lo"]
            center_lo = out["center_lo"]

            next_frontier: list[Region] = []
            for i, region in enumerate(frontier):
                upper = Interval(float(s_lo[i]), float(s_hi[i]))
                if upper.hi < limit_lo:
                    done.append((region, upper))
                elif center_lo[i] > limit_hi:
                    if refuter is None:
                        refuter = (region, Interval(float(center_lo[i]), upper.hi))
                elif region.depth >= max_depth:
                    unresolved.append((region, upper))
                else:
                    next_frontier.extend(region.split())
            if refuter is not None:
                break
            frontier = next_frontier
            wave += 1
            waves_run += 1
            if checkpoint is not None:
                _write_checkpoint(checkpoint, bp_id, bound, settings, wave, done, frontier)
            if log:
                log(
                    f"wave {wave}: verified {len(done)}, frontier {len(frontier)},"
                    f" elapsed {time.monotonic() - start:.1f}s"
                )
    finally:
        if pool is not None:
            pool.shutdown()

    wall = time.monotonic() - start
    if refuter is not None:
        status = STATUS_REFUTED
        regions = (refuter,)
    elif unresolved:
        status = STATUS_INCONCLUSIVE
        regions = tuple(sorted(done + unresolved, key=lambda item: item[0].key()))
    else:
        status = STATUS_VERIFIED
        regions = tuple(sorted(done, key=lambda item: item[0].key()))
    return Certificate(
        blueprint_id=bp_id,
        bound=float(bound),
        normalizer=normalizer,
        regions=regions,
        settings=settings,
        status=status,
        wall_time_s=wall,
    )


# ---------------------------------------------------------------------------
# serialization

def _region_record(region: Region, s_upper: Interval) -> str:
    return (
        f"{region.t1.lo!r} {region.t1.hi!r} {region.t2.lo!r} {region.t2.hi!r}"
        f" {region.depth} {s_upper.lo!r} {s_upper.hi!r}"
    )


def certificate_text(cert: Certificate) -> str:
    lines = [
        _MAGIC,
        f"blueprint {cert.blueprint_id}",
        f"bound {cert.bound!r}",
        f"normalizer {cert.normalizer.lo!r} {cert.normalizer.hi!r}",
    ]
    for key in _SETTING_KEYS:
        lines.append(f"setting {key} {cert.settings[key]}")
    lines.append("regions:")
    for region, s_upper in cert.regions:
        lines.append(_region_record(region, s_upper))
    lines.append(f"status {cert.status}")
    lines.append(f"regions-total {len(cert.regions)}")
    if cert.wall_time_s is not None:
        lines.append(f"# wall-time-seconds {cert.wall_time_s:.3f}")
    return "\n".join(lines) + "\n"


def canonical_bytes(text: str) -> bytes:
    """Certificate bytes with comment lines removed.

    Two runs with identical settings agree on these bytes; only the
    ``#`` comments (timing) may differ.
    """
    kept = [line for line in text.splitlines() if not line.startswith("#")]
    return ("\n".join(kept) + "\n").encode()


def write_certificate(path: str | os.PathLike, cert: Certificate) -> None:
    tmp = os.fspath(path) + ".tmp"
    with open(tmp, "w") as handle:
        handle.write(certificate_text(cert))
    os.replace(tmp, os.fspath(path))


def _parse_float(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise FormatError(f"line {lineno}: bad float {token!r}") from None
    if not np.isfinite(value):
        raise FormatError(f"line {lineno}: non-finite value {token!r}")
    return value


def _parse_region_record(line: str, lineno: int) -> tuple[Region, Interval]:
    parts = line.split()
    if len(parts) != 7:
        raise FormatError(f"line {lineno}: expected 7 fields, got {len(parts)}")
    t1lo, t1hi, t2lo, t2hi = (_parse_float(p, lineno) for p in parts[:4])
    slo, shi = (_parse_float(p, lineno) for p in parts[5:])
    try:
        depth = int(parts[4])
    except ValueError:
        raise FormatError(f"line {lineno}: bad depth {parts[4]!r}") from None
    if depth < 0:
        raise FormatError(f"line {lineno}: negative depth")
    if not (-1.0 <= t1lo < t1hi <= 1.0 and -1.0 <= t2lo < t2hi <= 1.0):
        raise FormatError(f"line {lineno}: region outside the threshold square")
    if not slo <= shi:
        raise FormatError(f"line {lineno}: empty soundness enclosure")
    return (
        Region(Interval(t1lo, t1hi), Interval(t2lo, t2hi), depth),
        Interval(slo, shi),
    )


def parse_certificate(text: str) -> Certificate:
    lines = [
        (i + 1, line)
        for i, line in enumerate(text.splitlines())
        if line and not line.startswith("#")
    ]
    pos = 0

    def take(what: str) -> tuple[int, str]:
        nonlocal pos
        if pos >= len(lines):
            raise FormatError(f"truncated certificate: expected {what}")
        item = lines[pos]
        pos += 1
        return item

    lineno, line = take("magic line")
    if line != _MAGIC:
        raise FormatError(f"line {lineno}: not a certificate file")

    def keyed(key: str) -> tuple[int, str]:
        lineno, line = take(f"{key} line")
        if not line.startswith(key + " "):
            raise FormatError(f"line {lineno}: expected {key!r}")
        return lineno, line[len(key) + 1 :]

    _, bp_id = keyed("blueprint")
    lineno, bound_text = keyed("bound")
    bound = _parse_float(bound_text, lineno)
    lineno, norm_text = keyed("normalizer")
    norm_parts = norm_text.split()
    if len(norm_parts) != 2:
        raise FormatError(f"line {lineno}: normalizer needs two endpoints")
    normalizer = Interval(
        _parse_float(norm_parts[0], lineno), _parse_float(norm_parts[1], lineno)
    )

    settings: dict[str, object] = {}
    for key in _SETTING_KEYS:
        lineno, line = take("setting line")
        prefix = f"setting {key} "
        if not line.startswith(prefix):
            raise FormatError(f"line {lineno}: expected setting {key!r}")
        raw = line[len(prefix):]
        if key in ("cells", "max_depth"):
            try:
                settings[key] = int(raw)
            except ValueError:
                raise FormatError(f"line {lineno}: bad integer {raw!r}") from None
        elif key == "eps_floor":
            settings[key] = _parse_float(raw, lineno)
        else:
            settings[key] = raw

    lineno, line = take("regions header")
    if line != "regions:":
        raise FormatError(f"line {lineno}: expected 'regions:'")

    regions: list[tuple[Region, Interval]] = []
    status: str | None = None
    while True:
        lineno, line = take("region record or status")
        if line.startswith("status "):
            status = line[len("status "):]
            break
        regions.append(_parse_region_record(line, lineno))
    if status not in (STATUS_VERIFIED, STATUS_REFUTED, STATUS_INCONCLUSIVE):
        raise FormatError(f"line {lineno}: unknown status {status!r}")

    lineno, line = keyed("regions-total")
    try:
        total = int(line)
    except ValueError:
        raise FormatError(f"line {lineno}: bad region count {line!r}") from None
    if total != len(regions):
        raise FormatError(
            f"line {lineno}: region count {total} does not match {len(regions)} records"
        )
    if pos != len(lines):
        raise FormatError(f"line {lines[pos][0]}: trailing content")

    keys = [region.key() for region, _ in regions]
    if keys != sorted(keys):
        raise FormatError("regions are not in canonical order")
    if len(set(keys)) != len(keys):
        raise FormatError("duplicate region records")

    return Certificate(
        blueprint_id=bp_id,
        bound=bound,
        normalizer=normalizer,
        regions=tuple(regions),
        settings=settings,
        status=status,
    )


def read_certificate(path: str | os.PathLike) -> Certificate:
    with open(path) as handle:
        return parse_certificate(handle.read())


# ---------------------------------------------------------------------------
# checkpoints

def _write_checkpoint(
    path: str | os.PathLike,
    bp_id: str,
    bound: float,
    settings: Mapping[str, object],
    wave: int,
    done: Sequence[tuple[Region, Interval]],
    frontier: Sequence[Region],
) -> None:
    lines = [
        _CKPT_MAGIC,
        f"blueprint {bp_id}",
        f"bound {bound!r}",
    ]
    for key in _SETTING_KEYS:
        lines.append(f"setting {key} {settings[key]}")
    lines.append(f"wave {wave}")
    lines.append("done:")
    for region, s_upper in done:
        lines.append(_region_record(region, s_upper))
    lines.append("frontier:")
    for region in frontier:
        lines.append(
            f"{region.t1.lo!r} {region.t1.hi!r} {region.t2.lo!r} {region.t2.hi!r}"
            f" {region.depth}"
        )
    lines.append("end")
    tmp = os.fspath(path) + ".tmp"
    with open(tmp, "w") as handle:
        handle.write("\n".join(lines) + "\n")
    os.replace(tmp, os.fspath(path))


def _load_checkpoint(
    path: str | os.PathLike,
    bp_id: str,
    bound: float,
    settings: Mapping[str, object],
) -> tuple[list[tuple[Region, Interval]], list[Region], int]:
    with open(path) as handle:
        raw = handle.read()
    lines = [
        (i + 1, line)
        for i, line in enumerate(raw.splitlines())
        if line and not line.startswith("#")
    ]
    if not lines or lines[0][1] != _CKPT_MAGIC:
        raise FormatError(f"{path}: not a checkpoint file")
    expect = [f"blueprint {bp_id}", f"bound {bound!r}"]
    expect += [f"setting {key} {settings[key]}" for key in _SETTING_KEYS]
    for offset, wanted in enumerate(expect, start=1):
        if offset >= len(lines) or lines[offset][1] != wanted:
            raise FormatError(
                f"{path}: checkpoint was written with different settings"
                f" (expected {wanted!r})"
            )
    pos = 1 + len(expect)
    lineno, line = lines[pos]
    if not line.startswith("wave "):
        raise FormatError(f"{path} line {lineno}: expected wave counter")
    try:
        wave = int(line[len("wave "):])
    except ValueError:
        raise FormatError(f"{path} line {lineno}: bad wave counter") from None
    pos += 1
    if lines[pos][1] != "done:":
        raise FormatError(f"{path} line {lines[pos][0]}: expected 'done:'")
    pos += 1
    done: list[tuple[Region, Interval]] = []
    while lines[pos][1] != "frontier:":
        lineno, line = lines[pos]
        done.append(_parse_region_record(line, lineno))
        pos += 1
        if pos >= len(lines):
            raise FormatError(f"{path}: truncated checkpoint")
    pos += 1
    frontier: list[Region] = []
    while lines[pos][1] != "end":
        lineno, line = lines[pos]
        parts = line.split()
        if len(parts) != 5:
            raise FormatError(f"{path} line {lineno}: expected 5 fields")
        t1lo, t1hi, t2lo, t2hi = (_parse_float(p, lineno) for p in parts[:4])
        try:
            depth = int(parts[4])
        except ValueError:
            raise FormatError(f"{path} line {lineno}: bad depth") from None
        frontier.append(Region(Interval(t1lo, t1hi), Interval(t2lo, t2hi), depth))
        pos += 1
        if pos >= len(lines):
            raise FormatError(f"{path}: truncated checkpoint")
    return done, frontier, wave


# ---------------------------------------------------------------------------
# replay

def check_tiling(regions: Sequence[Region]) -> str | None:
    """Check that the regions tile the threshold square exactly.

    Returns None on success, otherwise a description of the first
    problem found.  All coordinates are dyadic (exact doubles), so the
    equality tests below are exact.
    """
    if not regions:
        return "no regions"
    area = Fraction(0)
    for region in regions:
        if not (
            -1.0 <= region.t1.lo < region.t1.hi <= 1.0
            and -1.0 <= region.t2.lo < region.t2.hi <= 1.0
        ):
            return f"region {region.key()} leaves the threshold square"
        area += (Fraction(region.t1.hi) - Fraction(region.t1.lo)) * (
            Fraction(region.t2.hi) - Fraction(region.t2.lo)
        )
    if area != 4:
        return f"region areas sum to {float(area)!r}, expected 4"

    # sweep over t1 slabs: within every elementary slab the covering
    # regions' t2 intervals must chain exactly from -1 to 1
    edges = sorted({r.t1.lo for r in regions} | {r.t1.hi for r in regions})
    if edges[0] != -1.0 or edges[-1] != 1.0:
        return "t1 edges do not reach the square boundary"
    index = {edge: i for i, edge in enumerate(edges)}
    starts = np.fromiter((index[r.t1.lo] for r in regions), dtype=np.int64)
    ends = np.fromiter((index[r.t1.hi] for r in regions), dtype=np.int64)
    counts = ends - starts
    members = int(counts.sum())
    if members > 200_000_000:
        raise TooLarge(f"tiling sweep needs {members} slab memberships")
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    slab = np.arange(members, dtype=np.int64) - np.repeat(offsets, counts) + np.repeat(
        starts, counts
    )
    t2lo = np.repeat(np.fromiter((r.t2.lo for r in regions), dtype=float), counts)
    t2hi = np.repeat(np.fromiter((r.t2.hi for r in regions), dtype=float), counts)
    order = np.lexsort((t2lo, slab))
    slab = slab[order]
    t2lo = t2lo[order]
    t2hi = t2hi[order]
    nslabs = len(edges) - 1
    present = np.unique(slab)
    if len(present) != nslabs:
        missing = np.setdiff1d(np.arange(nslabs), present)[0]
        return f"no region covers t1 in ({edges[missing]!r}, {edges[missing + 1]!r})"
    first = np.concatenate(([True], slab[1:] != slab[:-1]))
    last = np.concatenate((slab[1:] != slab[:-1], [True]))
    if not np.all(t2lo[first] == -1.0):
        k = int(np.nonzero(t2lo[first] != -1.0)[0][0])
        s = int(slab[first][k])
        return f"t2 cover starts at {t2lo[first][k]!r} in slab ({edges[s]!r}, {edges[s + 1]!r})"
    if not np.all(t2hi[last] == 1.0):
        k = int(np.nonzero(t2hi[last] != 1.0)[0][0])
        s = int(slab[last][k])
        return f"t2 cover ends at {t2hi[last][k]!r} in slab ({edges[s]!r}, {edges[s + 1]!r})"
    inner = ~first[1:]
    if not np.all(t2lo[1:][inner] == t2hi[:-1][inner]):
        bad = np.nonzero(t2lo[1:][inner] != t2hi[:-1][inner])[0][0]
        idx = np.nonzero(inner)[0][bad] + 1
        s = int(slab[idx])
        return (
            f"t2 cover breaks between {t2hi[idx - 1]!r} and {t2lo[idx]!r}"
            f" in slab ({edges[s]!r}, {edges[s + 1]!r})"
        )
    return None


def replay(
    cert: Certificate,
    blueprint: Blueprint | None = None,
    *,
    workers: int = 1,
    log: Callable[[str], None] | None = None,
) -> ReplayResult:
    """Independently re-check a certificate.

    Re-evaluates every region with the recorded settings, compares the
    recomputed enclosures for exact equality, re-checks the tiling
    (verified and inconclusive runs) and the threshold comparisons.
    Returns "verified" when everything reproduces, otherwise "mismatch"
    with the first offending region.  Raises FormatError when the
    certificate does not match the current build (unknown blueprint,
    different constants, unusable settings).
    """
    bp = blueprint if blueprint is not None else builtin_dstar()
    if blueprint_hash(bp) != cert.blueprint_id:
        raise FormatError(
            "certificate names a different blueprint; pass the matching one"
        )
    if cert.status not in (STATUS_VERIFIED, STATUS_REFUTED, STATUS_INCONCLUSIVE):
        raise FormatError(f"unknown status {cert.status!r}")
    current = constants().c_gw
    if (cert.normalizer.lo, cert.normalizer.hi) != (current.lo, current.hi):
        raise FormatError("certificate normalizer differs from this build's c_GW")
    eps_fixed = _parse_eps_rule(str(cert.settings["eps_rule"]))
    cells = int(cert.settings["cells"])
    eps_floor = float(cert.settings["eps_floor"])
    if cells < 2 or not eps_floor > 0.0:
        raise FormatError("unusable evaluation settings")
    if not cert.regions:
        raise FormatError("certificate has no regions")

    model = ReducedModel.from_blueprint(bp)
    limit_lo, limit_hi = _limits(cert.bound, cert.normalizer)

    if cert.status in (STATUS_VERIFIED, STATUS_INCONCLUSIVE):
        problem = check_tiling([region for region, _ in cert.regions])
        if problem is not None:
            return ReplayResult("mismatch", f"tiling: {problem}")
    elif len(cert.regions) != 1:
        return ReplayResult(
            "mismatch", "a refuted-region certificate must hold exactly one region"
        )

    pool: ProcessPoolExecutor | None = None
    try:
        if workers > 1:
            ctx = multiprocessing.get_context("spawn")
            pool = ProcessPoolExecutor(max_workers=workers, mp_context=ctx)
        regions = [region for region, _ in cert.regions]
        out = _eval_frontier(
            bp, model, regions,
            cells=cells, eps_floor=eps_floor, eps_fixed=eps_fixed, pool=pool,
        )
    finally:
        if pool is not None:
            pool.shutdown()

    s_hi = np.minimum(out["naive_hi"], out["mv_hi"])
    s_lo = out["naive_lo"]
    center_lo = out["center_lo"]

    failures = 0
    for i, (region, recorded) in enumerate(cert.regions):
        if cert.status == STATUS_REFUTED:
            recomputed = Interval(float(center_lo[i]), float(s_hi[i]))
        else:
            recomputed = Interval(float(s_lo[i]), float(s_hi[i]))
        if (recomputed.lo, recomputed.hi) != (recorded.lo, recorded.hi):
            return ReplayResult(
                "mismatch",
                f"region {region.key()} recomputes to"
                f" [{recomputed.lo!r}, {recomputed.hi!r}],"
                f" recorded [{recorded.lo!r}, {recorded.hi!r}]",
                region_index=i,
            )
        if cert.status == STATUS_VERIFIED:
            if not recorded.hi < limit_lo:
                return ReplayResult(
                    "mismatch",
                    f"region {region.key()} does not meet the bound",
                    region_index=i,
                )
        elif cert.status == STATUS_REFUTED:
            if not recorded.lo > limit_hi:
                return ReplayResult(
                    "mismatch",
                    f"center value {recorded.lo!r} does not refute the bound",
                    region_index=i,
                )
        else:
            failures += int(not recorded.hi < limit_lo)
        if log and (i + 1) % 4096 == 0:
            log(f"replayed {i + 1}/{len(cert.regions)} regions")

    if cert.status == STATUS_INCONCLUSIVE and failures == 0:
        return ReplayResult(
            "mismatch", "inconclusive certificate, yet every region meets the bound"
        )
    return ReplayResult("verified")
