"""Equal-area sphere partitions with audited cell diameters.

The circle (dim 2) splits into equal arcs, enough of them that each arc's
length, and so its chord diameter, stays at or below the requested eps.

The 2-sphere (dim 3) uses a zonal layout: two polar caps and a stack of
collars, each collar carrying a ring of equal cells.  Collar boundaries
are placed by cumulative cell count at cos(theta) = 1 - 2m/N, which makes
every cell's area exactly 4*pi/N; the collar and ring counts only decide
where those boundaries fall.  Cell diameters are audited rather than
assumed: a cap of opening angle a has chord diameter 2*sin(a), and a cell
spanning [t1, t2] x [p1, p2] has diameter at most

    2*sin((t2 - t1)/2) + 2*s*sin(min(p2 - p1, pi)/2),

with s the largest sine of the polar angle inside the band (the triangle
inequality through the point sharing one endpoint's parallel and the
other's meridian).  If any audited diameter exceeds eps, the cell count
grows by a factor 1.3 and the layout is rebuilt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateInput, TooLarge

#: Refuse partitions beyond this many cells.
MAX_CELLS = 1_000_000

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class SphereCell:
    """One cell: representative unit vector, audited diameter, exact area.

    `bounds` is (phi_lo, phi_hi) on the circle and (theta_lo, theta_hi,
    phi_lo, phi_hi) on the 2-sphere; caps span the full phi range.
    """

    index: int
    rep: np.ndarray
    diameter: float
    area: float
    bounds: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class SpherePartition:
    """A partition of the unit sphere in R^dim into equal-measure cells."""

    dim: int
    eps: float
    cells: tuple[SphereCell, ...]
    _band_theta: np.ndarray = field(repr=False)
    _band_start: np.ndarray = field(repr=False)
    _band_count: np.ndarray = field(repr=False)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def assign(self, points: np.ndarray) -> np.ndarray:
        """Cell index for each row of `points` (shape (m, dim), unit rows)."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise DegenerateInput(
                f"expected points of shape (m, {self.dim}), got {pts.shape}")
        phi = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), _TWO_PI)
        if self.dim == 2:
            band = np.zeros(len(pts), dtype=np.intp)
        else:
            theta = np.arccos(np.clip(pts[:, 2], -1.0, 1.0))
            band = np.searchsorted(self._band_theta[1:-1], theta, side="right")
        count = self._band_count[band]
        j = np.minimum((phi * (count / _TWO_PI)).astype(np.intp), count - 1)
        return self._band_start[band] + j

    def rep_matrix(self) -> np.ndarray:
        """All representative vectors stacked, shape (n_cells, dim)."""
        return np.stack([c.rep for c in self.cells])


def _circle_cells(n: int) -> tuple[SphereCell, ...]:
    width = _TWO_PI / n
    diameter = 2.0 * math.sin(min(width, math.pi) / 2.0)
    cells = []
    for j in range(n):
        mid = (j + 0.5) * width
        rep = np.array([math.cos(mid), math.sin(mid)])
        cells.append(SphereCell(j, rep, diameter, width,
                                (j * width, (j + 1) * width)))
    return tuple(cells)


def _zonal_band_counts(n_cells: int) -> list[int]:
    """Ring sizes for the collars between the two polar caps."""
    area = 4.0 * math.pi / n_cells
    theta_cap = math.acos(1.0 - 2.0 / n_cells)
    n_collars = max(1, round((math.pi - 2.0 * theta_cap) / math.sqrt(area)))
    step = (math.pi - 2.0 * theta_cap) / n_collars
    counts = []
    cum_ideal = 0.0
    assigned = 0
    for i in range(n_collars):
        lo = theta_cap + i * step
        hi = theta_cap + (i + 1) * step
        cum_ideal += (math.cos(lo) - math.cos(hi)) * _TWO_PI / area
        k = max(1, round(cum_ideal) - assigned)
        assigned += k
        counts.append(k)
    return counts


def _zonal_layout(n_request: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(band theta edges, band start indices, band cell counts).

    Bands are the top cap, the collars, and the bottom cap.  Edges sit at
    cos(theta) = 1 - 2m/N with m the cumulative cell count, so all cells
    have area exactly 4*pi/N regardless of how the rounding went.
    """
    ring_counts = _zonal_band_counts(n_request)
    counts = np.array([1] + ring_counts + [1], dtype=np.intp)
    start = np.concatenate(([0], np.cumsum(counts)[:-1]))
    total = int(counts.sum())
    cum = np.concatenate(([0], np.cumsum(counts)))
    theta = np.arccos(np.clip(1.0 - 2.0 * cum / total, -1.0, 1.0))
    return theta, start, counts


def _band_diameter(theta_lo: float, theta_hi: float, count: int) -> float:
    if theta_lo == 0.0 or theta_hi >= math.pi:
        opening = theta_hi if theta_lo == 0.0 else math.pi - theta_lo
        return 2.0 * math.sin(min(opening, math.pi / 2.0))
    polar = 2.0 * math.sin((theta_hi - theta_lo) / 2.0)
    if theta_lo <= math.pi / 2.0 <= theta_hi:
        s = 1.0
    else:
        s = max(math.sin(theta_lo), math.sin(theta_hi))
    azimuthal = 2.0 * s * math.sin(min(_TWO_PI / count, math.pi) / 2.0)
    return polar + azimuthal


def _sphere_cells(theta: np.ndarray, start: np.ndarray,
                  counts: np.ndarray) -> tuple[SphereCell, ...]:
    total = int(counts.sum())
    area = 4.0 * math.pi / total
    cells = []
    for b in range(len(counts)):
        t_lo, t_hi = float(theta[b]), float(theta[b + 1])
        k = int(counts[b])
        diameter = _band_diameter(t_lo, t_hi, k)
        if b == 0 or b == len(counts) - 1:
            pole = 1.0 if b == 0 else -1.0
            rep = np.array([0.0, 0.0, pole])
            cells.append(SphereCell(int(start[b]), rep, diameter, area,
                                    (t_lo, t_hi, 0.0, _TWO_PI)))
            continue
        t_mid = 0.5 * (t_lo + t_hi)
        width = _TWO_PI / k
        for j in range(k):
            p_lo, p_hi = j * width, (j + 1) * width
            p_mid = 0.5 * (p_lo + p_hi)
            rep = np.array([
                math.sin(t_mid) * math.cos(p_mid),
                math.sin(t_mid) * math.sin(p_mid),
                math.cos(t_mid),
            ])
            cells.append(SphereCell(int(start[b]) + j, rep, diameter, area,
                                    (t_lo, t_hi, p_lo, p_hi)))
    return tuple(cells)


def partition_sphere(dim: int, eps: float) -> SpherePartition:
    """Equal-measure partition whose audited cell diameters are all <= eps."""
    if dim not in (2, 3):
        raise DegenerateInput(f"only dimensions 2 and 3 are supported, got {dim}")
    if not (0.0 < eps <= 2.0):
        raise DegenerateInput(f"eps must lie in (0, 2], got {eps}")

    if dim == 2:
        n = max(1, math.ceil(_TWO_PI / eps))
        if n > MAX_CELLS:
            raise TooLarge(f"{n} arcs exceed the {MAX_CELLS}-cell limit")
        return SpherePartition(
            dim=2, eps=eps, cells=_circle_cells(n),
            _band_theta=np.array([0.0, math.pi]),
            _band_start=np.array([0], dtype=np.intp),
            _band_count=np.array([n], dtype=np.intp),
        )

    n = max(4, math.ceil(8.0 * math.pi / (eps * eps)))
    while True:
        if n > MAX_CELLS:
            raise TooLarge(
                f"diameter {eps} needs more than {MAX_CELLS} cells")
        theta, start, counts = _zonal_layout(n)
        worst = max(
            _band_diameter(float(theta[b]), float(theta[b + 1]), int(counts[b]))
            for b in range(len(counts))
        )
        if worst <= eps:
            return SpherePartition(
                dim=3, eps=eps, cells=_sphere_cells(theta, start, counts),
                _band_theta=theta, _band_start=start, _band_count=counts,
            )
        n = math.ceil(n * 1.3) + 1
