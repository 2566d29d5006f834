"""Finite weighted instances sampled from a blueprint.

`build_instance` realizes the correlated-Gaussian graph as a finite
vertex- and edge-weighted graph.  Vertices are (bias, cell) pairs over an
equal-area sphere partition, plus two auxiliary vertices sharing a single
edge.  Edges come from a four-step sampling procedure: draw a
configuration, draw a correlated Gaussian pair scaled to unit expected
norm, route the draw to the auxiliary edge unless both norms and the
inner product land within eps of their targets, and otherwise connect the
two (bias, cell) vertices the normalized pair falls in.  Edge weights are
empirical frequencies, so they sum to one by construction.

The attached vector solution places the sphere coordinates in the first
`dim` components; the axis after them carries the reference direction v0,
and the last two axes hold the auxiliary vectors, one each, so the
auxiliary pair is orthogonal to every other vector and to each other.  A
vertex with bias b in cell C gets b*v0 + sqrt(1-b^2) * (rep of C).

Vertex weights copy the measure, one copy per cell.  The measure's
decimal image carries a tiny balance residual, and per-cell replication
multiplies it by the cell count; the construction therefore shifts the
weight of the largest-magnitude bias by residual/bias (a relative change
around 1e-10) so the instance balances to machine precision.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from ..blueprint import Blueprint, relative_bias
from ..errors import DegenerateInput, InfeasibleBlueprint, TooLarge
from .partition import SpherePartition, partition_sphere
from .sampler import substream

_CHUNK = 1 << 14

# substream purposes 0 and 1 belong to the estimators; the instance
# sampler uses its own so the two never overlap on a shared seed
_CONFIG_DRAW = 2
_PAIR_DRAW = 3

#: Refuse instances beyond this many (bias, cell) vertices.
MAX_VERTICES = 200_000

_MAGIC = "bisectgap-instance v1"


@dataclass(frozen=True)
class Vertex:
    bias: float
    cell: int
    weight: float
    symbol: str = ""


@dataclass(frozen=True, eq=False)
class MixtureInstance:
    """A sampled instance with its vector solution.

    `vectors` has one row per vertex followed by the two auxiliary rows,
    so `vectors[aux[0]]` and `vectors[aux[1]]` are the auxiliary vectors.
    `cell_perp` holds the per-cell representative directions used by the
    non-auxiliary vectors; rows align with cell ids.
    """

    name: str
    dim: int
    eps: float
    n_samples: int
    seed: int
    vertices: tuple[Vertex, ...]
    edges: tuple[tuple[int, int, float], ...]
    v0: np.ndarray
    vectors: np.ndarray
    aux: tuple[int, int]
    aux_weights: tuple[float, float]
    cell_perp: np.ndarray
    good_fraction: float

    def __post_init__(self) -> None:
        n = len(self.vertices) + 2
        if self.vectors.shape[0] != n:
            raise DegenerateInput(
                f"{self.vectors.shape[0]} vector rows for {n} vertices")
        if self.aux != (len(self.vertices), len(self.vertices) + 1):
            raise DegenerateInput("auxiliary vertices must follow the others")
        for vx in self.vertices:
            if not (vx.weight > 0.0):
                raise DegenerateInput(f"vertex weight {vx.weight} not positive")
        for u, v, w in self.edges:
            if not (0 <= u <= v < n):
                raise DegenerateInput(f"edge ({u}, {v}) out of range")
            if not (w > 0.0):
                raise DegenerateInput(f"edge weight {w} not positive")

    def total_weight(self) -> float:
        return math.fsum(v.weight for v in self.vertices) + math.fsum(self.aux_weights)

    def aux_edge_weight(self) -> float:
        """Weight on the auxiliary edge; 0.0 when every sample was good."""
        total = 0.0
        for u, v, w in self.edges:
            if u in self.aux or v in self.aux:
                total += w
        return total


def _snapped_weights(bp: Blueprint) -> dict[str, float]:
    mids = {s: bp.mu[s].mid for s in bp.symbols()}
    biases = {s: bp.bias_value(s).mid for s in bp.symbols()}
    residual = math.fsum(mids[s] * biases[s] for s in bp.symbols())
    anchor = max(bp.symbols(), key=lambda s: (abs(biases[s]), s))
    mids[anchor] -= residual / biases[anchor]
    if mids[anchor] <= 0.0:
        raise InfeasibleBlueprint(
            f"balance correction drives mu({anchor}) nonpositive")
    return mids


def build_instance(bp: Blueprint, dim: int, eps: float, n_samples: int,
                   seed: int) -> MixtureInstance:
    """Sample a finite weighted instance of the blueprint's Gaussian graph."""
    for wc in bp.configs:
        if not wc.theta.triangle_strict():
            raise InfeasibleBlueprint(
                f"configuration ({wc.i}, {wc.j}) is not strictly inside the "
                "triangle bounds; widen it first")
    for s in bp.symbols():
        if not (bp.mu[s].lo > 0.0):
            raise InfeasibleBlueprint(
                f"mu({s}) is not provably positive; spread the measure first")
    if n_samples < 1:
        raise DegenerateInput("need at least one sample")

    part = partition_sphere(dim, eps)
    m = part.n_cells
    symbols = bp.symbols()
    n_vertices = len(symbols) * m
    if n_vertices > MAX_VERTICES:
        raise TooLarge(f"{n_vertices} vertices exceed the {MAX_VERTICES} limit")
    sym_index = {s: a for a, s in enumerate(symbols)}
    weights = _snapped_weights(bp)
    bias_mid = {s: bp.bias_value(s).mid for s in symbols}

    probs = np.array([wc.weight.mid for wc in bp.configs])
    counts = substream(seed, _CONFIG_DRAW).multinomial(n_samples, probs / probs.sum())

    scale = 1.0 / math.sqrt(dim)
    key_chunks: list[np.ndarray] = []
    n_bad = 0
    for k, wc in enumerate(bp.configs):
        rho = relative_bias(wc.theta).mid
        comp = math.sqrt(max(0.0, 1.0 - rho * rho))
        base_i = sym_index[wc.i] * m
        base_j = sym_index[wc.j] * m
        done = 0
        chunk = 0
        while done < int(counts[k]):
            mc = min(_CHUNK, int(counts[k]) - done)
            rng = substream(seed, _PAIR_DRAW, k, chunk)
            x = rng.standard_normal((mc, dim))
            y = rho * x + comp * rng.standard_normal((mc, dim))
            x *= scale
            y *= scale
            nx = np.einsum("ij,ij->i", x, x)
            ny = np.einsum("ij,ij->i", y, y)
            ip = np.einsum("ij,ij->i", x, y)
            good = ((np.abs(nx - 1.0) < eps) & (np.abs(ny - 1.0) < eps)
                    & (np.abs(ip - rho) < eps))
            n_bad += int(mc - np.count_nonzero(good))
            if np.any(good):
                u = x[good] / np.sqrt(nx[good])[:, None]
                v = y[good] / np.sqrt(ny[good])[:, None]
                vi = base_i + part.assign(u)
                vj = base_j + part.assign(v)
                lo = np.minimum(vi, vj).astype(np.int64)
                hi = np.maximum(vi, vj).astype(np.int64)
                key_chunks.append(lo * n_vertices + hi)
            done += mc
            chunk += 1

    edges: list[tuple[int, int, float]] = []
    if key_chunks:
        keys, key_counts = np.unique(np.concatenate(key_chunks), return_counts=True)
        for key, cnt in zip(keys, key_counts):
            edges.append((int(key) // n_vertices, int(key) % n_vertices,
                          float(cnt) / n_samples))
    if n_bad:
        edges.append((n_vertices, n_vertices + 1, n_bad / n_samples))

    width = dim + 3
    v0 = np.zeros(width)
    v0[dim] = 1.0
    vectors = np.zeros((n_vertices + 2, width))
    reps = part.rep_matrix()
    vertices: list[Vertex] = []
    for s in symbols:
        b = bias_mid[s]
        rows = slice(sym_index[s] * m, (sym_index[s] + 1) * m)
        vectors[rows, :dim] = math.sqrt(max(0.0, 1.0 - b * b)) * reps
        vectors[rows, dim] = b
        for c in range(m):
            vertices.append(Vertex(b, c, weights[s], s))
    vectors[n_vertices, dim + 1] = 1.0
    vectors[n_vertices + 1, dim + 2] = 1.0

    return MixtureInstance(
        name=bp.name,
        dim=dim,
        eps=eps,
        n_samples=n_samples,
        seed=seed,
        vertices=tuple(vertices),
        edges=tuple(edges),
        v0=v0,
        vectors=vectors,
        aux=(n_vertices, n_vertices + 1),
        aux_weights=(1.0, 1.0),
        cell_perp=reps,
        good_fraction=1.0 - n_bad / n_samples,
    )


def weighted_balance(inst: MixtureInstance) -> float:
    """Sum of w_V(i) * (v0 . v_i) over all vertices, auxiliaries included."""
    w = np.array([v.weight for v in inst.vertices] + list(inst.aux_weights))
    return float(w @ (inst.vectors @ inst.v0))


def sdp_value(inst: MixtureInstance) -> float:
    """Sum of w_E * (1 - v_u . v_v)/2 over the edges."""
    total = []
    for u, v, w in inst.edges:
        total.append(w * 0.5 * (1.0 - float(inst.vectors[u] @ inst.vectors[v])))
    return math.fsum(total)


def edge_triangle_slacks(inst: MixtureInstance) -> np.ndarray:
    """(lower, upper) triangle slacks of each non-auxiliary edge's vectors.

    For an edge {i, j} with biases b_i, b_j and realized inner product
    d = v_i . v_j, the slacks are d - (-1 + |b_i + b_j|) and
    (1 - |b_i - b_j|) - d; the edge's vector triple (v_i, v_j, v0)
    satisfies the strict triangle inequalities when both are positive.
    """
    rows = []
    for u, v, _ in inst.edges:
        if u in inst.aux or v in inst.aux:
            continue
        bi = inst.vertices[u].bias
        bj = inst.vertices[v].bias
        dot = float(inst.vectors[u] @ inst.vectors[v])
        rows.append((dot - (-1.0 + abs(bi + bj)), (1.0 - abs(bi - bj)) - dot))
    return np.array(rows).reshape(-1, 2)


def uncorrelatedness(inst: MixtureInstance) -> float:
    """Weighted mean absolute correlation of the cell directions.

    Sum over ordered cell pairs (diagonal included) of
    w_C w_C' |perp_C . perp_C'| divided by (sum of cell weights)^2, where
    a cell's weight is the total weight of the vertices it carries.
    """
    m = inst.cell_perp.shape[0]
    w = np.zeros(m)
    for v in inst.vertices:
        if not (0 <= v.cell < m):
            raise DegenerateInput(f"vertex cell {v.cell} has no representative")
        w[v.cell] += v.weight
    total = w.sum()
    if total <= 0.0:
        raise DegenerateInput("instance carries no cell weight")
    gram = np.abs(inst.cell_perp @ inst.cell_perp.T)
    return float(w @ gram @ w) / float(total) ** 2


def best_balanced_cut_small(inst: MixtureInstance, slack: float) -> float:
    """Exact best cut over subsets whose imbalance is at most slack * total.

    Exhaustively enumerates subsets of the non-auxiliary vertices (the
    auxiliary pair contributes a side count of 0, 1, or 2, and its edge is
    cut exactly when the pair is split).  A subset S with auxiliary count
    a is feasible when |2 (w(S) + a) - W| <= slack * W for the grand total
    W, and its value is the weight of edges crossing the split.
    """
    n = len(inst.vertices)
    if n > 24:
        raise TooLarge(f"{n} vertices is beyond the exhaustive-enumeration limit")
    if slack < 0.0:
        raise DegenerateInput("slack must be nonnegative")

    w = np.array([v.weight for v in inst.vertices])
    total = float(w.sum() + sum(inst.aux_weights))
    adjacency = np.zeros((n, n))
    aux_edge = 0.0
    for u, v, we in inst.edges:
        u_aux, v_aux = u in inst.aux, v in inst.aux
        if u_aux and v_aux:
            aux_edge += we
        elif u_aux or v_aux:
            raise DegenerateInput(
                "edges between auxiliary and regular vertices are not supported")
        else:
            adjacency[u, v] += we
            adjacency[v, u] += we
    a1, a2 = inst.aux_weights

    best = -math.inf
    chunk = 1 << 16
    bits = np.arange(n, dtype=np.uint32)
    limit = slack * total
    for start in range(0, 1 << n, chunk):
        ids = np.arange(start, min(start + chunk, 1 << n), dtype=np.uint32)
        side = ((ids[:, None] >> bits) & 1).astype(np.float64)
        cut = np.einsum("ci,ij,cj->c", side, adjacency, 1.0 - side)
        bal = side @ w
        for aux_in, aux_cut in ((0.0, 0.0), (a1, aux_edge), (a1 + a2, 0.0)):
            feasible = np.abs(2.0 * (bal + aux_in) - total) <= limit
            if np.any(feasible):
                best = max(best, float(np.max(cut[feasible])) + aux_cut)
    if best == -math.inf:
        raise DegenerateInput(
            f"no subset meets the balance slack {slack}")
    return best


def save_instance(inst: MixtureInstance, path: str | os.PathLike) -> None:
    """Write the instance as a line-oriented text file, losslessly."""
    lines = [_MAGIC]
    lines.append(f"name {inst.name}")
    lines.append(f"dim {inst.dim}")
    lines.append(f"eps {inst.eps!r}")
    lines.append(f"n-samples {inst.n_samples}")
    lines.append(f"seed {inst.seed}")
    lines.append(f"good-fraction {inst.good_fraction!r}")
    m, pdim = inst.cell_perp.shape
    lines.append(f"cells {m} {pdim}")
    for row in inst.cell_perp:
        lines.append(" ".join(repr(float(x)) for x in row))
    lines.append(f"v0 {len(inst.v0)}")
    lines.append(" ".join(repr(float(x)) for x in inst.v0))
    lines.append(f"vertices {len(inst.vertices)}")
    for v in inst.vertices:
        sym = v.symbol if v.symbol else "-"
        lines.append(f"{v.bias!r} {v.cell} {v.weight!r} {sym}")
    lines.append(f"aux {inst.aux[0]} {inst.aux[1]} "
                 f"{inst.aux_weights[0]!r} {inst.aux_weights[1]!r}")
    rows, width = inst.vectors.shape
    lines.append(f"vectors {rows} {width}")
    for row in inst.vectors:
        lines.append(" ".join(repr(float(x)) for x in row))
    lines.append(f"edges {len(inst.edges)}")
    for u, v, we in inst.edges:
        lines.append(f"{u} {v} {we!r}")
    lines.append("end")
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def _expect(line: str, prefix: str) -> list[str]:
    if not line.startswith(prefix + " "):
        raise DegenerateInput(f"malformed instance file at {prefix!r} line")
    return line[len(prefix) + 1:].split()


def load_instance(path: str | os.PathLike) -> MixtureInstance:
    """Read an instance written by `save_instance`."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    it = iter(lines)
    try:
        if next(it) != _MAGIC:
            raise DegenerateInput("not an instance file")
        name = next(it).removeprefix("name ")
        dim = int(_expect(next(it), "dim")[0])
        eps = float(_expect(next(it), "eps")[0])
        n_samples = int(_expect(next(it), "n-samples")[0])
        seed = int(_expect(next(it), "seed")[0])
        good = float(_expect(next(it), "good-fraction")[0])
        m, pdim = map(int, _expect(next(it), "cells"))
        cell_perp = np.array([[float(x) for x in next(it).split()]
                              for _ in range(m)]).reshape(m, pdim)
        width = int(_expect(next(it), "v0")[0])
        v0 = np.array([float(x) for x in next(it).split()])
        if len(v0) != width:
            raise DegenerateInput("v0 length mismatch")
        n = int(_expect(next(it), "vertices")[0])
        vertices = []
        for _ in range(n):
            bias_s, cell_s, weight_s, sym = next(it).split()
            vertices.append(Vertex(float(bias_s), int(cell_s), float(weight_s),
                                   "" if sym == "-" else sym))
        aux_parts = _expect(next(it), "aux")
        aux = (int(aux_parts[0]), int(aux_parts[1]))
        aux_weights = (float(aux_parts[2]), float(aux_parts[3]))
        rows, vwidth = map(int, _expect(next(it), "vectors"))
        vectors = np.array([[float(x) for x in next(it).split()]
                            for _ in range(rows)]).reshape(rows, vwidth)
        n_edges = int(_expect(next(it), "edges")[0])
        edges = []
        for _ in range(n_edges):
            u_s, v_s, w_s = next(it).split()
            edges.append((int(u_s), int(v_s), float(w_s)))
        if next(it) != "end":
            raise DegenerateInput("missing end marker")
    except StopIteration:
        raise DegenerateInput("truncated instance file") from None
    return MixtureInstance(
        name=name, dim=dim, eps=eps, n_samples=n_samples, seed=seed,
        vertices=tuple(vertices), edges=tuple(edges), v0=v0, vectors=vectors,
        aux=aux, aux_weights=aux_weights, cell_perp=cell_perp,
        good_fraction=good,
    )
