"""Greedy aggregation of the matrix graph into coarse-level unknowns.

The heavy lifting happens in :func:`amgkit.kernels.build_aggregates`; this
module owns the parameter/result containers, the deterministic renumbering
(aggregates are ordered by ascending seed vertex id, so a one-rank parallel
run reproduces the sequential hierarchy exactly), and the invariant checks
used by the test-suite.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .kernels import DIRICHLET, UNAGGREGATED


@dataclass(frozen=True)
class AggregationParams:
    """Aggregate size/shape bounds and the strength thresholds they use."""

    s_min: int = 4
    s_max: int = 6
    d_max: int = 2
    delta: float = 1.0 / 3.0
    beta: float = 1.0e-5

    def __post_init__(self):
        if not 1 <= self.s_min <= self.s_max:
            raise ValueError(f"need 1 <= s_min <= s_max, got {self.s_min}, {self.s_max}")
        if self.d_max < 1:
            raise ValueError(f"d_max must be >= 1, got {self.d_max}")


@dataclass(frozen=True)
class AggregatesMap:
    """Surjective map vertex -> aggregate id.

    ``agg_of[v]`` is the aggregate id of vertex v or -1 for Dirichlet
    vertices, which stay unaggregated and vanish from the coarse level.
    Aggregates are numbered 0..n-1 by ascending seed vertex id.
    """

    agg_of: np.ndarray
    seed_of: np.ndarray
    sizes: np.ndarray
    n_fine: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n_fine", int(self.agg_of.shape[0]))
        for arr in (self.agg_of, self.seed_of, self.sizes):
            arr.setflags(write=False)

    @property
    def n_aggregates(self):
        return int(self.seed_of.shape[0])

    def members(self):
        """List of member-vertex arrays, one per aggregate."""
        order = np.argsort(self.agg_of, kind="stable")
        order = order[self.agg_of[order] >= 0]
        bounds = np.searchsorted(self.agg_of[order], np.arange(self.n_aggregates + 1))
        return [order[bounds[a]:bounds[a + 1]] for a in range(self.n_aggregates)]

    def dump_csv(self, path):
        """Write vertex,aggregate pairs for external visualization."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["vertex", "aggregate"])
            for v, a in enumerate(self.agg_of):
                writer.writerow([v, int(a)])


def aggregate(A, profile, params=AggregationParams()):
    """Cluster the graph of A into aggregates using the strength profile.

    The profile must come from the same matrix.  Always succeeds; in the
    worst case every vertex becomes its own aggregate.
    """
    if profile.strong.shape[0] != A.nnz or profile.vertex_class.shape[0] != A.n:
        raise ValueError("strength profile does not match the matrix")
    deg = np.diff(A.row_offsets).astype(np.int64)
    rows = A.row_ids()
    has_diag = np.zeros(A.n, dtype=np.int64)
    diag_mask = rows == A.col_indices
    np.add.at(has_diag, rows[diag_mask], 1)
    deg -= has_diag
    agg_of, seeds, sizes = kernels.build_aggregates(
        A.row_offsets,
        A.col_indices,
        profile.strong,
        profile.two_way,
        profile.one_way,
        profile.vertex_class,
        deg,
        params.s_min,
        params.s_max,
        params.d_max,
    )
    return _renumber_by_seed(agg_of, seeds, sizes)


def _renumber_by_seed(agg_of, seeds, sizes):
    order = np.argsort(seeds, kind="stable")
    remap = np.empty(seeds.shape[0], dtype=np.int64)
    remap[order] = np.arange(seeds.shape[0], dtype=np.int64)
    new_agg = agg_of.copy()
    mask = agg_of >= 0
    new_agg[mask] = remap[agg_of[mask]]
    return AggregatesMap(new_agg, seeds[order].copy(), sizes[order].copy())


def check_aggregates(A, profile, params, agg):
    """Assert the structural aggregate invariants; returns None or raises.

    Checks: the map covers exactly the non-Dirichlet vertices, aggregates
    are disjoint (implied by it being a map) and connected, sizes stay
    within s_max, and non-isolated aggregates respect the diameter bound.
    """
    vclass = profile.vertex_class
    unagg = agg.agg_of == UNAGGREGATED
    if not np.array_equal(unagg, vclass == DIRICHLET):
        raise AssertionError("aggregation must cover exactly the non-Dirichlet vertices")
    if agg.n_aggregates:
        counts = np.bincount(agg.agg_of[~unagg], minlength=agg.n_aggregates)
        if not np.array_equal(counts, agg.sizes):
            raise AssertionError("aggregate sizes inconsistent with the map")
        if counts.min() < 1:
            raise AssertionError("empty aggregate")
        if counts.max() > params.s_max:
            raise AssertionError(f"aggregate larger than s_max: {counts.max()}")
    for a, mem in enumerate(agg.members()):
        dia = _bfs_diameter(A, mem)
        if dia < 0:
            raise AssertionError(f"aggregate {a} is disconnected")
        n_iso = int(np.count_nonzero(vclass[mem] == kernels.ISOLATED))
        if 0 < n_iso < mem.size:
            raise AssertionError(f"aggregate {a} mixes isolated and regular vertices")
        if n_iso == 0 and dia > params.d_max:
            raise AssertionError(f"aggregate {a} has diameter {dia} > {params.d_max}")


def _bfs_diameter(A, members):
    """Exact diameter of the induced subgraph; -1 if disconnected."""
    members = np.asarray(members)
    local = {int(v): k for k, v in enumerate(members)}
    m = members.size
    adj = [[] for _ in range(m)]
    for k, v in enumerate(members):
        cols, _ = A.row(int(v))
        for j in cols:
            lj = local.get(int(j))
            if lj is not None and lj != k:
                adj[k].append(lj)
    dia = 0
    for src in range(m):
        dist = np.full(m, -1)
        dist[src] = 0
        queue = [src]
        while queue:
            u = queue.pop(0)
            for w in adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if dist.min() < 0:
            return -1
        dia = max(dia, int(dist.max()))
    return dia
