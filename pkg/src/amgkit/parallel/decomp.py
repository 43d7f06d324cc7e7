"""Index-set decomposition, overlap construction, localized operators, and
next-neighbour communication for the virtual-rank simulator.

Each rank stores a square local matrix over its extended index set (owned
indices first, then halo copies, both ascending by global id).  Copy rows
are identity rows, so applying the local operator to a consistently stored
vector yields exact results on all owned entries without communication; a
single exchange then refreshes the copies.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..solvers import SmootherSpec, smooth
from ..sparse import CsrMatrix, csr_from_coo

OWNER = 0
COPY = 1


class ConsistencyError(RuntimeError):
    """A copy entry disagrees with its owner's value."""


@dataclass(frozen=True)
class Distribution:
    """Owner assignment for the active global indices of one level."""

    level: int
    active_ranks: tuple
    ids: np.ndarray      # sorted active global indices
    owners: np.ndarray   # owning rank, aligned with ids

    def __post_init__(self):
        object.__setattr__(self, "active_ranks", tuple(self.active_ranks))
        self.ids.setflags(write=False)
        self.owners.setflags(write=False)
        if self.ids.shape != self.owners.shape:
            raise ValueError("ids and owners must align")
        if self.ids.size and np.any(np.diff(self.ids) <= 0):
            raise ValueError("ids must be strictly increasing")

    @property
    def n_active(self):
        return int(self.ids.size)

    def owner_of(self, gids):
        """Owning rank for each global id (raises on unknown ids)."""
        pos = np.searchsorted(self.ids, gids)
        if np.any(pos >= self.ids.size) or np.any(self.ids[np.minimum(pos, self.ids.size - 1)] != gids):
            raise KeyError("global id not active in this distribution")
        return self.owners[pos]

    def owned_by(self, rank):
        return self.ids[self.owners == rank]


@dataclass(frozen=True)
class ParallelIndexSet:
    """Extended local index set of one rank: owned ids then halo copies.

    Both segments are strictly increasing by global id and disjoint.
    """

    global_ids: np.ndarray
    n_owner: int

    def __post_init__(self):
        self.global_ids.setflags(write=False)
        if not 0 <= self.n_owner <= self.global_ids.size:
            raise ValueError("n_owner out of range")
        own = self.global_ids[: self.n_owner]
        cp = self.global_ids[self.n_owner:]
        for seg in (own, cp):
            if seg.size and np.any(np.diff(seg) <= 0):
                raise ValueError("index segments must be strictly increasing")
        if own.size and cp.size and np.intersect1d(own, cp).size:
            raise ValueError("owned and copy segments overlap")

    @property
    def n_local(self):
        return int(self.global_ids.size)

    @property
    def owned(self):
        return self.global_ids[: self.n_owner]

    @property
    def copies(self):
        return self.global_ids[self.n_owner:]

    @property
    def markers(self):
        m = np.full(self.n_local, COPY, dtype=np.int64)
        m[: self.n_owner] = OWNER
        return m

    def local_index(self, gids):
        """Map global ids to local indices; raises KeyError on misses."""
        gids = np.asarray(gids, dtype=np.int64)
        out = np.empty(gids.shape, dtype=np.int64)
        pos = np.searchsorted(self.owned, gids)
        pos_c = np.minimum(pos, max(self.n_owner - 1, 0))
        hit = (pos < self.n_owner) & (self.n_owner > 0)
        if self.n_owner:
            hit &= self.owned[pos_c] == gids
        out[hit] = pos_c[hit]
        rest = ~hit
        if np.any(rest):
            cp = self.copies
            pos = np.searchsorted(cp, gids[rest])
            pos_c = np.minimum(pos, max(cp.size - 1, 0))
            ok = (pos < cp.size) & (cp.size > 0)
            if cp.size:
                ok &= cp[pos_c] == gids[rest]
            if not np.all(ok):
                missing = gids[rest][~ok]
                raise KeyError(f"global ids not in local index set: {missing[:5]}")
            out[rest] = self.n_owner + pos_c
        return out


@dataclass
class RankState:
    """Everything one virtual rank stores for a level."""

    rank: int
    idx: ParallelIndexSet
    A_loc: CsrMatrix
    neighbor_ranks: list = field(default_factory=list)
    push_idx: dict = field(default_factory=dict)   # neighbor -> owned local idx to send
    halo_idx: dict = field(default_factory=dict)   # neighbor -> copy local idx to fill

    @property
    def n_owner(self):
        return self.idx.n_owner

    @property
    def n_local(self):
        return self.idx.n_local

    def zeros(self):
        return np.zeros(self.n_local)


class VirtualComm:
    """Mailbox-based message transport with barrier semantics.

    All posts of an exchange are buffered; :meth:`complete` delivers them at
    once and logs message/payload counts, so tests can assert how many
    exchanges an operation used.
    """

    def __init__(self):
        self._outbox = {}
        self.exchange_count = 0
        self.log = []

    def post(self, src, dst, payload):
        key = (src, dst)
        if key in self._outbox:
            raise RuntimeError(f"duplicate message {src}->{dst} within one exchange")
        self._outbox[key] = payload

    def complete(self, label=""):
        delivered = self._outbox
        self._outbox = {}
        entries = 0
        for payload in delivered.values():
            if isinstance(payload, tuple):
                entries += sum(int(np.asarray(a).size) for a in payload)
            else:
                entries += int(np.asarray(payload).size)
        self.exchange_count += 1
        self.log.append({"label": label, "messages": len(delivered), "entries": entries})
        return delivered


def rank_grid_for(p):
    """Deterministic near-cubic 3-d factorization of a rank count."""
    if p < 1:
        raise ValueError("rank count must be positive")
    grid = [1, 1, 1]
    factors = []
    q = p
    d = 2
    while d * d <= q:
        while q % d == 0:
            factors.append(d)
            q //= d
        d += 1
    if q > 1:
        factors.append(q)
    for f in sorted(factors, reverse=True):
        grid[int(np.argmin(grid))] *= f
    return tuple(sorted(grid, reverse=True))


def _axis_splits(cells, parts):
    base, rem = divmod(cells, parts)
    sizes = [base + 1 if r < rem else base for r in range(parts)]
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    return bounds


def partition_fine(cells, rank_grid, level=0):
    """Block partition of a structured 3-d cell grid into one brick per rank.

    Cells are numbered lexicographically (x fastest); ranks likewise.  The
    remainder rule gives earlier ranks the extra cell.
    """
    if isinstance(cells, int):
        cells = (cells, cells, cells)
    nx, ny, nz = cells
    px, py, pz = rank_grid
    n_ranks = px * py * pz
    if n_ranks > nx * ny * nz:
        raise ValueError(f"{n_ranks} ranks exceed {nx * ny * nz} cells")
    if px > nx or py > ny or pz > nz:
        raise ValueError(f"rank grid {rank_grid} does not fit cell grid {cells}")
    bx = _axis_splits(nx, px)
    by = _axis_splits(ny, py)
    bz = _axis_splits(nz, pz)
    rx = np.searchsorted(bx, np.arange(nx), side="right") - 1
    ry = np.searchsorted(by, np.arange(ny), side="right") - 1
    rz = np.searchsorted(bz, np.arange(nz), side="right") - 1
    ix, iy, iz = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
    owners = rx[ix] + px * (ry[iy] + py * rz[iz])
    gids = ix + nx * (iy + ny * iz)
    flat = np.argsort(gids.ravel())
    return Distribution(
        level=level,
        active_ranks=tuple(range(n_ranks)),
        ids=gids.ravel()[flat].astype(np.int64),
        owners=owners.ravel()[flat].astype(np.int64),
    )


def _row_entry_ids(A, rows):
    """Flat entry positions of the given matrix rows, in row order."""
    starts = A.row_offsets[rows]
    counts = A.row_offsets[rows + 1] - starts
    total = int(counts.sum())
    ends = np.cumsum(counts)
    within = np.arange(total, dtype=np.int64) - np.repeat(ends - counts, counts)
    return np.repeat(starts, counts) + within, counts


def build_overlap(A, dist, global_ids=None):
    """Per-rank extended index sets: owned ids plus the matrix-closure halo.

    ``global_ids`` maps matrix rows to global ids (identity by default).
    """
    if global_ids is None:
        if dist.n_active != A.n:
            raise ValueError("distribution does not cover the matrix")
        global_ids = dist.ids
    index_sets = {}
    for rank in dist.active_ranks:
        owned = dist.owned_by(rank)
        rows = np.searchsorted(global_ids, owned)
        e_idx, _ = _row_entry_ids(A, rows)
        cols = A.col_indices[e_idx]
        reached = np.unique(global_ids[cols]) if cols.size else np.empty(0, dtype=np.int64)
        halo = np.setdiff1d(reached, owned, assume_unique=True)
        gids = np.concatenate([owned, halo])
        index_sets[rank] = ParallelIndexSet(gids, n_owner=owned.size)
    return index_sets


def localize_matrix(A, idx, global_ids=None):
    """Local operator of one rank: owned rows of A with columns remapped to
    local indices, identity rows for every copy entry."""
    if global_ids is None:
        global_ids = np.arange(A.n, dtype=np.int64)
    rows = np.searchsorted(global_ids, idx.owned)
    if np.any(global_ids[rows] != idx.owned):
        raise KeyError("owned ids missing from the global matrix")
    e_idx, counts = _row_entry_ids(A, rows)
    rows_l = np.repeat(np.arange(idx.n_owner, dtype=np.int64), counts)
    cols_l = idx.local_index(global_ids[A.col_indices[e_idx]])
    vals_l = A.values[e_idx]
    n_loc = idx.n_local
    n_copy = n_loc - idx.n_owner
    if n_copy:
        cp = np.arange(idx.n_owner, n_loc, dtype=np.int64)
        rows_l = np.concatenate([rows_l, cp])
        cols_l = np.concatenate([cols_l, cp])
        vals_l = np.concatenate([vals_l, np.ones(n_copy)])
    return csr_from_coo(n_loc, rows_l, cols_l, vals_l)


def _comm_patterns(states, dist):
    """Fill neighbor lists and aligned push/halo index lists on each state."""
    by_rank = {st.rank: st for st in states.values()}
    for st in by_rank.values():
        st.neighbor_ranks = []
        st.push_idx = {}
        st.halo_idx = {}
    for st in by_rank.values():
        copies = st.idx.copies
        if copies.size == 0:
            continue
        owners = dist.owner_of(copies)
        for q in np.unique(owners):
            q = int(q)
            shared = copies[owners == q]  # ascending global id
            st.halo_idx[q] = st.idx.local_index(shared)
            other = by_rank[q]
            other.push_idx[st.rank] = other.idx.local_index(shared)
    for st in by_rank.values():
        st.neighbor_ranks = sorted(set(st.push_idx) | set(st.halo_idx))


def build_rank_states(A, dist):
    """Index sets, localized matrices, and comm patterns for every rank."""
    index_sets = build_overlap(A, dist)
    states = {}
    for rank in dist.active_ranks:
        idx = index_sets[rank]
        A_loc = localize_matrix(A, idx, global_ids=dist.ids)
        states[rank] = RankState(rank=rank, idx=idx, A_loc=A_loc)
    _comm_patterns(states, dist)
    return states


def active_states(states):
    return [states[r] for r in sorted(states)]


def make_consistent(comm, states, xs, label="make_consistent"):
    """One exchange: every copy entry receives its owner's current value."""
    ordered = active_states(states)
    for st in ordered:
        for q in st.neighbor_ranks:
            if q in st.push_idx:
                comm.post(st.rank, q, xs[st.rank][st.push_idx[q]])
    delivered = comm.complete(label)
    for st in ordered:
        for q in st.neighbor_ranks:
            if q in st.halo_idx:
                xs[st.rank][st.halo_idx[q]] = delivered[(q, st.rank)]
    return xs


def add_reduce(comm, states, xs, label="add_reduce"):
    """Owners accumulate all copy contributions, then copies are refreshed.

    Two exchanges (one per direction); the result is consistently stored.
    """
    ordered = active_states(states)
    for st in ordered:
        for q in st.neighbor_ranks:
            if q in st.halo_idx:
                comm.post(st.rank, q, xs[st.rank][st.halo_idx[q]])
    delivered = comm.complete(label + ":reduce")
    for st in ordered:
        for q in st.neighbor_ranks:
            if q in st.push_idx:
                xs[st.rank][st.push_idx[q]] += delivered[(q, st.rank)]
    return make_consistent(comm, states, xs, label + ":refresh")


def parallel_spmv(comm, states, xs, out=None, label="spmv"):
    """y = A x for consistently stored x; exactly one exchange."""
    ordered = active_states(states)
    if out is None:
        out = {st.rank: st.zeros() for st in ordered}
    for st in ordered:
        A = st.A_loc
        kernels.csr_matvec(A.row_offsets, A.col_indices, A.values, xs[st.rank], out[st.rank])
    make_consistent(comm, states, out, label)
    return out


def hybrid_smoother_step(comm, states, xs, bs, spec=SmootherSpec(), label="smoother"):
    """Hybrid smoother application: every rank relaxes its owned block with
    halo values frozen, then one exchange publishes the updates.

    Multiple local steps share that single exchange.
    """
    for st in active_states(states):
        smooth(st.A_loc, xs[st.rank], bs[st.rank], spec, n_rows=st.n_owner)
    make_consistent(comm, states, xs, label)
    return xs


def assert_consistent(states, xs, dist):
    """Debug check: every copy entry equals its owner's value exactly."""
    glob = gather_vector(states, dist, xs)
    for st in active_states(states):
        cp = st.idx.copies
        if cp.size == 0:
            continue
        expected = glob[np.searchsorted(dist.ids, cp)]
        got = xs[st.rank][st.n_owner:]
        bad = (got != expected) & ~(np.isnan(got) & np.isnan(expected))
        if np.any(bad):
            g = int(cp[np.argmax(bad)])
            raise ConsistencyError(
                f"rank {st.rank} copy of global {g} disagrees with its owner"
            )


def gather_vector(states, dist, xs):
    """Assemble the global vector (aligned with dist.ids) from owner entries."""
    out = np.zeros(dist.n_active)
    for st in active_states(states):
        pos = np.searchsorted(dist.ids, st.idx.owned)
        out[pos] = xs[st.rank][: st.n_owner]
    return out


def scatter_vector(states, dist, x_global):
    """Distribute a global vector consistently (owners and copies filled)."""
    xs = {}
    for st in active_states(states):
        pos = np.searchsorted(dist.ids, st.idx.global_ids)
        xs[st.rank] = np.ascontiguousarray(x_global[pos], dtype=np.float64)
    return xs
