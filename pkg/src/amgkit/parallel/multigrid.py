"""Parallel hierarchy construction and solve on the virtual-rank simulator:
per-rank decoupled aggregation (one exchange per level), identity-padded
coarse operators, data agglomeration onto fewer ranks, and the distributed
V-cycle / BiCGSTAB drivers.

Coarse global ids are the global ids of the aggregate seed vertices, so an
aggregate is owned by whichever rank owns its seed and no rank renumbering
is ever needed: the id spaces of all levels nest inside the finest one.
"""

import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .. import kernels
from ..aggregation import aggregate
from ..hierarchy import STAGNATION_RATIO, galerkin_map
from ..sparse import DenseLu, csr_from_coo, dense_lu_factor, dense_lu_solve
from ..solvers import SmootherSpec, SolveReport, BREAKDOWN_TOL
from ..strength import classify
from .decomp import (
    Distribution,
    ParallelIndexSet,
    RankState,
    VirtualComm,
    _comm_patterns,
    active_states,
    build_rank_states,
    gather_vector,
    hybrid_smoother_step,
    make_consistent,
    parallel_spmv,
)


# ---------------------------------------------------------------------------
# decoupled aggregation
# ---------------------------------------------------------------------------

def _owner_subgraph(st):
    """Rows and columns of the local operator restricted to owned indices."""
    n_own = st.n_owner
    rows = st.A_loc.row_ids()
    cols = st.A_loc.col_indices
    mask = (rows < n_own) & (cols < n_own)
    return csr_from_coo(n_own, rows[mask], cols[mask], st.A_loc.values[mask]), rows


def parallel_aggregation(comm, states, params, label="aggregation"):
    """Decoupled aggregation: each rank clusters its owner subgraph, then one
    exchange publishes the fine-vertex -> aggregate-label map to neighbours.

    Labels are global ids of seed vertices.  Returns per-rank full-local
    label arrays (-1 for Dirichlet), the per-rank aggregate maps, and
    per-rank stagnation flags.
    """
    ordered = active_states(states)
    labels = {}
    aggs = {}
    stagnated = {}
    for st in ordered:
        n_own = st.n_owner
        sub, rows = _owner_subgraph(st)
        profile = classify(sub, params.delta, params.beta)
        # a vertex that looks uncoupled on the owner subgraph but has halo
        # couplings is not a Dirichlet vertex; keep it as an isolated
        # singleton so the global partition property survives
        full_off = np.bincount(
            rows[(rows < n_own) & (rows != st.A_loc.col_indices) & (st.A_loc.values != 0.0)],
            minlength=n_own,
        )
        vc = profile.vertex_class.copy()
        fix = (vc == kernels.DIRICHLET) & (full_off > 0)
        if np.any(fix):
            vc[fix] = kernels.ISOLATED
            profile = replace(profile, vertex_class=vc)
        agg = aggregate(sub, profile, params)
        aggs[st.rank] = agg
        seed_labels = st.idx.global_ids[agg.seed_of]
        lab = np.full(st.n_local, -2, dtype=np.int64)
        own = agg.agg_of >= 0
        lab[:n_own][own] = seed_labels[agg.agg_of[own]]
        lab[:n_own][~own] = -1
        labels[st.rank] = lab
        stagnated[st.rank] = agg.n_aggregates > STAGNATION_RATIO * n_own
    for st in ordered:
        for q in st.neighbor_ranks:
            if q in st.push_idx:
                comm.post(st.rank, q, labels[st.rank][st.push_idx[q]])
    delivered = comm.complete(label)
    for st in ordered:
        for q in st.neighbor_ranks:
            if q in st.halo_idx:
                labels[st.rank][st.halo_idx[q]] = delivered[(q, st.rank)]
        if np.any(labels[st.rank] == -2):
            raise RuntimeError(f"rank {st.rank}: unmapped halo vertex after exchange")
    return labels, aggs, stagnated


def _identity_pad(Ac, n_owner):
    """Replace every copy row (local index >= n_owner) with an identity row."""
    rows = Ac.row_ids()
    keep = rows < n_owner
    cp = np.arange(n_owner, Ac.n, dtype=np.int64)
    return csr_from_coo(
        Ac.n,
        np.concatenate([rows[keep], cp]),
        np.concatenate([Ac.col_indices[keep], cp]),
        np.concatenate([Ac.values[keep], np.ones(cp.size)]),
    )


def build_coarse_level(states, dist, labels, omega):
    """Next-level distribution, rank states, and fine->coarse local maps."""
    ordered = active_states(states)
    f2c = {}
    new_states = {}
    own_ids = {}
    for st in ordered:
        lab = labels[st.rank]
        own_labels = np.unique(lab[: st.n_owner])
        own_labels = own_labels[own_labels >= 0]
        halo_labels = np.unique(lab[st.n_owner:])
        halo_labels = halo_labels[halo_labels >= 0]
        copy_labels = np.setdiff1d(halo_labels, own_labels, assume_unique=True)
        idx = ParallelIndexSet(
            np.concatenate([own_labels, copy_labels]), n_owner=own_labels.size
        )
        fmap = np.full(st.n_local, -1, dtype=np.int64)
        has = lab >= 0
        fmap[has] = idx.local_index(lab[has])
        Ac = galerkin_map(st.A_loc, fmap, idx.n_local, omega)
        Ac = _identity_pad(Ac, idx.n_owner)
        new_states[st.rank] = RankState(rank=st.rank, idx=idx, A_loc=Ac)
        f2c[st.rank] = fmap
        own_ids[st.rank] = own_labels
    all_ids = np.concatenate([own_ids[r] for r in sorted(own_ids)])
    all_owners = np.concatenate(
        [np.full(own_ids[r].size, r, dtype=np.int64) for r in sorted(own_ids)]
    )
    order = np.argsort(all_ids)
    new_dist = Distribution(
        level=dist.level + 1,
        active_ranks=dist.active_ranks,
        ids=all_ids[order],
        owners=all_owners[order],
    )
    _comm_patterns(new_states, new_dist)
    return new_dist, new_states, f2c


# ---------------------------------------------------------------------------
# agglomeration
# ---------------------------------------------------------------------------

@dataclass
class Redistribution:
    """Regrouping of one level onto fewer ranks (the rest become idle)."""

    groups: list
    designated: list
    dist: Distribution
    states: dict
    placement: dict = field(default_factory=dict)  # (designated, member) -> owner slots
    moved: bool = True


def _partition_ranks(states, parts):
    """Recursive bisection of the rank communication graph, vertex-weighted
    by owner counts.  Deterministic: regions grow greedily from the lowest
    rank id toward the most-connected frontier rank."""
    nodes = sorted(states)
    weights = {r: states[r].n_owner for r in nodes}
    adj = {r: set(states[r].neighbor_ranks) & set(nodes) for r in nodes}

    def bisect(group, k):
        if k <= 1 or len(group) == 1:
            return [sorted(group)]
        kl = k - k // 2
        kr = k // 2
        total = sum(weights[r] for r in group)
        target = total * kl / k
        region = [min(group)]
        rest = set(group) - {region[0]}
        w = weights[region[0]]
        while rest and len(rest) > kr and (w < target or len(region) < kl):
            frontier = [(sum(1 for a in adj[r] if a in region), r) for r in rest]
            links, _ = max(((l, -r) for l, r in frontier))
            if links > 0:
                pick = min(r for l, r in frontier if l == links)
            else:
                pick = min(rest)
            region.append(pick)
            rest.remove(pick)
            w += weights[pick]
        return bisect(region, kl) + bisect(sorted(rest), kr)

    return bisect(nodes, parts)


def agglomerate(comm, states, dist, target_ranks, label="agglomerate"):
    """Gather each rank group's matrix rows onto one designated rank.

    The gathered operator on a designated rank equals the level's global
    operator restricted to the group's union index set; the other members
    turn idle.  ``target_ranks == active`` is the identity.
    """
    active = sorted(states)
    if target_ranks >= len(active):
        return Redistribution(
            groups=[[r] for r in active],
            designated=list(active),
            dist=dist,
            states=states,
            moved=False,
        )
    if target_ranks < 1:
        raise ValueError("target_ranks must be >= 1")
    groups = _partition_ranks(states, target_ranks)
    designated = [min(g) for g in groups]
    payloads = {}
    for g, d in zip(groups, designated):
        for r in g:
            st = states[r]
            n_own = st.n_owner
            rows = st.A_loc.row_ids()
            keep = rows < n_own
            payload = (
                st.idx.owned,
                st.idx.global_ids[rows[keep]],
                st.idx.global_ids[st.A_loc.col_indices[keep]],
                st.A_loc.values[keep],
            )
            if r == d:
                payloads[(r, d)] = payload
            else:
                comm.post(r, d, payload)
    delivered = comm.complete(label)
    payloads.update(delivered)

    new_states = {}
    placement = {}
    for g, d in zip(groups, designated):
        parts = [payloads[(r, d)] for r in g]
        owned = np.sort(np.concatenate([p[0] for p in parts]))
        erows = np.concatenate([p[1] for p in parts])
        ecols = np.concatenate([p[2] for p in parts])
        evals = np.concatenate([p[3] for p in parts])
        halo = np.setdiff1d(np.unique(ecols), owned)
        idx = ParallelIndexSet(np.concatenate([owned, halo]), n_owner=owned.size)
        li = idx.local_index
        n_loc = idx.n_local
        cp = np.arange(owned.size, n_loc, dtype=np.int64)
        A_loc = csr_from_coo(
            n_loc,
            np.concatenate([li(erows), cp]),
            np.concatenate([li(ecols), cp]),
            np.concatenate([evals, np.ones(cp.size)]),
        )
        new_states[d] = RankState(rank=d, idx=idx, A_loc=A_loc)
        for r in g:
            placement[(d, r)] = np.searchsorted(owned, payloads[(r, d)][0])
    rank_to_designated = {}
    for g, d in zip(groups, designated):
        for r in g:
            rank_to_designated[r] = d
    lut = np.array([rank_to_designated.get(r, -1) for r in range(max(active) + 1)])
    new_dist = Distribution(
        level=dist.level,
        active_ranks=tuple(sorted(designated)),
        ids=dist.ids,
        owners=lut[dist.owners],
    )
    _comm_patterns(new_states, new_dist)
    return Redistribution(
        groups=[list(g) for g in groups],
        designated=list(designated),
        dist=new_dist,
        states=new_states,
        placement=placement,
    )


def trigger_agglomeration(states, threshold=64, stagnated=()):
    """True when some active rank owns fewer than ``threshold`` rows (strict)
    or the previous decoupled coarsening stagnated on some rank."""
    min_owned = min(st.n_owner for st in active_states(states))
    if any(bool(v) for v in (stagnated.values() if isinstance(stagnated, dict) else stagnated)):
        return True
    return min_owned < threshold


def redist_gather(comm, redist, vecs, label="redistribute:gather"):
    """Move owner entries of a level vector onto the designated ranks."""
    if not redist.moved:
        return vecs
    for g, d in zip(redist.groups, redist.designated):
        for r in g:
            if r != d:
                src = vecs[r]
                comm.post(r, d, src[: redist.placement[(d, r)].size])
    delivered = comm.complete(label)
    out = {}
    for g, d in zip(redist.groups, redist.designated):
        st = redist.states[d]
        y = np.zeros(st.n_local)
        for r in g:
            payload = vecs[r][: redist.placement[(d, r)].size] if r == d else delivered[(r, d)]
            y[redist.placement[(d, r)]] = payload
        out[d] = y
    return out


def redist_scatter(comm, redist, pre_states, vecs, label="redistribute:scatter"):
    """Inverse of :func:`redist_gather`: returns owner entries to the members
    (copies of the result are left stale and must be refreshed)."""
    if not redist.moved:
        return vecs
    for g, d in zip(redist.groups, redist.designated):
        for r in g:
            if r != d:
                comm.post(d, r, vecs[d][redist.placement[(d, r)]])
    delivered = comm.complete(label)
    out = {}
    for g, d in zip(redist.groups, redist.designated):
        for r in g:
            st = pre_states[r]
            y = np.zeros(st.n_local)
            if r == d:
                y[: st.n_owner] = vecs[d][redist.placement[(d, r)]]
            else:
                y[: st.n_owner] = delivered[(d, r)]
            out[r] = y
    return out


def assemble_global_matrix(states, dist):
    """Debug oracle: the level's global operator (rows/cols positional in
    dist.ids order) assembled from all owner rows."""
    rows = []
    cols = []
    vals = []
    for st in active_states(states):
        n_own = st.n_owner
        r = st.A_loc.row_ids()
        keep = r < n_own
        rows.append(np.searchsorted(dist.ids, st.idx.global_ids[r[keep]]))
        cols.append(np.searchsorted(dist.ids, st.idx.global_ids[st.A_loc.col_indices[keep]]))
        vals.append(st.A_loc.values[keep])
    return csr_from_coo(
        dist.n_active,
        np.concatenate(rows),
        np.concatenate(cols),
        np.concatenate(vals),
    )


# ---------------------------------------------------------------------------
# hierarchy
# ---------------------------------------------------------------------------

@dataclass
class PLevel:
    dist: Distribution
    states: dict
    redist: Redistribution | None = None
    f2c: dict | None = None
    aggregates: dict | None = None

    def coarsen_view(self):
        if self.redist is not None:
            return self.redist.states, self.redist.dist
        return self.states, self.dist


@dataclass
class ParallelHierarchy:
    levels: list
    comm: object
    omega: float
    params: object
    coarse_rank: int
    coarse_lu: DenseLu
    stats: dict = field(default_factory=dict)

    @property
    def n_levels(self):
        return len(self.levels)

    def complexity(self):
        sizes = self.stats["level_sizes"]
        n0, nnz0 = sizes[0]
        return {
            "operator_complexity": sum(z for _, z in sizes) / nnz0,
            "grid_complexity": sum(n for n, _ in sizes) / n0,
            "levels": len(sizes),
        }


def _pow2_floor(k):
    return 1 << max(0, int(math.floor(math.log2(k))))


def _global_sizes(states, dist):
    nnz = sum(
        int(np.count_nonzero(st.A_loc.row_ids() < st.n_owner))
        for st in active_states(states)
    )
    return dist.n_active, nnz


def parallel_build_hierarchy(A, dist, params, omega=1.6, coarse_target=1000,
                             max_levels=25, agglom_threshold=64,
                             agglomerate_at=None, comm=None):
    """Build the distributed hierarchy with decoupled per-rank coarsening.

    Agglomeration onto fewer ranks happens when a rank's owner set shrinks
    below ``agglom_threshold`` (or coarsening stagnated on a rank), when
    ``agglomerate_at`` forces it at a given level index, and always on the
    coarsest level so a single rank can factor the coarse operator densely.
    """
    if comm is None:
        comm = VirtualComm()
    t0 = time.perf_counter()
    states = build_rank_states(A, dist)
    levels = [PLevel(dist=dist, states=states)]
    stagnated = {}
    termination = "coarse_target"
    while True:
        lev = levels[-1]
        cstates, cdist = lev.coarsen_view()
        if cdist.n_active <= coarse_target:
            break
        if len(levels) >= max_levels:
            termination = "max_levels"
            break
        l = len(levels) - 1
        force = agglomerate_at is not None and l == agglomerate_at
        if len(cdist.active_ranks) > 1 and (
            force or trigger_agglomeration(cstates, agglom_threshold, stagnated)
        ):
            n_active = len(cdist.active_ranks)
            target = 1 if (force or n_active <= 8) else _pow2_floor(max(1, n_active // 8))
            lev.redist = agglomerate(comm, cstates, cdist, target, label=f"L{l}:agglomerate")
            cstates, cdist = lev.coarsen_view()
        labels, aggs, stagnated = parallel_aggregation(
            comm, cstates, params, label=f"L{l}:aggregation"
        )
        n_coarse = sum(a.n_aggregates for a in aggs.values())
        if n_coarse == 0 or n_coarse > STAGNATION_RATIO * cdist.n_active:
            if len(cdist.active_ranks) > 1:
                lev.redist = agglomerate(comm, lev.states, lev.dist, 1,
                                         label=f"L{l}:agglomerate")
                cstates, cdist = lev.coarsen_view()
                labels, aggs, stagnated = parallel_aggregation(
                    comm, cstates, params, label=f"L{l}:aggregation"
                )
                n_coarse = sum(a.n_aggregates for a in aggs.values())
            if n_coarse == 0 or n_coarse > STAGNATION_RATIO * cdist.n_active:
                termination = "stagnation"
                break
        lev.aggregates = aggs
        new_dist, new_states, f2c = build_coarse_level(cstates, cdist, labels, omega)
        lev.f2c = f2c
        levels.append(PLevel(dist=new_dist, states=new_states))
    last = levels[-1]
    cstates, cdist = last.coarsen_view()
    if len(cdist.active_ranks) > 1:
        last.redist = agglomerate(comm, cstates, cdist, 1,
                                  label=f"L{len(levels) - 1}:agglomerate")
        cstates, cdist = last.coarsen_view()
    coarse_rank = cdist.active_ranks[0]
    coarse_state = cstates[coarse_rank]
    coarse_lu = dense_lu_factor(coarse_state.A_loc.to_dense())
    level_sizes = []
    for lev in levels:
        level_sizes.append(_global_sizes(lev.states, lev.dist))
    stats = {
        "build_seconds": time.perf_counter() - t0,
        "termination": termination,
        "level_sizes": level_sizes,
        "active_ranks": [len(lev.dist.active_ranks) for lev in levels],
    }
    return ParallelHierarchy(
        levels=levels,
        comm=comm,
        omega=float(omega),
        params=params,
        coarse_rank=coarse_rank,
        coarse_lu=coarse_lu,
        stats=stats,
    )


# ---------------------------------------------------------------------------
# distributed V-cycle and BiCGSTAB
# ---------------------------------------------------------------------------

def _local_residual(states, xs, bs):
    rs = {}
    for st in active_states(states):
        A = st.A_loc
        out = np.empty(st.n_local)
        kernels.csr_residual(A.row_offsets, A.col_indices, A.values, xs[st.rank],
                             bs[st.rank], out)
        rs[st.rank] = out
    return rs


def _restrict_local(states, f2c, rs, coarse_states):
    bc = {}
    for st in active_states(states):
        fmap = f2c[st.rank][: st.n_owner]
        mask = fmap >= 0
        cst = coarse_states[st.rank]
        vals = np.bincount(fmap[mask], weights=rs[st.rank][: st.n_owner][mask],
                           minlength=cst.n_local)
        bc[st.rank] = vals.astype(np.float64)
    return bc


def _prolongate_local(states, f2c, xc):
    out = {}
    for st in active_states(states):
        fmap = f2c[st.rank]
        corr = np.zeros(st.n_local)
        mask = fmap >= 0
        corr[mask] = xc[st.rank][fmap[mask]]
        out[st.rank] = corr
    return out


def parallel_vcycle(ph, bs, spec=SmootherSpec()):
    """One distributed V-cycle applied to the finest-level rhs dict."""
    return _pvcycle(ph, 0, bs, spec)


def _pvcycle(ph, l, bs, spec):
    lev = ph.levels[l]
    comm = ph.comm
    if l == ph.n_levels - 1:
        return _coarse_solve(ph, lev, bs)
    states = lev.states
    xs = {st.rank: st.zeros() for st in active_states(states)}
    hybrid_smoother_step(comm, states, xs, bs, spec, label=f"L{l}:smoother")
    rs = _local_residual(states, xs, bs)
    if lev.redist is not None and lev.redist.moved:
        rs = redist_gather(comm, lev.redist, rs, label=f"L{l}:redistribute:gather")
    cstates, _ = lev.coarsen_view()
    bc = _restrict_local(cstates, lev.f2c, rs, ph.levels[l + 1].states)
    xc = _pvcycle(ph, l + 1, bc, spec)
    corr = _prolongate_local(cstates, lev.f2c, xc)
    if lev.redist is not None and lev.redist.moved:
        corr = redist_scatter(comm, lev.redist, states, corr,
                              label=f"L{l}:redistribute:scatter")
        make_consistent(comm, states, corr, label=f"L{l}:redistribute:consistent")
    for st in active_states(states):
        xs[st.rank] += corr[st.rank]
    hybrid_smoother_step(comm, states, xs, bs, spec, label=f"L{l}:smoother")
    return xs


def _coarse_solve(ph, lev, bs):
    comm = ph.comm
    if lev.redist is not None and lev.redist.moved:
        bs_c = redist_gather(comm, lev.redist, bs, label="coarse:gather")
        rank = ph.coarse_rank
        y = dense_lu_solve(ph.coarse_lu, bs_c[rank][: lev.redist.states[rank].n_owner])
        full = np.zeros(lev.redist.states[rank].n_local)
        full[: y.size] = y
        xs = redist_scatter(comm, lev.redist, lev.states, {rank: full},
                            label="coarse:scatter")
        make_consistent(comm, lev.states, xs, label="coarse:consistent")
        return xs
    rank = ph.coarse_rank
    y = dense_lu_solve(ph.coarse_lu, bs[rank][: lev.states[rank].n_owner])
    full = np.zeros(lev.states[rank].n_local)
    full[: y.size] = y
    xs = {rank: full}
    make_consistent(comm, lev.states, xs, label="coarse:consistent")
    return xs


def _pdot(states, xs, ys):
    """Global dot product: owner-entry partial dots summed in rank order."""
    total = 0.0
    for st in active_states(states):
        total += float(np.dot(xs[st.rank][: st.n_owner], ys[st.rank][: st.n_owner]))
    return total


def parallel_bicgstab(ph, bs, tol=1.0e-8, max_iter=500, spec=SmootherSpec()):
    """Right-preconditioned BiCGSTAB with the parallel V-cycle, mirroring the
    sequential driver step for step (P=1 reproduces it exactly)."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    lev0 = ph.levels[0]
    states = lev0.states
    ranks = [st.rank for st in active_states(states)]
    xs = {r: states[r].zeros() for r in ranks}
    rs = {r: bs[r].copy() for r in ranks}
    nrm0 = math.sqrt(_pdot(states, rs, rs))
    history = [nrm0]
    if nrm0 == 0.0:
        return xs, SolveReport(0, True, history, 0.0)
    r0 = {r: rs[r].copy() for r in ranks}
    rho_prev = 1.0
    alpha = 1.0
    omega = 1.0
    v = {r: states[r].zeros() for r in ranks}
    p = {r: states[r].zeros() for r in ranks}
    converged = False
    breakdown = False
    k = 0
    for k in range(1, max_iter + 1):
        rho = _pdot(states, r0, rs)
        if abs(rho) < BREAKDOWN_TOL:
            breakdown = True
            break
        beta = (rho / rho_prev) * (alpha / omega)
        p = {r: rs[r] + beta * (p[r] - omega * v[r]) for r in ranks}
        p_hat = parallel_vcycle(ph, p, spec)
        v = parallel_spmv_level(ph, p_hat)
        denom = _pdot(states, r0, v)
        if denom == 0.0:
            breakdown = True
            break
        alpha = rho / denom
        s = {r: rs[r] - alpha * v[r] for r in ranks}
        ns = math.sqrt(_pdot(states, s, s))
        if not math.isfinite(ns):
            raise FloatingPointError(f"non-finite residual at iteration {k}")
        if ns / nrm0 <= tol:
            for r in ranks:
                xs[r] += alpha * p_hat[r]
            history.append(ns)
            converged = True
            break
        s_hat = parallel_vcycle(ph, s, spec)
        t = parallel_spmv_level(ph, s_hat)
        tt = _pdot(states, t, t)
        if tt == 0.0:
            breakdown = True
            break
        omega = _pdot(states, t, s) / tt
        for r in ranks:
            xs[r] += alpha * p_hat[r] + omega * s_hat[r]
            rs[r] = s[r] - omega * t[r]
        nr = math.sqrt(_pdot(states, rs, rs))
        if not math.isfinite(nr):
            raise FloatingPointError(f"non-finite residual at iteration {k}")
        history.append(nr)
        if nr / nrm0 <= tol:
            converged = True
            break
        if abs(omega) < BREAKDOWN_TOL:
            breakdown = True
            break
        rho_prev = rho
    report = SolveReport(
        iterations=k,
        converged=converged,
        residual_history=history,
        reduction=history[-1] / history[0],
        breakdown=breakdown,
    )
    return xs, report


def parallel_spmv_level(ph, xs, level=0):
    lev = ph.levels[level]
    return parallel_spmv(ph.comm, lev.states, xs, label=f"L{level}:spmv")


def gather_solution(ph, xs):
    lev0 = ph.levels[0]
    return gather_vector(lev0.states, lev0.dist, xs)


def comm_stats_json(ph):
    """Per-level exchange statistics grouped by operation label."""
    grouped = {}
    for rec in ph.comm.log:
        grouped.setdefault(rec["label"], {"exchanges": 0, "messages": 0, "entries": 0})
        g = grouped[rec["label"]]
        g["exchanges"] += 1
        g["messages"] += rec["messages"]
        g["entries"] += rec["entries"]
    return json.dumps(
        {"total_exchanges": ph.comm.exchange_count, "by_label": grouped}, indent=2
    )
