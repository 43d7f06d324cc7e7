"""Hot numeric kernels: CSR matrix-vector products, Gauss-Seidel/Jacobi
sweeps, and the greedy aggregation inner loop.

Every kernel is written as a plain Python function over flat numpy arrays
and compiled with numba's ``@njit`` when available.  Setting the
environment variable ``AMGKIT_NO_NUMBA=1`` before import selects the
interpreted fallback path (slow, but byte-for-byte the same arithmetic).
When numba is active the interpreted version of a kernel remains reachable
through ``kernel.py_func`` (see :func:`python_version`), which is what
``amgkit bench`` uses to compare the two paths.

fastmath stays off: row sums must accumulate left-to-right so results are
reproducible bit-for-bit across runs.
"""

import os

import numpy as np

_DISABLE = os.environ.get("AMGKIT_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

USING_NUMBA = False
if not _DISABLE:
    try:
        import numba
    except ImportError:
        numba = None
    if numba is not None:
        USING_NUMBA = True

if USING_NUMBA:
    def _jit(fn):
        return numba.njit(cache=True)(fn)
else:
    def _jit(fn):
        return fn


def python_version(kernel):
    """Return the interpreted implementation of a (possibly jitted) kernel."""
    return getattr(kernel, "py_func", kernel)


# vertex classes, shared with amgkit.strength
REGULAR = 0
ISOLATED = 1
DIRICHLET = 2

UNAGGREGATED = -1


@_jit
def csr_matvec(indptr, indices, values, x, out):
    n = indptr.shape[0] - 1
    for i in range(n):
        s = 0.0
        for e in range(indptr[i], indptr[i + 1]):
            s += values[e] * x[indices[e]]
        out[i] = s


@_jit
def csr_residual(indptr, indices, values, x, b, out):
    n = indptr.shape[0] - 1
    for i in range(n):
        s = 0.0
        for e in range(indptr[i], indptr[i + 1]):
            s += values[e] * x[indices[e]]
        out[i] = b[i] - s


@_jit
def gs_sweep_forward(indptr, indices, values, x, b, n_rows):
    """One forward Gauss-Seidel sweep over rows [0, n_rows), in place.

    Columns >= n_rows are read but never written, which is exactly the
    frozen-halo behaviour the per-rank hybrid smoother needs.
    """
    for i in range(n_rows):
        s = 0.0
        d = 0.0
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            if j == i:
                d = values[e]
            else:
                s += values[e] * x[j]
        x[i] = (b[i] - s) / d


@_jit
def gs_sweep_backward(indptr, indices, values, x, b, n_rows):
    for i in range(n_rows - 1, -1, -1):
        s = 0.0
        d = 0.0
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            if j == i:
                d = values[e]
            else:
                s += values[e] * x[j]
        x[i] = (b[i] - s) / d


@_jit
def jacobi_sweep(indptr, indices, values, diag, x_old, b, x_new, n_rows):
    for i in range(n_rows):
        s = 0.0
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            if j != i:
                s += values[e] * x_old[j]
        x_new[i] = (b[i] - s) / diag[i]


# ---------------------------------------------------------------------------
# greedy aggregation
# ---------------------------------------------------------------------------
#
# The aggregate under construction is tracked with stamp arrays instead of
# sets so the whole build runs over preallocated int64 buffers:
#   in_cur[v]  == stamp  -> v is a member of the current aggregate
#   adj_vtx[v] == stamp  -> v is adjacent to the current aggregate
#   adj_agg[a] == stamp  -> finished aggregate a is adjacent to the current one
# Ties are always broken toward the smallest vertex/aggregate id, making the
# result deterministic.


@_jit
def _within_ecc(indptr, indices, in_cur, stamp, v, size, d_max, mark, dist, queue, ctr):
    """True if every member of the current aggregate lies within graph
    distance d_max of v inside the induced subgraph on members + {v}."""
    target = size + 1
    head = 0
    tail = 0
    mark[v] = ctr
    dist[v] = 0
    queue[tail] = v
    tail += 1
    seen = 1
    if seen == target:
        return True
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        if du >= d_max:
            continue
        for e in range(indptr[u], indptr[u + 1]):
            w = indices[e]
            if w == u:
                continue
            if w != v and in_cur[w] != stamp:
                continue
            if mark[w] == ctr:
                continue
            mark[w] = ctr
            dist[w] = du + 1
            queue[tail] = w
            tail += 1
            seen += 1
            if seen == target:
                return True
    return False


@_jit
def _within_ecc_agg(indptr, indices, agg_of, aid, v, asize, d_max, mark, dist, queue, ctr):
    """Same as _within_ecc but membership is agg_of[w] == aid (used when
    checking whether a leftover singleton may join a finished aggregate)."""
    target = asize + 1
    head = 0
    tail = 0
    mark[v] = ctr
    dist[v] = 0
    queue[tail] = v
    tail += 1
    seen = 1
    if seen == target:
        return True
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        if du >= d_max:
            continue
        for e in range(indptr[u], indptr[u + 1]):
            w = indices[e]
            if w == u:
                continue
            if w != v and agg_of[w] != aid:
                continue
            if mark[w] == ctr:
                continue
            mark[w] = ctr
            dist[w] = du + 1
            queue[tail] = w
            tail += 1
            seen += 1
            if seen == target:
                return True
    return False


@_jit
def _count_flagged(indptr, indices, flags, in_cur, stamp, v):
    """Number of current-aggregate members connected to v by a flagged edge."""
    c = 0
    for e in range(indptr[v], indptr[v + 1]):
        w = indices[e]
        if w != v and in_cur[w] == stamp and flags[e]:
            c += 1
    return c


@_jit
def _connect(indptr, indices, agg_of, in_cur, stamp, adj_agg, v):
    """Weighted neighbour count of v: members of the current aggregate count
    zero, members of aggregates already adjacent to it count twice, everything
    else (unaggregated, or in a non-adjacent aggregate) counts once."""
    s = 0
    for e in range(indptr[v], indptr[v + 1]):
        w = indices[e]
        if w == v or in_cur[w] == stamp:
            continue
        a = agg_of[w]
        if a >= 0 and adj_agg[a] == stamp:
            s += 2
        else:
            s += 1
    return s


@_jit
def _frontier_gain(indptr, indices, agg_of, vclass, in_cur, adj_vtx, stamp, v):
    """Unaggregated regular neighbours of v that are not yet adjacent to the
    current aggregate (how much fresh frontier picking v would open up)."""
    c = 0
    for e in range(indptr[v], indptr[v + 1]):
        w = indices[e]
        if w == v or in_cur[w] == stamp:
            continue
        if agg_of[w] != UNAGGREGATED or vclass[w] != REGULAR:
            continue
        if adj_vtx[w] == stamp:
            continue
        c += 1
    return c


@_jit
def _mark_adjacent(indptr, indices, agg_of, adj_vtx, adj_agg, stamp, v):
    for e in range(indptr[v], indptr[v + 1]):
        w = indices[e]
        if w == v:
            continue
        adj_vtx[w] = stamp
        a = agg_of[w]
        if a >= 0:
            adj_agg[a] = stamp


@_jit
def _pop_min_nna(nna, agg_of, vclass, cursor):
    """Smallest-id unaggregated regular vertex with the fewest unaggregated
    non-Dirichlet neighbours, or -1 if none remain.

    ``nna`` holds the incrementally maintained neighbour counts; ``cursor``
    is a per-count forward scan position (rewound whenever a count drops),
    which makes the amortized cost near-linear over the whole build.
    """
    n = agg_of.shape[0]
    for c in range(cursor.shape[0]):
        i = cursor[c]
        while i < n:
            if vclass[i] == REGULAR and agg_of[i] == UNAGGREGATED and nna[i] == c:
                cursor[c] = i
                return i
            i += 1
        cursor[c] = n
    return -1


@_jit
def _note_aggregated(indptr, indices, nna, cursor, w):
    """Vertex w just left the unaggregated pool: decrement its neighbours'
    counts and rewind the matching bucket cursors."""
    for e in range(indptr[w], indptr[w + 1]):
        u = indices[e]
        if u == w:
            continue
        nna[u] -= 1
        c = nna[u]
        if c >= 0 and cursor[c] > u:
            cursor[c] = u


@_jit
def build_aggregates(indptr, indices, strong, two_way, one_way, vclass, deg,
                     s_min, s_max, d_max):
    """Greedy aggregation of the matrix graph.

    Non-isolated, non-Dirichlet vertices are clustered first (grow to
    s_min within diameter d_max along strong edges, then round up to
    s_max); leftover singletons are merged into a strongly connected
    neighbouring aggregate when that neither overfills it nor breaks the
    diameter bound.  Isolated vertices are clustered afterwards among
    themselves.  Returns (agg_of, seeds, sizes) where agg_of[v] is the
    aggregate id or -1 for Dirichlet vertices.
    """
    n = indptr.shape[0] - 1
    agg_of = np.full(n, UNAGGREGATED, np.int64)
    seed_of = np.full(n, -1, np.int64)
    agg_size = np.zeros(n, np.int64)
    n_agg = 0

    in_cur = np.full(n, -1, np.int64)
    adj_vtx = np.full(n, -1, np.int64)
    adj_agg = np.full(n, -1, np.int64)
    cand_mark = np.full(n, -1, np.int64)
    bfs_mark = np.full(n, -1, np.int64)
    bfs_dist = np.zeros(n, np.int64)
    bfs_queue = np.empty(s_max + 2, np.int64)

    maxdeg = 0
    for i in range(n):
        d = indptr[i + 1] - indptr[i]
        if d > maxdeg:
            maxdeg = d
    cap = (s_max + 2) * maxdeg + 1
    if cap > n + 1:
        cap = n + 1
    cand = np.empty(cap, np.int64)
    keep = np.empty(cap, np.int64)
    c2buf = np.empty(cap, np.int64)
    c1buf = np.empty(cap, np.int64)
    pool = np.empty(cap, np.int64)
    pool2 = np.empty(cap, np.int64)
    cur = np.empty(s_max + 2, np.int64)

    remaining = 0
    for u in range(n):
        if vclass[u] == REGULAR:
            remaining += 1

    # unaggregated non-Dirichlet neighbour counts, kept current as vertices
    # leave the pool, with a bucket cursor per count value for seed fallback
    nna = np.zeros(n, np.int64)
    for u in range(n):
        c = 0
        for e in range(indptr[u], indptr[u + 1]):
            w = indices[e]
            if w != u and vclass[w] != DIRICHLET:
                c += 1
        nna[u] = c
    cursor = np.zeros(maxdeg + 2, np.int64)

    stamp = 0
    cctr = 0
    bctr = 0
    v = _pop_min_nna(nna, agg_of, vclass, cursor)

    while remaining > 0:
        stamp += 1
        size = 0
        cur[size] = v
        size += 1
        in_cur[v] = stamp
        remaining -= 1
        _note_aggregated(indptr, indices, nna, cursor, v)
        _mark_adjacent(indptr, indices, agg_of, adj_vtx, adj_agg, stamp, v)

        # grow: add strongly connected vertices until past s_min
        while size <= s_min and size < s_max:
            cctr += 1
            ncand = 0
            for t in range(size):
                u = cur[t]
                for e in range(indptr[u], indptr[u + 1]):
                    w = indices[e]
                    if w == u or in_cur[w] == stamp:
                        continue
                    if agg_of[w] != UNAGGREGATED or vclass[w] != REGULAR:
                        continue
                    if cand_mark[w] == cctr:
                        continue
                    cand_mark[w] = cctr
                    cand[ncand] = w
                    ncand += 1
            if ncand == 0:
                break
            nok = 0
            for ci in range(ncand):
                w = cand[ci]
                if size > d_max:
                    bctr += 1
                    if not _within_ecc(indptr, indices, in_cur, stamp, w, size,
                                       d_max, bfs_mark, bfs_dist, bfs_queue, bctr):
                        continue
                keep[nok] = w
                c2buf[nok] = _count_flagged(indptr, indices, two_way, in_cur, stamp, w)
                nok += 1
            if nok == 0:
                break
            max2 = 0
            for t in range(nok):
                if c2buf[t] > max2:
                    max2 = c2buf[t]
            npool = 0
            if max2 > 0:
                for t in range(nok):
                    if c2buf[t] == max2:
                        pool[npool] = keep[t]
                        npool += 1
            else:
                max1 = 0
                for t in range(nok):
                    c1buf[t] = _count_flagged(indptr, indices, one_way, in_cur, stamp, keep[t])
                    if c1buf[t] > max1:
                        max1 = c1buf[t]
                if max1 == 0:
                    break
                for t in range(nok):
                    if c1buf[t] == max1:
                        pool[npool] = keep[t]
                        npool += 1
            if npool > 1:
                # highest connect(v)/|N(v)| ratio, compared exactly in integers
                bn = np.int64(-1)
                bd = np.int64(1)
                m = 0
                for t in range(npool):
                    w = pool[t]
                    cn = _connect(indptr, indices, agg_of, in_cur, stamp, adj_agg, w)
                    cmp = cn * bd - bn * deg[w]
                    if cmp > 0:
                        m = 0
                        pool2[m] = w
                        m += 1
                        bn = cn
                        bd = deg[w]
                    elif cmp == 0:
                        pool2[m] = w
                        m += 1
                for t in range(m):
                    pool[t] = pool2[t]
                npool = m
            if npool > 1:
                bg = np.int64(-1)
                m = 0
                for t in range(npool):
                    w = pool[t]
                    g = _frontier_gain(indptr, indices, agg_of, vclass, in_cur,
                                       adj_vtx, stamp, w)
                    if g > bg:
                        bg = g
                        m = 0
                        pool2[m] = w
                        m += 1
                    elif g == bg:
                        pool2[m] = w
                        m += 1
                for t in range(m):
                    pool[t] = pool2[t]
                npool = m
            c = pool[0]
            for t in range(1, npool):
                if pool[t] < c:
                    c = pool[t]
            cur[size] = c
            size += 1
            in_cur[c] = stamp
            remaining -= 1
            _note_aggregated(indptr, indices, nna, cursor, c)
            _mark_adjacent(indptr, indices, agg_of, adj_vtx, adj_agg, stamp, c)

        # round: absorb neighbours leaning into the aggregate, up to s_max
        while size < s_max:
            cctr += 1
            best = -1
            for t in range(size):
                u = cur[t]
                for e in range(indptr[u], indptr[u + 1]):
                    w = indices[e]
                    if w == u or in_cur[w] == stamp:
                        continue
                    if agg_of[w] != UNAGGREGATED or vclass[w] != REGULAR:
                        continue
                    if cand_mark[w] == cctr:
                        continue
                    cand_mark[w] = cctr
                    if best >= 0 and w >= best:
                        continue
                    strong_ok = False
                    inside = 0
                    outside = 0
                    for e2 in range(indptr[w], indptr[w + 1]):
                        u2 = indices[e2]
                        if u2 == w:
                            continue
                        if in_cur[u2] == stamp:
                            inside += 1
                            if strong[e2]:
                                strong_ok = True
                        elif agg_of[u2] == UNAGGREGATED and vclass[u2] == REGULAR:
                            outside += 1
                    if not strong_ok or inside <= outside:
                        continue
                    if size > d_max:
                        bctr += 1
                        if not _within_ecc(indptr, indices, in_cur, stamp, w, size,
                                           d_max, bfs_mark, bfs_dist, bfs_queue, bctr):
                            continue
                    best = w
            if best < 0:
                break
            cur[size] = best
            size += 1
            in_cur[best] = stamp
            remaining -= 1
            _note_aggregated(indptr, indices, nna, cursor, best)
            _mark_adjacent(indptr, indices, agg_of, adj_vtx, adj_agg, stamp, best)

        if size == 1:
            # leftover singleton: join the smallest strongly connected
            # neighbour aggregate that keeps both the size and the diameter
            # bound; if none qualifies the singleton stands on its own
            target = -1
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if w == v or not strong[e]:
                    continue
                a = agg_of[w]
                if a < 0 or agg_size[a] >= s_max:
                    continue
                if target >= 0 and a >= target:
                    continue
                bctr += 1
                if _within_ecc_agg(indptr, indices, agg_of, a, v, agg_size[a],
                                   d_max, bfs_mark, bfs_dist, bfs_queue, bctr):
                    target = a
            if target >= 0:
                agg_of[v] = target
                agg_size[target] += 1
            else:
                agg_of[v] = n_agg
                seed_of[n_agg] = v
                agg_size[n_agg] = 1
                n_agg += 1
        else:
            for t in range(size):
                agg_of[cur[t]] = n_agg
            seed_of[n_agg] = v
            agg_size[n_agg] = size
            n_agg += 1

        if remaining > 0:
            nxt = -1
            for t in range(size):
                u = cur[t]
                for e in range(indptr[u], indptr[u + 1]):
                    w = indices[e]
                    if w == u:
                        continue
                    if agg_of[w] == UNAGGREGATED and vclass[w] == REGULAR:
                        if nxt < 0 or w < nxt:
                            nxt = w
            if nxt < 0:
                nxt = _pop_min_nna(nna, agg_of, vclass, cursor)
            v = nxt

    # isolated vertices: cluster adjacent isolated vertices, preferring ones
    # that share a neighbouring regular aggregate with the current cluster
    n_reg = n_agg
    rem_iso = 0
    for u in range(n):
        if vclass[u] == ISOLATED and agg_of[u] == UNAGGREGATED:
            rem_iso += 1
    cursor = 0
    while rem_iso > 0:
        while cursor < n and not (vclass[cursor] == ISOLATED and agg_of[cursor] == UNAGGREGATED):
            cursor += 1
        v = cursor
        stamp += 1
        size = 0
        cur[size] = v
        size += 1
        in_cur[v] = stamp
        rem_iso -= 1
        _mark_adjacent(indptr, indices, agg_of, adj_vtx, adj_agg, stamp, v)
        while size < s_min:
            cctr += 1
            best = -1
            best_pref = -1
            for t in range(size):
                u = cur[t]
                for e in range(indptr[u], indptr[u + 1]):
                    w = indices[e]
                    if w == u or in_cur[w] == stamp:
                        continue
                    if agg_of[w] != UNAGGREGATED or vclass[w] != ISOLATED:
                        continue
                    if cand_mark[w] == cctr:
                        continue
                    cand_mark[w] = cctr
                    pref = False
                    for e2 in range(indptr[w], indptr[w + 1]):
                        a2 = agg_of[indices[e2]]
                        if 0 <= a2 < n_reg and adj_agg[a2] == stamp:
                            pref = True
                            break
                    if pref and (best_pref < 0 or w < best_pref):
                        best_pref = w
                    if best < 0 or w < best:
                        best = w
            chosen = best_pref if best_pref >= 0 else best
            if chosen < 0:
                break
            cur[size] = chosen
            size += 1
            in_cur[chosen] = stamp
            rem_iso -= 1
            _mark_adjacent(indptr, indices, agg_of, adj_vtx, adj_agg, stamp, chosen)
        for t in range(size):
            agg_of[cur[t]] = n_agg
        seed_of[n_agg] = v
        agg_size[n_agg] = size
        n_agg += 1

    return agg_of, seed_of[:n_agg].copy(), agg_size[:n_agg].copy()
