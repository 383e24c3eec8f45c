"""Inner loops for the best-subset search.

Everything here is written against the numpy subset numba compiles, so
the same source runs as the pure-numpy fallback when numba is disabled.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import jit


@jit
def delete_column(R, z, s, k, R_out, z_out):
    """Drop column ``k`` from an ``s x s`` triangular factor.

    Writes the re-triangularized ``(s-1) x (s-1)`` factor and rotated
    right-hand side into ``R_out`` / ``z_out`` and returns the increase in
    residual sum of squares caused by the deletion.
    """
    for i in range(s):
        for j in range(k):
            R_out[i, j] = R[i, j]
        for j in range(k, s - 1):
            R_out[i, j] = R[i, j + 1]
        z_out[i] = z[i]
    for j in range(k, s - 1):
        a = R_out[j, j]
        b = R_out[j + 1, j]
        if b == 0.0:
            continue
        h = math.hypot(a, b)
        c = a / h
        sn = b / h
        for col in range(j, s - 1):
            t1 = R_out[j, col]
            t2 = R_out[j + 1, col]
            R_out[j, col] = c * t1 + sn * t2
            R_out[j + 1, col] = c * t2 - sn * t1
        R_out[j + 1, j] = 0.0
        t1 = z_out[j]
        t2 = z_out[j + 1]
        z_out[j] = c * t1 + sn * t2
        z_out[j + 1] = c * t2 - sn * t1
    return z_out[s - 1] * z_out[s - 1]


@jit
def drop_costs(R, z, s, work):
    """RSS increase from deleting each column of an ``s x s`` factor.

    Uses ``b_j^2 / [(R'R)^{-1}]_{jj}`` with ``b = R^{-1} z``; ``work`` is
    scratch space of at least ``s x s``.
    """
    for i in range(s):
        for j in range(s):
            work[i, j] = 0.0
    for col in range(s):
        work[col, col] = 1.0 / R[col, col]
        for i in range(col - 1, -1, -1):
            acc = 0.0
            for m in range(i + 1, col + 1):
                acc += R[i, m] * work[m, col]
            work[i, col] = -acc / R[i, i]
    out = np.empty(s)
    for i in range(s):
        b = 0.0
        nrm = 0.0
        for m in range(i, s):
            b += work[i, m] * z[m]
            nrm += work[i, m] * work[i, m]
        out[i] = b * b / nrm
    return out


@jit
def _order_free(R, z, s, cols, free_ids, nfree, work, order_out):
    """Sort the free column ids by decreasing deletion cost."""
    costs = drop_costs(R, z, s, work)
    keyed = np.empty(nfree)
    for a in range(nfree):
        f = free_ids[a]
        for pos in range(s):
            if cols[pos] == f:
                keyed[a] = costs[pos]
                break
    idx = np.argsort(-keyed, kind="mergesort")
    for a in range(nfree):
        order_out[a] = free_ids[idx[a]]


@jit
def branch_and_bound(R0, z0, rss_full, rss_empty, prune_rtol):
    """Best residual sum of squares for every subset size.

    ``R0``/``z0`` are the triangular factor and rotated response of the
    full ``p``-column model, with columns in their natural order.  A node
    is a model together with the set of its columns that may still be
    dropped; its own RSS bounds every descendant from below.  A node is
    expanded only if that bound can still beat the incumbent at some
    reachable size (within ``prune_rtol``).

    Returns ``(best_rss, best_mask, nodes)`` indexed by size ``0..p``;
    masks encode column ``j`` as bit ``j``.
    """
    p = R0.shape[0]
    best_rss = np.full(p + 1, np.inf)
    best_mask = np.zeros(p + 1, dtype=np.int64)
    best_rss[0] = rss_empty
    best_rss[p] = rss_full
    full_mask = np.int64(0)
    for j in range(p):
        full_mask |= np.int64(1) << np.int64(j)
    best_mask[p] = full_mask
    if p == 0:
        return best_rss, best_mask, 1

    Rs = np.zeros((p + 1, p, p))
    zs = np.zeros((p + 1, p))
    cols = np.zeros((p + 1, p), dtype=np.int64)
    order = np.zeros((p + 1, p), dtype=np.int64)
    nfree = np.zeros(p + 1, dtype=np.int64)
    cursor = np.zeros(p + 1, dtype=np.int64)
    sizes = np.zeros(p + 1, dtype=np.int64)
    rss = np.zeros(p + 1)
    masks = np.zeros(p + 1, dtype=np.int64)
    work = np.zeros((p, p))
    free_ids = np.zeros(p, dtype=np.int64)

    Rs[0, :, :] = R0
    zs[0, :] = z0
    for j in range(p):
        cols[0, j] = j
        free_ids[j] = j
    sizes[0] = p
    rss[0] = rss_full
    masks[0] = full_mask
    nfree[0] = p
    _order_free(Rs[0], zs[0], p, cols[0], free_ids, p, work, order[0])
    cursor[0] = p  # children are visited from the cheapest deletion upwards

    nodes = 1
    level = 0
    while level >= 0:
        if cursor[level] == 0:
            level -= 1
            continue
        cursor[level] -= 1
        i = cursor[level]
        f = order[level, i]
        s = sizes[level]
        k = 0
        for pos in range(s):
            if cols[level, pos] == f:
                k = pos
                break
        child = level + 1
        extra = delete_column(Rs[level], zs[level], s, k, Rs[child], zs[child])
        sc = s - 1
        for pos in range(k):
            cols[child, pos] = cols[level, pos]
        for pos in range(k, sc):
            cols[child, pos] = cols[level, pos + 1]
        rc = rss[level] + extra
        mc = masks[level] ^ (np.int64(1) << f)
        nodes += 1
        if rc < best_rss[sc]:
            best_rss[sc] = rc
            best_mask[sc] = mc

        m = nfree[level] - i - 1
        if m == 0 or sc == 0:
            continue
        expand = False
        for t in range(sc - m, sc):
            if t >= 1 and rc <= best_rss[t] * (1.0 + prune_rtol):
                expand = True
                break
        if not expand:
            continue
        for a in range(m):
            free_ids[a] = order[level, i + 1 + a]
        sizes[child] = sc
        rss[child] = rc
        masks[child] = mc
        nfree[child] = m
        _order_free(Rs[child], zs[child], sc, cols[child], free_ids, m, work, order[child])
        cursor[child] = m
        level = child

    return best_rss, best_mask, nodes
