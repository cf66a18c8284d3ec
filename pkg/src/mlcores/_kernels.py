"""Compiled peeling kernels.

The bucket queue is a set of intrusive doubly linked lists: ``head``/``tail``
per bucket and ``nxt``/``prv`` per node. Append is at the tail and pop at the
head, so buckets are FIFO and every move is O(1).

All kernels release the GIL so independent lambda runs can share a thread pool.
"""

import numpy as np
from numba import njit

_OPTS = dict(cache=True, nogil=True)


@njit(**_OPTS)
def _bq_push(head, tail, nxt, prv, b, v):
    nxt[v] = -1
    prv[v] = tail[b]
    if tail[b] == -1:
        head[b] = v
    else:
        nxt[tail[b]] = v
    tail[b] = v


@njit(**_OPTS)
def _bq_unlink(head, tail, nxt, prv, b, v):
    if prv[v] == -1:
        head[b] = nxt[v]
    else:
        nxt[prv[v]] = nxt[v]
    if nxt[v] == -1:
        tail[b] = prv[v]
    else:
        prv[nxt[v]] = prv[v]
    nxt[v] = -1
    prv[v] = -1


@njit(**_OPTS)
def top_select(row, lam, heap):
    """lam-th largest entry of ``row`` via a size-lam min-heap held in ``heap``."""
    size = 0
    for x in row:
        if size < lam:
            # sift up
            i = size
            heap[i] = x
            size += 1
            while i > 0:
                p = (i - 1) >> 1
                if heap[p] <= heap[i]:
                    break
                heap[p], heap[i] = heap[i], heap[p]
                i = p
        elif x > heap[0]:
            heap[0] = x
            i = 0
            while True:
                c = 2 * i + 1
                if c >= size:
                    break
                if c + 1 < size and heap[c + 1] < heap[c]:
                    c += 1
                if heap[i] <= heap[c]:
                    break
                heap[i], heap[c] = heap[c], heap[i]
                i = c
    return heap[0]


@njit(**_OPTS)
def _updated_top(row, current, lam, use_scan, heap):
    # valid only when Top-lam(row) is either current or current - 1
    if use_scan:
        cnt = 0
        for x in row:
            if x >= current:
                cnt += 1
        return current if cnt >= lam else current - 1
    return top_select(row, lam, heap)


@njit(**_OPTS)
def firmcore_peel(indptr, nbr, lay, degrees, init_top, lam, use_scan, short_circuit):
    """core_lam for every node of an undirected multilayer graph.

    ``degrees`` is the full-graph degree matrix and ``init_top`` the Top-lam
    entry of every row. With ``short_circuit`` a neighbour is re-evaluated only
    when the decremented layer degree falls to ``I[u] - 1``; otherwise every
    touched neighbour is re-evaluated from scratch.
    """
    n, L = degrees.shape
    core = np.zeros(n, dtype=np.int64)
    if n == 0:
        return core
    deg = degrees.copy()
    I = init_top.copy()
    nb = I.max() + 1
    head = np.full(nb, -1, dtype=np.int64)
    tail = np.full(nb, -1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    prv = np.full(n, -1, dtype=np.int64)
    for v in range(n):
        _bq_push(head, tail, nxt, prv, I[v], v)

    touched = np.zeros(n, dtype=np.bool_)
    pending = np.empty(n, dtype=np.int64)
    heap = np.empty(L, dtype=degrees.dtype)

    for k in range(nb):
        while head[k] != -1:
            v = head[k]
            _bq_unlink(head, tail, nxt, prv, k, v)
            core[v] = k
            cnt = 0
            for e in range(indptr[v], indptr[v + 1]):
                u = nbr[e]
                # processed nodes and nodes already at level k have I[u] <= k
                if I[u] > k:
                    l = lay[e]
                    deg[u, l] -= 1
                    if (deg[u, l] == I[u] - 1 or not short_circuit) and not touched[u]:
                        touched[u] = True
                        pending[cnt] = u
                        cnt += 1
            for i in range(cnt):
                u = pending[i]
                touched[u] = False
                if short_circuit:
                    new = _updated_top(deg[u], I[u], lam, use_scan, heap)
                else:
                    new = top_select(deg[u], lam, heap)
                if new < k:
                    new = k
                if new != I[u]:
                    _bq_unlink(head, tail, nxt, prv, I[u], u)
                    I[u] = new
                    _bq_push(head, tail, nxt, prv, new, u)
    return core


@njit(**_OPTS)
def firmdcore_peel(out_ptr, out_nbr, out_lay, in_ptr, in_nbr, in_lay,
                   out_degrees, lam, k, use_scan):
    """T-side and S-side indices of every node for one (lam, k).

    Returns ``(t_index, s_index)``. ``t_index[v]`` is the largest r with v on
    the T side of the (k, r, lam)-FirmD-Core. ``s_index[u]`` is the largest r
    with u on the S side, or -1 when u fails the out-degree filter outright.
    """
    n, L = out_degrees.shape
    t_index = np.zeros(n, dtype=np.int64)
    s_index = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return t_index, s_index
    heap = np.empty(L, dtype=np.int64)

    # out-degree into T; T starts as V
    dout = out_degrees.astype(np.int64)
    in_s = np.zeros(n, dtype=np.bool_)
    Ip = np.zeros(n, dtype=np.int64)
    for u in range(n):
        Ip[u] = top_select(dout[u], lam, heap)
        in_s[u] = Ip[u] >= k

    # in-degree from the filtered S
    din = np.zeros((n, L), dtype=np.int64)
    for u in range(n):
        if in_s[u]:
            for e in range(out_ptr[u], out_ptr[u + 1]):
                din[out_nbr[e], out_lay[e]] += 1

    Im = np.zeros(n, dtype=np.int64)
    for v in range(n):
        Im[v] = top_select(din[v], lam, heap)
    nb = Im.max() + 1
    head = np.full(nb, -1, dtype=np.int64)
    tail = np.full(nb, -1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    prv = np.full(n, -1, dtype=np.int64)
    for v in range(n):
        _bq_push(head, tail, nxt, prv, Im[v], v)

    in_t = np.ones(n, dtype=np.bool_)
    touched = np.zeros(n, dtype=np.bool_)
    pending = np.empty(n, dtype=np.int64)

    for r in range(nb):
        while head[r] != -1:
            v = head[r]
            _bq_unlink(head, tail, nxt, prv, r, v)
            in_t[v] = False
            t_index[v] = r
            cnt = 0
            for e in range(in_ptr[v], in_ptr[v + 1]):
                u = in_nbr[e]
                if in_s[u]:
                    l = in_lay[e]
                    dout[u, l] -= 1
                    if dout[u, l] == Ip[u] - 1 and not touched[u]:
                        touched[u] = True
                        pending[cnt] = u
                        cnt += 1
            for i in range(cnt):
                u = pending[i]
                touched[u] = False
                Ip[u] = _updated_top(dout[u], Ip[u], lam, use_scan, heap)
                if Ip[u] >= k:
                    continue
                # u was part of the (k, r, lam) core and leaves it now
                in_s[u] = False
                s_index[u] = r
                for e in range(out_ptr[u], out_ptr[u + 1]):
                    w = out_nbr[e]
                    if in_t[w] and Im[w] > r:
                        l = out_lay[e]
                        din[w, l] -= 1
                        if din[w, l] == Im[w] - 1:
                            new = _updated_top(din[w], Im[w], lam, use_scan, heap)
                            if new != Im[w]:
                                _bq_unlink(head, tail, nxt, prv, Im[w], w)
                                Im[w] = new
                                _bq_push(head, tail, nxt, prv, new, w)
    return t_index, s_index
