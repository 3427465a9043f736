"""Hot numeric loops, each with a numba-compiled path and a numpy fallback.

All kernels work on 0-based ``int64`` matrices where ``INF`` marks a missing
arc. The dispatchers at the bottom pick the compiled variant unless
``CYCLECANCEL_DISABLE_JIT`` is set; both variants are importable directly so
the test suite and the benchmark can compare them.
"""

from itertools import islice, permutations

import numpy as np

from cyclecancel._jit import USE_JIT, njit

INF = 1 << 60


# ---------------------------------------------------------------------------
# Floyd-Warshall triangle sweep
# ---------------------------------------------------------------------------


@njit
def _fw_sweep_numba(dist, pred, stop_on_negative):
    n = dist.shape[0]
    rowk = np.empty(n, dtype=np.int64)
    colk = np.empty(n, dtype=np.int64)
    predk = np.empty(n, dtype=np.int64)
    for k in range(n):
        # row/column k are snapshotted so a negative dist[k, k] cannot leak
        # into the same sweep; the numpy path has identical semantics
        for t in range(n):
            rowk[t] = dist[k, t]
            colk[t] = dist[t, k]
            predk[t] = pred[k, t]
        for i in range(n):
            a = colk[i]
            if a >= INF:
                continue
            for j in range(n):
                b = rowk[j]
                if b >= INF:
                    continue
                s = a + b
                if s < dist[i, j]:
                    dist[i, j] = s
                    pred[i, j] = predk[j]
        if stop_on_negative:
            for i in range(n):
                if dist[i, i] < 0:
                    return k, i
    return -1, -1


def _fw_sweep_numpy(dist, pred, stop_on_negative):
    n = dist.shape[0]
    for k in range(n):
        colk = dist[:, k].copy()
        rowk = dist[k, :].copy()
        predk = pred[k, :].copy()
        s = colk[:, None] + rowk[None, :]
        missing = (colk >= INF)[:, None] | (rowk >= INF)[None, :]
        better = (s < dist) & ~missing
        dist[better] = s[better]
        np.copyto(pred, np.broadcast_to(predk, pred.shape), where=better)
        if stop_on_negative:
            neg = np.flatnonzero(np.diagonal(dist) < 0)
            if neg.size:
                return k, int(neg[0])
    return -1, -1


# ---------------------------------------------------------------------------
# Bounded simple-cycle enumeration (c-tree search)
# ---------------------------------------------------------------------------


@njit
def _bounded_cycles_numba(r, lb, order, bound, roots, max_nodes):
    n = r.shape[0]
    cap_v = 256
    cap_c = 64
    verts = np.empty(cap_v, dtype=np.int64)
    offs = np.zeros(cap_c + 1, dtype=np.int64)
    vals = np.empty(cap_c, dtype=np.int64)
    nv = 0
    nc = 0
    path = np.empty(n, dtype=np.int64)
    pos = np.empty(n, dtype=np.int64)
    psum = np.empty(n, dtype=np.int64)
    onpath = np.zeros(n, dtype=np.bool_)
    nodes = 0
    truncated = False
    for ri in range(roots.shape[0]):
        root = roots[ri]
        depth = 0
        path[0] = root
        pos[0] = 0
        psum[0] = 0
        onpath[root] = True
        while depth >= 0:
            x = path[depth]
            if pos[depth] >= n:
                onpath[x] = False
                depth -= 1
                continue
            y = order[x, pos[depth]]
            pos[depth] += 1
            w = r[x, y]
            if y == x or w >= INF:
                continue
            s = psum[depth] + w
            if s >= bound:
                # order rows are ascending in r, nothing further fits
                pos[depth] = n
                continue
            if y == root:
                if depth >= 1:
                    if nc == cap_c:
                        cap_c *= 2
                        offs2 = np.zeros(cap_c + 1, dtype=np.int64)
                        offs2[: nc + 1] = offs[: nc + 1]
                        offs = offs2
                        vals2 = np.empty(cap_c, dtype=np.int64)
                        vals2[:nc] = vals[:nc]
                        vals = vals2
                    while nv + depth + 1 > cap_v:
                        cap_v *= 2
                        verts2 = np.empty(cap_v, dtype=np.int64)
                        verts2[:nv] = verts[:nv]
                        verts = verts2
                    for t in range(depth + 1):
                        verts[nv] = path[t]
                        nv += 1
                    vals[nc] = s
                    nc += 1
                    offs[nc] = nv
                continue
            if onpath[y]:
                continue
            back = lb[y, root]
            if back >= INF or s + back >= bound:
                continue
            nodes += 1
            if nodes > max_nodes:
                truncated = True
                break
            depth += 1
            path[depth] = y
            pos[depth] = 0
            psum[depth] = s
            onpath[y] = True
        if truncated:
            break
        onpath[:] = False
    return verts[:nv].copy(), offs[: nc + 1].copy(), vals[:nc].copy(), nodes, truncated


# The DFS has no vectorised form; the fallback is the same loop uncompiled.
_bounded_cycles_python = getattr(_bounded_cycles_numba, "py_func", _bounded_cycles_numba)


# ---------------------------------------------------------------------------
# Exhaustive enumeration for the brute-force oracles
# ---------------------------------------------------------------------------


@njit
def _next_permutation(a):
    n = a.shape[0]
    i = n - 2
    while i >= 0 and a[i] >= a[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = n - 1
    while a[j] <= a[i]:
        j -= 1
    a[i], a[j] = a[j], a[i]
    lo = i + 1
    hi = n - 1
    while lo < hi:
        a[lo], a[hi] = a[hi], a[lo]
        lo += 1
        hi -= 1
    return True


@njit
def _best_tour_numba(m):
    n = m.shape[0]
    rest = np.arange(1, n, dtype=np.int64)
    best = INF
    best_rest = rest.copy()
    while True:
        total = 0
        prev = 0
        for t in range(n - 1):
            w = m[prev, rest[t]]
            if w >= INF:
                total = INF
                break
            total += w
            prev = rest[t]
        if total < INF:
            w = m[prev, 0]
            total = INF if w >= INF else total + w
        if total < best:
            best = total
            best_rest[:] = rest
        if not _next_permutation(rest):
            break
    return best, best_rest


@njit
def _best_assignment_numba(m):
    n = m.shape[0]
    p = np.arange(n, dtype=np.int64)
    best = INF
    best_p = p.copy()
    while True:
        total = 0
        for i in range(n):
            w = m[i, p[i]]
            if w >= INF:
                total = INF
                break
            total += w
        if total < best:
            best = total
            best_p[:] = p
        if not _next_permutation(p):
            break
    return best, best_p


def _saturating_rowsum(w):
    inf_rows = (w >= INF).any(axis=1)
    total = np.where(inf_rows[:, None], 0, w).sum(axis=1)
    total[inf_rows] = INF
    return total


def _best_tour_numpy(m, chunk=50_000):
    n = m.shape[0]
    best, best_rest = INF, np.arange(1, n, dtype=np.int64)
    it = permutations(range(1, n))
    while True:
        block = np.array(list(islice(it, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        full = np.concatenate(
            [np.zeros((len(block), 1), np.int64), block, np.zeros((len(block), 1), np.int64)], axis=1
        )
        totals = _saturating_rowsum(m[full[:, :-1], full[:, 1:]])
        k = int(np.argmin(totals))
        if totals[k] < best:
            best, best_rest = int(totals[k]), block[k].copy()
    return best, best_rest


def _best_assignment_numpy(m, chunk=50_000):
    n = m.shape[0]
    best, best_p = INF, np.arange(n, dtype=np.int64)
    rows = np.arange(n)
    it = permutations(range(n))
    while True:
        block = np.array(list(islice(it, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        totals = _saturating_rowsum(m[rows[None, :], block])
        k = int(np.argmin(totals))
        if totals[k] < best:
            best, best_p = int(totals[k]), block[k].copy()
    return best, best_p


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def fw_sweep(dist, pred, stop_on_negative=True, jit=None):
    """In-place Floyd-Warshall over ``dist``/``pred``.

    Returns ``(k, i)``: the column after which ``dist[i, i]`` first went
    negative, or ``(-1, -1)`` when the sweep completed.
    """
    use = USE_JIT if jit is None else jit
    fn = _fw_sweep_numba if use else _fw_sweep_numpy
    k, i = fn(dist, pred, stop_on_negative)
    return int(k), int(i)


def bounded_cycles(r, lb, order, bound, roots, max_nodes, jit=None):
    use = USE_JIT if jit is None else jit
    fn = _bounded_cycles_numba if use else _bounded_cycles_python
    verts, offs, vals, nodes, truncated = fn(
        np.ascontiguousarray(r, dtype=np.int64),
        np.ascontiguousarray(lb, dtype=np.int64),
        np.ascontiguousarray(order, dtype=np.int64),
        int(bound),
        np.ascontiguousarray(roots, dtype=np.int64),
        int(max_nodes),
    )
    cycles = [tuple(int(v) for v in verts[offs[c] : offs[c + 1]]) for c in range(len(vals))]
    return cycles, [int(v) for v in vals], int(nodes), bool(truncated)


def best_tour(m, jit=None):
    use = USE_JIT if jit is None else jit
    m = np.ascontiguousarray(m, dtype=np.int64)
    best, rest = (_best_tour_numba if use else _best_tour_numpy)(m)
    return int(best), [0] + [int(v) for v in rest]


def best_assignment(m, jit=None):
    use = USE_JIT if jit is None else jit
    m = np.ascontiguousarray(m, dtype=np.int64)
    best, p = (_best_assignment_numba if use else _best_assignment_numpy)(m)
    return int(best), [int(v) for v in p]
