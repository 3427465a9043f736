"""Independent reference solvers for cross-checking the pipeline.

Nothing here imports the search code: brute-force enumeration of tours and
assignments, the O(n^3) Hungarian method, Bellman-Ford, and exhaustive simple
cycle enumeration. The enumerators run on the compiled kernels when numba is
available.
"""

from __future__ import annotations

from itertools import permutations
from typing import Sequence

import numpy as np

from cyclecancel import kernels
from cyclecancel.kernels import INF

__all__ = [
    "OracleError",
    "InfeasibleInstance",
    "NegativeCycleError",
    "BRUTE_TSP_MAX",
    "BRUTE_AP_MAX",
    "ENUMERATE_MAX",
    "brute_tsp",
    "brute_ap",
    "hungarian_ap",
    "bellman_ford",
    "bellman_ford_all",
    "enumerate_cycles",
]

BRUTE_TSP_MAX = 11
BRUTE_AP_MAX = 9
ENUMERATE_MAX = 10


class OracleError(ValueError):
    pass


class InfeasibleInstance(OracleError):
    pass


class NegativeCycleError(OracleError):
    pass


def _arr(m) -> np.ndarray:
    a = np.array(getattr(m, "array", m), dtype=np.int64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise OracleError(f"square matrix required, got shape {a.shape}")
    a[a >= INF] = INF
    return a


def brute_tsp(m, jit=None) -> tuple[list[int], int]:
    """Cheapest tour over all (n-1)! orders; ties go to the lexicographically
    first visiting sequence from vertex 1. Returns (row form, value)."""
    a = _arr(m)
    n = a.shape[0]
    if n > BRUTE_TSP_MAX:
        raise OracleError(f"brute_tsp is capped at n = {BRUTE_TSP_MAX}, got {n}")
    if n < 2:
        raise InfeasibleInstance("no tour on fewer than two points")
    best, seq = kernels.best_tour(a, jit=jit)
    if best >= INF:
        raise InfeasibleInstance("every tour uses a missing arc")
    image = [0] * n
    for t in range(n):
        image[seq[t]] = seq[(t + 1) % n] + 1
    return image, best


def brute_ap(m, jit=None) -> tuple[list[int], int]:
    """Cheapest permutation over all n! (the INF diagonal rules out fixed points)."""
    a = _arr(m)
    n = a.shape[0]
    if n > BRUTE_AP_MAX:
        raise OracleError(f"brute_ap is capped at n = {BRUTE_AP_MAX}, got {n}")
    best, p = kernels.best_assignment(a, jit=jit)
    if best >= INF:
        raise InfeasibleInstance("every assignment uses a missing arc")
    return [v + 1 for v in p], best


def hungarian_ap(m) -> tuple[list[int], int]:
    """Shortest augmenting path Hungarian method with row/column potentials.

    Exact integer arithmetic. Missing arcs get a cost larger than any finite
    assignment; if the optimum still needs one, the instance is infeasible.
    """
    a = _arr(m)
    n = a.shape[0]
    finite = a[a < INF]
    if (a >= INF).all(axis=1).any():
        raise InfeasibleInstance("a row has no finite entry")
    span = int(np.abs(finite).max()) if finite.size else 0
    big = (span + 1) * (n + 1) * 2
    cost = [[big if w >= INF else int(w) for w in row] for row in a.tolist()]
    # 1-based arrays; p[j] = row matched to column j
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [None] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = None
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                if minv[j] is None or cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if delta is None or minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    image = [0] * n
    for j in range(1, n + 1):
        image[p[j] - 1] = j
    total = 0
    for i in range(n):
        w = int(a[i, image[i] - 1])
        if w >= INF:
            raise InfeasibleInstance("every assignment uses a missing arc")
        total += w
    return image, total


def bellman_ford(m, source: int) -> list[int]:
    """Shortest path values from 1-based ``source`` to every vertex (INF when
    unreachable; the source itself is 0). Raises on a reachable negative cycle."""
    a = _arr(m)
    n = a.shape[0]
    edges = [(i, j, int(a[i, j])) for i in range(n) for j in range(n) if i != j and a[i, j] < INF]
    dist = [INF] * n
    dist[source - 1] = 0
    for _ in range(n - 1):
        changed = False
        for i, j, w in edges:
            if dist[i] < INF and dist[i] + w < dist[j]:
                dist[j] = dist[i] + w
                changed = True
        if not changed:
            break
    for i, j, w in edges:
        if dist[i] < INF and dist[i] + w < dist[j]:
            raise NegativeCycleError(f"negative cycle reachable from {source}")
    return dist


def bellman_ford_all(m) -> np.ndarray:
    """All-pairs table built from one Bellman-Ford run per source. The
    diagonal holds the cheapest cycle through each vertex (INF if none)."""
    a = _arr(m)
    n = a.shape[0]
    out = np.empty((n, n), dtype=np.int64)
    for s in range(n):
        row = bellman_ford(a, s + 1)
        back = [row[t] + int(a[t, s]) if row[t] < INF and a[t, s] < INF else INF for t in range(n) if t != s]
        row[s] = min(back) if back else INF
        if a[s, s] < INF:
            row[s] = min(row[s], 0) if a[s, s] == 0 else min(row[s], int(a[s, s]))
        out[s] = row
    return out


def _has_bounded_start(weights: Sequence[int], bound: int) -> bool:
    k = len(weights)
    for s in range(k):
        acc = 0
        for t in range(k):
            acc += weights[(s + t) % k]
            if acc >= bound:
                break
        else:
            return True
    return False


def enumerate_cycles(r, bound: int) -> list[tuple[tuple[int, ...], int]]:
    """Every simple cycle of value < ``bound`` that has a start from which all
    prefix sums stay below ``bound``.

    Cycles are returned as (vertices from the smallest, value), sorted.
    """
    a = _arr(r)
    n = a.shape[0]
    if n > ENUMERATE_MAX:
        raise OracleError(f"enumerate_cycles is capped at n = {ENUMERATE_MAX}, got {n}")
    out = []
    for first in range(n):
        rest = list(range(first + 1, n))

        # depth-first over orderings of larger vertices; missing arcs cut early
        def rec(path, weights):
            x = path[-1]
            back = int(a[x, first])
            if len(path) >= 2 and back < INF:
                w = weights + [back]
                total = sum(w)
                if total < bound and _has_bounded_start(w, bound):
                    out.append((tuple(v + 1 for v in path), total))
            for y in rest:
                if y in path:
                    continue
                wxy = int(a[x, y])
                if wxy >= INF:
                    continue
                path.append(y)
                weights.append(wxy)
                rec(path, weights)
                path.pop()
                weights.pop()

        rec([first], [])
    out.sort()
    return out
