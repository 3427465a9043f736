"""Floyd-Warshall and its path-search variants over reduced matrices.

* :func:`classic_apsp` - the textbook triangle sweep with negative-cycle
  detection on the diagonal.
* :func:`nvs_search` - negatively valued subpaths: label-correcting sweep
  over columns that only keeps paths whose every prefix is negative and
  stops at the first negative cycle.
* :func:`nnvs_search` - the same sweep with an upper bound ``m`` instead of
  zero, collecting cycles of value below ``m``; the bound may be lowered by
  the caller as cycles are reported.
* :func:`ctree_search` - exhaustive bounded DFS from every root.
* :func:`column_span` - column-count accounting for a path.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from cyclecancel import kernels
from cyclecancel.kernels import INF
from cyclecancel.matrix import CostMatrix, MinIndex, ReducedMatrix
from cyclecancel.perm import Permutation, inverse
from cyclecancel.trace import NULL, Trace

__all__ = [
    "EntryState",
    "PathTable",
    "NegPathSet",
    "CycleCandidate",
    "CycleList",
    "NegativeCycleFound",
    "NoneFound",
    "classic_apsp",
    "nvs_search",
    "nnvs_search",
    "ctree_search",
    "column_span",
    "canonical_rotation",
]

SOURCES = ("phase1-trial", "nvs", "nnvs", "ctree", "classic", "oracle")


def canonical_rotation(vertices: Sequence[int]) -> tuple[int, ...]:
    """Rotate a cyclic vertex list so it starts at its minimum."""
    v = tuple(int(x) for x in vertices)
    k = v.index(min(v))
    return v[k:] + v[:k]


@dataclass(frozen=True)
class CycleCandidate:
    """A weighted cycle found by some search.

    ``vertices`` keeps discovery order (the first vertex is where the search
    started, a determining vertex for searches that bound prefixes). ``base``
    is the derangement whose reduced matrix the value refers to.
    """

    vertices: tuple[int, ...]
    value: int
    source: str
    base: Permutation | None = field(default=None, compare=False)
    blocks: int | None = field(default=None, compare=False)
    note: str = field(default="", compare=False)

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        v = tuple(int(x) for x in self.vertices)
        if len(set(v)) != len(v) or len(v) < 2:
            raise ValueError(f"cycle vertices must be distinct, at least two: {v}")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "value", int(self.value))

    @property
    def length(self) -> int:
        return len(self.vertices)

    def canonical(self) -> tuple[int, ...]:
        return canonical_rotation(self.vertices)

    def as_permutation(self, n: int) -> Permutation:
        return Permutation.from_cycles([self.vertices], n)

    def __str__(self):
        return "(" + " ".join(map(str, self.vertices)) + f") = {self.value}"


class CycleList(list):
    """A list of :class:`CycleCandidate` plus search statistics."""

    def __init__(self, items=(), *, blocks=0, nodes=0, truncated=False, bounds=()):
        super().__init__(items)
        self.blocks = blocks
        self.nodes = nodes
        self.truncated = truncated
        self.bounds = list(bounds)


class EntryState(enum.Enum):
    FRESH = "fresh"
    UNDERLINED = "underlined"  # open: extension pending
    ITALICIZED = "italicized"  # closed: already extended


@dataclass
class PathTable:
    """Best known path values and predecessors, 1-based.

    ``pred[i-1, k-1]`` is the vertex before k on the path from i to k, or 0
    when that path is the direct arc.
    """

    dist: np.ndarray
    pred: np.ndarray
    iteration_block: int = 0

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def value(self, i: int, k: int) -> int:
        return int(self.dist[i - 1, k - 1])

    def path(self, i: int, k: int) -> list[int]:
        if self.dist[i - 1, k - 1] >= INF:
            raise ValueError(f"no path from {i} to {k}")
        seq = [k]
        cur = k
        for _ in range(self.n + 1):
            p = int(self.pred[i - 1, cur - 1])
            if p == 0:
                seq.append(i)
                return seq[::-1]
            seq.append(p)
            cur = p
        raise RuntimeError(f"predecessor chain from {i} to {k} does not terminate")


class NegPathSet:
    """Open paths ordered by (value, origin, terminal), one per entry."""

    def __init__(self):
        self._heap: list[tuple[int, int, int]] = []
        self._live: dict[tuple[int, int], int] = {}

    def __len__(self):
        return len(self._live)

    def __contains__(self, key):
        return key in self._live

    def insert(self, value: int, origin: int, terminal: int) -> None:
        self._live[(origin, terminal)] = value
        heapq.heappush(self._heap, (value, origin, terminal))

    def delete(self, origin: int, terminal: int) -> None:
        self._live.pop((origin, terminal), None)

    def _prune(self):
        while self._heap:
            v, o, t = self._heap[0]
            if self._live.get((o, t)) == v:
                return
            heapq.heappop(self._heap)

    def peek_min(self):
        self._prune()
        return self._heap[0] if self._heap else None

    def pop_min(self):
        self._prune()
        if not self._heap:
            raise KeyError("empty NegPathSet")
        v, o, t = heapq.heappop(self._heap)
        del self._live[(o, t)]
        return v, o, t

    def keys(self):
        return sorted(self._live)


@dataclass
class NegativeCycleFound:
    cycle: CycleCandidate
    table: PathTable = field(repr=False)
    column: int = 0


@dataclass
class NoneFound:
    blocks: int
    table: PathTable | None = field(default=None, repr=False)

    def __bool__(self):
        return False


# ---------------------------------------------------------------------------
# Classic all-pairs
# ---------------------------------------------------------------------------


def _as_array(m) -> np.ndarray:
    if isinstance(m, (CostMatrix, ReducedMatrix)):
        return np.array(m.array, dtype=np.int64)
    a = np.array(m, dtype=np.int64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"square matrix required, got shape {a.shape}")
    a[a >= INF] = INF
    return a


def _pred_to_table(dist, pred0, block=1) -> PathTable:
    n = dist.shape[0]
    rows = np.arange(n)[:, None]
    pred = np.where(pred0 == rows, 0, pred0 + 1)
    return PathTable(dist=dist, pred=pred, iteration_block=block)


def _walk_back(dist, pred0, i) -> list[int]:
    # predecessor chain from the negative diagonal entry; if it loops before
    # returning to i, the loop itself is the (negative) cycle
    seq = [i]
    pos = {i: 0}
    cur = int(pred0[i, i])
    while cur not in pos:
        pos[cur] = len(seq)
        seq.append(cur)
        cur = int(pred0[i, cur])
    loop = seq[pos[cur] :]
    return [v + 1 for v in reversed(loop)]


def _arc_sum(a: np.ndarray, vertices: Sequence[int]) -> int:
    k = len(vertices)
    total = 0
    for t in range(k):
        w = int(a[vertices[t] - 1, vertices[(t + 1) % k] - 1])
        if w >= INF:
            return INF
        total += w
    return total


def classic_apsp(m, stop_on_negative: bool = True, jit=None) -> PathTable | NegativeCycleFound:
    """Triangle operation for j = 1..n over a copy of ``m``.

    Accepts a :class:`CostMatrix`, :class:`ReducedMatrix` or a square array
    (a zero diagonal is allowed). When a diagonal entry turns negative after
    column j, the cycle behind it is rebuilt from the predecessor table and
    returned together with the table as it stood at that moment.
    """
    a = _as_array(m)
    n = a.shape[0]
    dist = a.copy()
    pred0 = np.repeat(np.arange(n, dtype=np.int64)[:, None], n, axis=1)
    k, i = kernels.fw_sweep(dist, pred0, stop_on_negative=stop_on_negative, jit=jit)
    table = _pred_to_table(dist, pred0)
    if k >= 0:
        verts = _walk_back(dist, pred0, i)
        val = _arc_sum(a, verts)
        if not val < 0:
            raise RuntimeError(f"reconstructed cycle {verts} is not negative ({val})")
        return NegativeCycleFound(CycleCandidate(canonical_rotation(verts), val, "classic"), table, k + 1)
    return table


# ---------------------------------------------------------------------------
# Label-correcting column sweep shared by nvs and nnvs
# ---------------------------------------------------------------------------


def _order_for(r: ReducedMatrix, min_idx: MinIndex | None) -> np.ndarray:
    if min_idx is None:
        return r.order
    return inverse(r.perm).zero_based()[min_idx.order]


class _Sweep:
    """Per-entry best paths, processed column by column in blocks of n."""

    def __init__(self, r: ReducedMatrix, order: np.ndarray, trace: Trace):
        self.r = r.array
        self.order = order
        self.n = r.n
        self.trace = trace
        self.best: dict[tuple[int, int], tuple[int, tuple[int, ...]]] = {}
        self.state: dict[tuple[int, int], EntryState] = {}
        self.open = NegPathSet()
        # column -> origins with an open entry there
        self.by_col: list[set[int]] = [set() for _ in range(self.n)]

    def offer(self, origin, terminal, value, path) -> bool:
        key = (origin, terminal)
        cur = self.best.get(key)
        if cur is not None and value >= cur[0]:
            return False
        if key in self.open:
            self.open.delete(*key)
        self.best[key] = (value, path)
        self.state[key] = EntryState.UNDERLINED
        self.open.insert(value, origin, terminal)
        self.by_col[terminal].add(origin)
        self.trace.emit(
            "path-underlined", origin=origin + 1, terminal=terminal + 1, value=value, path=[v + 1 for v in path]
        )
        return True

    def close(self, origin, terminal):
        key = (origin, terminal)
        self.open.delete(*key)
        self.state[key] = EntryState.ITALICIZED
        self.trace.emit("path-italicized", origin=origin + 1, terminal=terminal + 1)

    def table(self, block) -> PathTable:
        n = self.n
        dist = np.full((n, n), INF, dtype=np.int64)
        pred = np.zeros((n, n), dtype=np.int64)
        for (o, t), (v, p) in self.best.items():
            dist[o, t] = v
            pred[o, t] = 0 if len(p) == 2 else p[-2] + 1
        return PathTable(dist, pred, block)

    def snapshot(self, block):
        fields = dict(block=block, label=f"P_{block * self.n}", open=len(self.open), entries=len(self.best))
        if self.trace.snapshots:
            t = self.table(block)
            fields["dist"] = [[None if x >= INF else int(x) for x in row] for row in t.dist]
            fields["pred"] = t.pred.tolist()
        self.trace.emit("block-snapshot", **fields)


def nvs_search(r: ReducedMatrix, min_idx: MinIndex | None = None, trace: Trace = NULL):
    """Search the reduced matrix for a negative cycle.

    Every negative off-diagonal entry seeds a path. Columns are swept 1..n
    per block; an open entry (o, j) is extended one arc at a time along row
    j's sorted order while the running sum stays negative. A negative sum
    arriving back at o is returned at once as a :class:`CycleCandidate`
    (``blocks`` = the block it was found in). If a block ends with nothing
    left open the result is :class:`NoneFound`.
    """
    order = _order_for(r, min_idx)
    sw = _Sweep(r, order, trace)
    a = sw.r
    n = sw.n
    for u in range(n):
        for v in range(n):
            if u != v and a[u, v] < 0:
                sw.offer(u, v, int(a[u, v]), (u, v))
    block = 0
    while len(sw.open):
        block += 1
        for j in range(n):
            origins = sorted(o for o in sw.by_col[j] if (o, j) in sw.open)
            sw.by_col[j].clear()
            if not origins:
                continue
            trace.emit("column-entered", block=block, column=j + 1, rows=[o + 1 for o in origins])
            for o in origins:
                if (o, j) not in sw.open:
                    continue
                val, path = sw.best[(o, j)]
                onpath = set(path)
                row = a[j]
                for y in order[j]:
                    y = int(y)
                    w = int(row[y])
                    if w >= INF or val + w >= 0:
                        break
                    if y == j:
                        continue
                    if y == o:
                        cyc = CycleCandidate(
                            tuple(v + 1 for v in path), val + w, "nvs", base=r.perm, blocks=block
                        )
                        trace.emit("cycle-found", cycle=list(cyc.vertices), value=cyc.value, block=block, column=j + 1)
                        return cyc
                    if y in onpath:
                        continue
                    sw.offer(o, y, val + w, path + (y,))
                sw.close(o, j)
        sw.snapshot(block)
    return NoneFound(blocks=block, table=sw.table(block))


def nnvs_search(
    r: ReducedMatrix,
    bound: int,
    min_idx: MinIndex | None = None,
    callback: Callable[[CycleCandidate], int | None] | None = None,
    trace: Trace = NULL,
    max_blocks: int | None = None,
) -> CycleList:
    """Collect cycles of value below ``bound`` whose every prefix stays below it.

    Same column sweep as :func:`nvs_search`, seeded by every off-diagonal
    entry below the bound. Each closed cycle (deduplicated by rotation) is
    reported to ``callback``, which may return a smaller bound; later
    extensions respect it and a bound <= 0 ends the search. At most
    ``max_blocks`` (default n) blocks run.
    """
    bound = int(bound)
    if bound <= 0:
        raise ValueError(f"bound must be positive, got {bound}")
    order = _order_for(r, min_idx)
    sw = _Sweep(r, order, trace)
    a = sw.r
    n = sw.n
    max_blocks = n if max_blocks is None else max_blocks
    found = CycleList(bounds=[bound])
    seen: set[tuple[int, ...]] = set()
    for u in range(n):
        for v in range(n):
            if u != v and a[u, v] < bound:
                sw.offer(u, v, int(a[u, v]), (u, v))
    block = 0
    stop = False
    while len(sw.open) and not stop:
        if block == max_blocks:
            found.truncated = True
            break
        block += 1
        for j in range(n):
            origins = sorted(o for o in sw.by_col[j] if (o, j) in sw.open)
            sw.by_col[j].clear()
            if not origins:
                continue
            trace.emit("column-entered", block=block, column=j + 1, rows=[o + 1 for o in origins])
            for o in origins:
                if (o, j) not in sw.open:
                    continue
                val, path = sw.best[(o, j)]
                if val >= bound:
                    sw.close(o, j)
                    continue
                onpath = set(path)
                row = a[j]
                for y in order[j]:
                    y = int(y)
                    w = int(row[y])
                    if w >= INF or val + w >= bound:
                        break
                    if y == j:
                        continue
                    if y == o:
                        verts = tuple(v + 1 for v in path)
                        key = canonical_rotation(verts)
                        if key in seen:
                            continue
                        seen.add(key)
                        cyc = CycleCandidate(verts, val + w, "nnvs", base=r.perm, blocks=block)
                        found.append(cyc)
                        trace.emit("cycle-found", cycle=list(verts), value=cyc.value, block=block, column=j + 1)
                        if callback is not None:
                            nb = callback(cyc)
                            if nb is not None and nb < bound:
                                bound = int(nb)
                                found.bounds.append(bound)
                                if bound <= 0:
                                    stop = True
                                    break
                        if val + w >= bound:
                            break
                        continue
                    if y in onpath:
                        continue
                    sw.offer(o, y, val + w, path + (y,))
                sw.close(o, j)
                if stop:
                    break
            if stop:
                break
        sw.snapshot(block)
    found.blocks = block
    return found


# ---------------------------------------------------------------------------
# c-trees
# ---------------------------------------------------------------------------

DEFAULT_CTREE_NODES = 50_000_000


def ctree_search(
    r: ReducedMatrix,
    m_star: int,
    max_nodes: int = DEFAULT_CTREE_NODES,
    roots: Iterable[int] | None = None,
    jit=None,
) -> CycleList:
    """Every simple cycle of value < ``m_star`` with some root from which all
    prefixes stay below ``m_star``.

    Each root grows a depth-first tree of simple paths along sorted rows.
    When the matrix has no negative cycle, a branch is cut as soon as its
    sum plus the shortest return distance to the root reaches the bound.
    ``truncated`` is set if ``max_nodes`` tree nodes were not enough.
    """
    m_star = int(m_star)
    if m_star <= 0:
        raise ValueError(f"bound must be positive, got {m_star}")
    n = r.n
    res = classic_apsp(r, jit=jit)
    if isinstance(res, NegativeCycleFound):
        # no valid return-distance bound; search unpruned
        lb = np.full((n, n), -(INF >> 2), dtype=np.int64)
    else:
        lb = res.dist
    root_arr = np.arange(n) if roots is None else np.array([v - 1 for v in roots], dtype=np.int64)
    cycles, vals, nodes, truncated = kernels.bounded_cycles(r.array, lb, r.order, m_star, root_arr, max_nodes, jit=jit)
    out = CycleList(nodes=nodes, truncated=truncated, bounds=[m_star])
    seen = set()
    for verts, val in zip(cycles, vals):
        v1 = tuple(v + 1 for v in verts)
        key = canonical_rotation(v1)
        if key in seen:
            continue
        seen.add(key)
        out.append(CycleCandidate(v1, val, "ctree", base=r.perm))
    return out


# ---------------------------------------------------------------------------
# Column accounting
# ---------------------------------------------------------------------------


def _arc_columns(a: int, b: int, n: int) -> int:
    return b - a if a < b else (n - a) + b


def column_span(path: Sequence[int], n: int, start_column: int | None = None) -> int:
    """Columns traversed by a path under the sweep order 1..n, 1..n, ...

    An arc (a, b) costs b - a when a < b and (n - a) + b otherwise. The first
    arc is measured from ``start_column`` (default: its own tail); pass 0 to
    count a path that starts at the beginning of a block.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if len(path) < 2:
        return 0
    for v in path:
        if not 1 <= v <= n:
            raise ValueError(f"vertex {v} outside 1..{n}")
    first = path[0] if start_column is None else start_column
    total = _arc_columns(first, path[1], n)
    for a, b in zip(path[1:], path[2:]):
        total += _arc_columns(a, b, n)
    return total
