"""Integer cost matrices, the per-row sorted index table, and reduced matrices.

Weights are exact ``int64``. A missing arc (every diagonal entry, and any
other forbidden arc) is the sentinel :data:`INF`, which compares above every
finite weight and absorbs addition.
"""

from __future__ import annotations

import hashlib
import os
from typing import Sequence

import numpy as np

from cyclecancel.kernels import INF
from cyclecancel.perm import Permutation, inverse

__all__ = [
    "INF",
    "MatrixFormatError",
    "CostMatrix",
    "MinIndex",
    "ReducedMatrix",
    "load",
    "loads",
    "save",
    "dumps",
    "min_index",
    "reduce",
    "value",
    "diff_vector",
    "shift_rows",
    "instance_hash",
]

# n * MAX_ABS_WEIGHT stays far below INF, so path sums never reach the sentinel.
_HEADROOM = INF >> 4


class MatrixFormatError(ValueError):
    def __init__(self, message, row=None, col=None):
        where = ""
        if row is not None:
            where = f" (row {row}" + (f", column {col}" if col is not None else "") + ")"
        super().__init__(message + where)
        self.row = row
        self.col = col


class CostMatrix:
    """Dense n x n arc weights; ``entry(i, j)`` is d(i, j) with 1-based indices."""

    __slots__ = ("_a",)

    def __init__(self, entries):
        a = np.array(entries, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise MatrixFormatError(f"matrix must be square and non-empty, got shape {a.shape}")
        n = a.shape[0]
        a[a >= INF] = INF
        for i in range(n):
            if a[i, i] != INF:
                raise MatrixFormatError("diagonal entry must be inf", row=i + 1, col=i + 1)
        finite = a < INF
        limit = _HEADROOM // n
        bad = np.argwhere(finite & (np.abs(a) > limit))
        if bad.size:
            i, j = bad[0]
            raise MatrixFormatError(f"weight {a[i, j]} exceeds the {limit} headroom limit", row=i + 1, col=j + 1)
        a.setflags(write=False)
        self._a = a

    @property
    def n(self) -> int:
        return self._a.shape[0]

    @property
    def array(self) -> np.ndarray:
        """Read-only 0-based view."""
        return self._a

    def entry(self, i: int, j: int) -> int:
        return int(self._a[i - 1, j - 1])

    def __eq__(self, other):
        return isinstance(other, CostMatrix) and np.array_equal(self._a, other._a)

    def __repr__(self):
        return f"CostMatrix(n={self.n})"


class MinIndex:
    """Per-row column order by ascending weight (ties by column index)."""

    __slots__ = ("order", "_rank")

    def __init__(self, order: np.ndarray):
        self.order = order
        rank = np.empty_like(order)
        rows = np.arange(order.shape[0])[:, None]
        rank[rows, order] = np.arange(order.shape[1])[None, :]
        self._rank = rank

    def row(self, i: int) -> list[int]:
        """MIN(M)(i, .) as 1-based column numbers."""
        return [int(c) + 1 for c in self.order[i - 1]]

    def at(self, i: int, k: int) -> int:
        """MIN(M)(i, k): the k-th smallest column of row i (both 1-based)."""
        return int(self.order[i - 1, k - 1]) + 1

    def ordinal(self, i: int, j: int) -> int:
        """Rank (1-based) of column j within row i."""
        return int(self._rank[i - 1, j - 1]) + 1

    def __eq__(self, other):
        return isinstance(other, MinIndex) and np.array_equal(self.order, other.order)


class ReducedMatrix:
    """The column-permuted, row-shifted view of a cost matrix for derangement D.

    ``entry(u, v) = d(u, D(v)) - d(u, D(u))``. D's own arcs sit on the zero
    diagonal; the arc that would close a loop, (u, D^-1(u)), inherits INF.
    A cycle s of finite reduced value changes value(D) by exactly that amount
    when applied as ``compose(D, s)``.
    """

    __slots__ = ("base", "perm", "array", "order")

    def __init__(self, base: CostMatrix, perm: Permutation, min_idx: MinIndex | None = None):
        if base.n != perm.n:
            raise ValueError(f"size mismatch: matrix {base.n}, permutation {perm.n}")
        m = base.array
        d = perm.zero_based()
        rows = np.arange(base.n)
        own = m[rows, d]
        if (own >= INF).any():
            u = int(np.flatnonzero(own >= INF)[0]) + 1
            raise ValueError(f"derangement uses a missing arc at vertex {u}; reduction undefined")
        cols = m[:, d]
        r = np.where(cols >= INF, INF, cols - own[:, None])
        r.setflags(write=False)
        self.base = base
        self.perm = perm
        self.array = r
        if min_idx is None:
            min_idx = min_index(base)
        # MIN(M) rows mapped through D^-1 are ascending in the reduced row too
        dinv = inverse(perm).zero_based()
        order = dinv[min_idx.order]
        order.setflags(write=False)
        self.order = order

    @property
    def n(self) -> int:
        return self.array.shape[0]

    def entry(self, u: int, v: int) -> int:
        return int(self.array[u - 1, v - 1])

    def cycle_value(self, vertices: Sequence[int]) -> int:
        """Sum of reduced arcs around a 1-based vertex cycle; INF if any arc is missing."""
        k = len(vertices)
        total = 0
        for t in range(k):
            w = int(self.array[vertices[t] - 1, vertices[(t + 1) % k] - 1])
            if w >= INF:
                return INF
            total += w
        return total

    def min_row(self, u: int) -> list[int]:
        """MIN(D^-1 M^-)(u, .) as 1-based reduced columns."""
        return [int(v) + 1 for v in self.order[u - 1]]


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------


def loads(text: str) -> CostMatrix:
    """Parse the text format: ``n`` on the first line, then n rows; ``inf`` tokens; ``#`` comments."""
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise MatrixFormatError("empty matrix file")
    if len(rows[0]) != 1:
        raise MatrixFormatError("first line must hold only n", row=0)
    try:
        n = int(rows[0][0])
    except ValueError:
        raise MatrixFormatError(f"bad size token {rows[0][0]!r}", row=0) from None
    if n < 1:
        raise MatrixFormatError(f"n must be positive, got {n}", row=0)
    body = rows[1:]
    if len(body) != n:
        raise MatrixFormatError(f"expected {n} rows, found {len(body)}")
    a = np.empty((n, n), dtype=np.int64)
    for i, toks in enumerate(body):
        if len(toks) != n:
            raise MatrixFormatError(f"expected {n} entries, found {len(toks)}", row=i + 1)
        for j, tok in enumerate(toks):
            if tok.lower() in ("inf", "+inf", "infinity", "∞"):
                a[i, j] = INF
                continue
            try:
                a[i, j] = int(tok)
            except (ValueError, OverflowError):
                raise MatrixFormatError(f"bad entry {tok!r}", row=i + 1, col=j + 1) from None
    return CostMatrix(a)


def load(path) -> CostMatrix:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(m: CostMatrix) -> str:
    lines = [str(m.n)]
    for row in m.array:
        lines.append(" ".join("inf" if w >= INF else str(int(w)) for w in row))
    return "\n".join(lines) + "\n"


def save(m: CostMatrix, path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(m))
    os.replace(tmp, path)


def instance_hash(m: CostMatrix) -> str:
    return hashlib.sha256(dumps(m).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def min_index(m: CostMatrix) -> MinIndex:
    order = np.argsort(m.array, axis=1, kind="stable").astype(np.int64)
    order.setflags(write=False)
    return MinIndex(order)


def reduce(m: CostMatrix, d: Permutation, min_idx: MinIndex | None = None) -> ReducedMatrix:
    return ReducedMatrix(m, d, min_idx)


def value(m: CostMatrix, p: Permutation) -> int:
    """Total weight of the arcs (a, p(a)); INF when any arc is missing (including fixed points)."""
    if m.n != p.n:
        raise ValueError(f"size mismatch: matrix {m.n}, permutation {p.n}")
    w = m.array[np.arange(m.n), p.zero_based()]
    if (w >= INF).any():
        return INF
    return int(w.sum())


def diff_vector(m: CostMatrix, d: Permutation, min_idx: MinIndex | None = None) -> list[int]:
    """DIFF(a) = d(a, MIN(M)(a, 1)) - d(a, D(a)) for a = 1..n.

    Zero when D already uses the row minimum; negative values mark vertices
    whose current arc can be undercut.
    """
    if min_idx is None:
        min_idx = min_index(m)
    a = m.array
    rows = np.arange(m.n)
    best = a[rows, min_idx.order[:, 0]]
    cur = a[rows, d.zero_based()]
    if (cur >= INF).any():
        raise ValueError("derangement uses a missing arc")
    return [int(x) for x in best - cur]


def shift_rows(m: CostMatrix, c) -> CostMatrix:
    """Add ``c`` (a scalar, or one value per row) to every finite entry."""
    shift = np.broadcast_to(np.asarray(c, dtype=object), (m.n,))
    a = m.array
    out = np.empty_like(a)
    limit = _HEADROOM // m.n
    for i in range(m.n):
        s = int(shift[i])
        row = a[i]
        finite = row < INF
        if finite.any():
            lo, hi = int(row[finite].min()) + s, int(row[finite].max()) + s
            if max(abs(lo), abs(hi)) > limit:
                raise OverflowError(f"shift by {s} overflows row {i + 1}")
        out[i] = np.where(finite, row + s, INF)
    return CostMatrix(out)
