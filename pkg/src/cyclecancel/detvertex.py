"""Determining vertices of weighted cycles.

A start index i of a cycle with weights w(1..k) is *determining* for a bound
N when every prefix sum of the rotation beginning at i stays strictly below
N. Whenever the total W is below N such a start exists; the valid starts are
found in O(k) from running maxima of the prefix sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from cyclecancel.trace import NULL, Trace

__all__ = [
    "WeightedCycle",
    "NoDeterminingVertex",
    "rotated_prefix_sums",
    "is_determining",
    "determining_vertices",
    "fold_procedure",
    "format_prefix_table",
]


class NoDeterminingVertex(ValueError):
    """Raised when the total weight is not below the bound."""


@dataclass(frozen=True)
class WeightedCycle:
    weights: tuple[int, ...]

    def __post_init__(self):
        w = tuple(int(x) for x in self.weights)
        if len(w) < 2:
            raise ValueError("a weighted cycle needs at least two arcs")
        object.__setattr__(self, "weights", w)

    @property
    def k(self) -> int:
        return len(self.weights)

    @property
    def total(self) -> int:
        return sum(self.weights)


def _weights(c) -> tuple[int, ...]:
    return c.weights if isinstance(c, WeightedCycle) else WeightedCycle(tuple(c)).weights


def rotated_prefix_sums(c, start: int) -> list[int]:
    """The k prefix sums of the rotation beginning at 1-based ``start``."""
    w = _weights(c)
    k = len(w)
    if not 1 <= start <= k:
        raise IndexError(f"start {start} outside 1..{k}")
    rot = w[start - 1 :] + w[: start - 1]
    return [int(s) for s in np.cumsum(rot, dtype=np.int64)] if k < 1 << 20 else list(_pysum(rot))


def _pysum(xs):
    s = 0
    for x in xs:
        s += x
        yield s


def is_determining(c, start: int, bound: int = 0) -> bool:
    return max(rotated_prefix_sums(c, start)) < bound


def determining_vertices(c, bound: int = 0) -> list[int]:
    """All valid starts for ``bound``, ascending (1-based).

    Non-empty whenever the total is below a bound N >= 0. For N < 0 a cycle
    can have total below N yet no valid start; that raises as well.
    """
    w = _weights(c)
    k = len(w)
    total = sum(w)
    if total >= bound:
        raise NoDeterminingVertex(f"total weight {total} is not below {bound}")
    p = [0]
    for x in w:
        p.append(p[-1] + x)
    # rotation from s (0-based) has prefixes p[t]-p[s] for t>s, and W+p[t]-p[s] for t<=s
    suf = [0] * (k + 2)
    suf[k + 1] = None
    for t in range(k, 0, -1):
        suf[t] = p[t] if suf[t + 1] is None else max(p[t], suf[t + 1])
    out = []
    pre = None
    for s in range(k):
        hi = suf[s + 1]
        if pre is not None:
            hi = max(hi, total + pre)
        if hi - p[s] < bound:
            out.append(s + 1)
        pre = p[s + 1] if pre is None else max(pre, p[s + 1])
    if not out:
        # only possible for a negative bound: [-1, -1] with N = -1 has none
        raise NoDeterminingVertex(f"no start keeps every prefix below {bound}")
    return out


def _merge_like(groups):
    out = []
    for label, val in groups:
        if out and (out[-1][1] < 0) == (val < 0):
            out[-1] = (out[-1][0], out[-1][1] + val)
        else:
            out.append((label, val))
    return out


def _merge_wrap(groups):
    # points lie on a circle: the last run continues into the first
    if len(groups) > 1 and (groups[0][1] < 0) == (groups[-1][1] < 0):
        label, val = groups[-1]
        return [(label, val + groups[0][1])] + groups[1:-1]
    return groups


def _fold(w) -> int | None:
    groups = _merge_like([(i + 1, x) for i, x in enumerate(w)])
    for _ in range(len(w)):
        negs = [g for g in groups if g[1] < 0]
        if len(negs) == 1:
            return negs[0][0]
        if not negs:
            return None
        paired = []
        i = 0
        while i < len(groups):
            label, val = groups[i]
            if val < 0 and i + 1 < len(groups) and groups[i + 1][1] >= 0:
                paired.append((label, val + groups[i + 1][1]))
                i += 2
            else:
                paired.append((label, val))
                i += 1
        groups = _merge_wrap(_merge_like(paired))
    return None


def fold_procedure(c, trace: Trace = NULL) -> int:
    """Like-sign folding: merge runs, absorb each positive run into the negative
    run on its left, merge again (cyclically) until one negative run remains;
    its first index is returned.

    The result is checked; if the heuristic lands on an invalid start the
    smallest valid one is returned instead and a ``fold-fallback`` event is
    traced.
    """
    w = _weights(c)
    if sum(w) >= 0:
        raise NoDeterminingVertex(f"total weight {sum(w)} is not negative")
    got = _fold(w)
    if got is not None and is_determining(w, got, 0):
        return got
    fallback = determining_vertices(w, 0)[0]
    trace.emit("fold-fallback", weights=list(w), folded=got, chosen=fallback)
    return fallback


def format_prefix_table(c, start: int) -> str:
    """Ordinals, rotated weights and prefix sums, one aligned row each."""
    w = _weights(c)
    k = len(w)
    idx = [(start - 1 + j) % k + 1 for j in range(k)]
    rot = [w[i - 1] for i in idx]
    sums = rotated_prefix_sums(w, start)
    cells = [str(i) for i in idx] + [f"{x:+d}" for x in rot] + [str(s) for s in sums]
    width = max(len(s) for s in cells)
    line = lambda xs: " ".join(s.rjust(width) for s in xs)  # noqa: E731
    return "\n".join(
        [
            "ordinal " + line([str(i) for i in idx]),
            "weight  " + line([f"{x:+d}" for x in rot]),
            "prefix  " + line([str(s) for s in sums]),
        ]
    )
