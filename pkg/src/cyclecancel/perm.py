"""Permutations of {1..n} in the 1-indexed convention used throughout the package.

A :class:`Permutation` stores its row form (``image[a-1]`` is where ``a`` goes).
Composition follows function application: ``compose(D, s)`` is ``a -> D(s(a))``,
so applying an improving cycle ``s`` to a derangement ``D`` is ``compose(D, s)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Permutation",
    "CycleDecomposition",
    "compose",
    "inverse",
    "decompose",
    "is_derangement",
    "is_n_cycle",
    "random_n_cycle",
    "parse_cycles",
    "format_cycles",
    "format_row_form",
]


class Permutation:
    """Immutable bijection on {1..n}."""

    __slots__ = ("_image",)

    def __init__(self, image: Iterable[int]):
        img = tuple(int(v) for v in image)
        n = len(img)
        if n == 0:
            raise ValueError("permutation needs at least one point")
        if sorted(img) != list(range(1, n + 1)):
            raise ValueError(f"not a bijection on 1..{n}: {img}")
        object.__setattr__(self, "_image", img)

    def __setattr__(self, name, value):
        raise AttributeError("Permutation is immutable")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(1, n + 1))

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[int]], n: int) -> "Permutation":
        img = list(range(1, n + 1))
        seen = set()
        for cyc in cycles:
            for a in cyc:
                if not 1 <= a <= n or a in seen:
                    raise ValueError(f"bad or repeated point {a} in cycles")
                seen.add(a)
            for k, a in enumerate(cyc):
                img[a - 1] = cyc[(k + 1) % len(cyc)]
        return cls(img)

    @classmethod
    def from_zero_based(cls, arr) -> "Permutation":
        return cls(int(v) + 1 for v in arr)

    @property
    def n(self) -> int:
        return len(self._image)

    @property
    def image(self) -> tuple[int, ...]:
        return self._image

    def __call__(self, a: int) -> int:
        return self._image[a - 1]

    def zero_based(self) -> np.ndarray:
        return np.asarray(self._image, dtype=np.int64) - 1

    def __eq__(self, other):
        return isinstance(other, Permutation) and self._image == other._image

    def __hash__(self):
        return hash(self._image)

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def __repr__(self):
        return f"Permutation({format_cycles(self)})"

    def __str__(self):
        return format_cycles(self)


@dataclass(frozen=True)
class CycleDecomposition:
    cycles: tuple[tuple[int, ...], ...]
    fixed_points: tuple[int, ...]

    def recompose(self, n: int) -> Permutation:
        return Permutation.from_cycles(self.cycles, n)


def compose(outer: Permutation, inner: Permutation) -> Permutation:
    """Return ``a -> outer(inner(a))``."""
    if outer.n != inner.n:
        raise ValueError(f"size mismatch: {outer.n} vs {inner.n}")
    o = outer.image
    return Permutation(o[b - 1] for b in inner.image)


def inverse(p: Permutation) -> Permutation:
    inv = [0] * p.n
    for a, b in enumerate(p.image, start=1):
        inv[b - 1] = a
    return Permutation(inv)


def decompose(p: Permutation) -> CycleDecomposition:
    """Canonical cycle form: each cycle starts at its minimum, cycles sorted by it."""
    seen = [False] * (p.n + 1)
    cycles = []
    fixed = []
    for a in range(1, p.n + 1):
        if seen[a]:
            continue
        orbit = [a]
        seen[a] = True
        b = p(a)
        while b != a:
            orbit.append(b)
            seen[b] = True
            b = p(b)
        if len(orbit) == 1:
            fixed.append(a)
        else:
            cycles.append(tuple(orbit))
    return CycleDecomposition(tuple(cycles), tuple(fixed))


def is_derangement(p: Permutation) -> bool:
    return all(b != a for a, b in enumerate(p.image, start=1))


def is_n_cycle(p: Permutation) -> bool:
    if p.n < 2:
        return False
    a, steps = p(1), 1
    while a != 1:
        a = p(a)
        steps += 1
    return steps == p.n


def random_n_cycle(n: int, seed: int) -> Permutation:
    """Uniform n-cycle: shuffle 2..n with a seeded PCG64 and prepend 1."""
    if n < 2:
        raise ValueError("an n-cycle needs n >= 2")
    rng = np.random.default_rng(seed)
    rest = rng.permutation(np.arange(2, n + 1))
    return Permutation.from_cycles([[1, *rest.tolist()]], n)


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, n: int) -> Permutation:
    """Parse cycle notation such as ``"(1 4 2 3)(5 7 8 6)"``.

    Points may be separated by spaces or commas; ``"()"`` is the identity.
    """
    stripped = _CYCLE_RE.sub("", text).strip()
    if stripped:
        raise ValueError(f"unparseable cycle notation: {text!r}")
    cycles = []
    for body in _CYCLE_RE.findall(text):
        pts = [int(tok) for tok in re.split(r"[\s,]+", body.strip()) if tok]
        if len(pts) > 1:
            cycles.append(pts)
    return Permutation.from_cycles(cycles, n)


def format_cycles(p: Permutation) -> str:
    dec = decompose(p)
    if not dec.cycles:
        return "()"
    return "".join("(" + " ".join(map(str, c)) + ")" for c in dec.cycles)


def format_row_form(p: Permutation, values: Sequence[int] | None = None) -> str:
    """Two-line row form: points on top, images below; optional value line above."""
    width = max(len(str(p.n)), *(len(str(v)) for v in values)) if values else len(str(p.n))
    cell = "{:>" + str(width) + "}"
    lines = []
    if values is not None:
        lines.append(" ".join(cell.format(v) for v in values))
    lines.append(" ".join(cell.format(a) for a in range(1, p.n + 1)))
    lines.append(" ".join(cell.format(b) for b in p.image))
    return "\n".join(lines)
