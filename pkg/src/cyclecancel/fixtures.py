"""Bundled worked instances.

``ex32``: ten vertices, six arcs, holding the negative cycle (1 3 7 10).
``ex34``: the 8 x 8 instance (assignment optimum 155, tour optimum 161).
``ex35``: the 20 x 20 instance whose certified tour is :data:`EX35_D7`.
"""

from __future__ import annotations

from importlib import resources

from cyclecancel.matrix import CostMatrix, loads
from cyclecancel.perm import Permutation

__all__ = [
    "NAMES",
    "fixture_text",
    "load_fixture",
    "EX31_WEIGHTS",
    "EX34_INITIAL",
    "EX34_D3",
    "EX34_SIGMA1",
    "EX35_INITIAL",
    "EX35_D7",
    "EX35_D8",
    "EX35_S",
]

NAMES = ("ex32", "ex34", "ex35")

# 25 arc weights of the determining-vertex example; start 18 is valid
EX31_WEIGHTS = (-7, -10, 1, 2, -7, 4, -9, 11, -2, -1, -4, -4, -8, 9, 9, 21, 1, -2, -1, -3, -3, -12, 6, 2, 3)
EX31_PREFIX_FROM_18 = (-2, -3, -6, -9, -21, -15, -13, -10, -17, -27, -26, -24, -31, -27, -36, -25, -27, -28, -32, -36, -44, -35, -26, -5, -4)

EX34_INITIAL = "(1 2 3 4 5 6 7 8)"
EX34_D3 = "(1 4 2 3)(5 7 8 6)"
EX34_SIGMA1 = "(1 4 8 6 5 7 2 3)"

EX35_INITIAL = "(" + " ".join(str(i) for i in range(1, 21)) + ")"
EX35_D7 = Permutation([7, 8, 11, 17, 18, 14, 5, 1, 4, 12, 9, 20, 19, 13, 16, 6, 10, 15, 3, 2])
EX35_D8 = Permutation([7, 8, 11, 17, 18, 19, 5, 1, 4, 12, 20, 2, 9, 13, 16, 6, 10, 14, 3, 15])
EX35_S = (11, 12, 20, 18, 6, 13)


def fixture_text(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
    return resources.files("cyclecancel").joinpath("data", f"{name}.mat").read_text(encoding="utf-8")


def load_fixture(name: str) -> CostMatrix:
    return loads(fixture_text(name))
