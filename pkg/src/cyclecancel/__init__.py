"""Negative-cycle cancelling on permutations: assignment optimum, tour search, certificates."""

from cyclecancel.kernels import INF
from cyclecancel.matrix import CostMatrix, ReducedMatrix, load, loads, min_index, reduce, value
from cyclecancel.perm import Permutation, compose, decompose, inverse, parse_cycles

__version__ = "0.1.0"

__all__ = [
    "INF",
    "CostMatrix",
    "ReducedMatrix",
    "Permutation",
    "compose",
    "decompose",
    "inverse",
    "parse_cycles",
    "load",
    "loads",
    "min_index",
    "reduce",
    "value",
]
