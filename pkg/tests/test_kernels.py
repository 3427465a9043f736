import numpy as np
import pytest

from conftest import random_matrix
from cyclecancel import kernels
from cyclecancel._jit import NUMBA_AVAILABLE
from cyclecancel.fw import classic_apsp
from cyclecancel.kernels import INF
from cyclecancel.matrix import reduce
from cyclecancel.oracle import hungarian_ap
from cyclecancel.perm import Permutation

pytestmark = pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba not installed")


def test_fw_parity(rng):
    for _ in range(100):
        n = int(rng.integers(2, 15))
        m = random_matrix(rng, n, low=-10, high=40, missing=0.2)
        out = []
        for jit in (True, False):
            dist = np.array(m.array)
            pred = np.repeat(np.arange(n, dtype=np.int64)[:, None], n, axis=1)
            k = kernels.fw_sweep(dist, pred, stop_on_negative=True, jit=jit)
            out.append((k, dist.tolist(), pred.tolist()))
        assert out[0] == out[1]


def test_brute_parity(rng):
    for _ in range(30):
        n = int(rng.integers(2, 8))
        m = random_matrix(rng, n, low=-20, high=60, missing=0.1)
        t1, s1 = kernels.best_tour(m.array, jit=True)
        t2, s2 = kernels.best_tour(m.array, jit=False)
        assert t1 == t2
        if t1 < INF:
            assert list(s1) == list(s2)
        a1, _ = kernels.best_assignment(m.array, jit=True)
        a2, _ = kernels.best_assignment(m.array, jit=False)
        assert a1 == a2


def test_bounded_cycles_parity(rng):
    for _ in range(30):
        m = random_matrix(rng, 7, low=1, high=30)
        r = reduce(m, Permutation(hungarian_ap(m)[0]))
        lb = classic_apsp(r).dist
        roots = np.arange(7)
        res = [
            kernels.bounded_cycles(r.array, lb, r.order, 12, roots, 10**7, jit=jit) for jit in (True, False)
        ]
        norm = [sorted((tuple(c), int(v)) for c, v in zip(x[0], x[1])) for x in res]
        assert norm[0] == norm[1]
        assert res[0][2] == res[1][2]  # node counts
