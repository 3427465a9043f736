"""Compare the numba kernels with their pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5] [--seed 0]

Times the Floyd-Warshall sweep, brute-force tour search and the bounded
cycle DFS on random instances and prints one line per kernel and size.
"""

import argparse
import time

import numpy as np

from cyclecancel import kernels
from cyclecancel._jit import NUMBA_AVAILABLE
from cyclecancel.fw import classic_apsp
from cyclecancel.kernels import INF
from cyclecancel.matrix import CostMatrix, reduce
from cyclecancel.oracle import hungarian_ap
from cyclecancel.perm import Permutation


def random_array(rng, n, low=1, high=100):
    a = rng.integers(low, high, size=(n, n), endpoint=True)
    np.fill_diagonal(a, INF)
    return a.astype(np.int64)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def bench_fw(a, jit):
    n = a.shape[0]

    def run():
        dist = a.copy()
        pred = np.repeat(np.arange(n, dtype=np.int64)[:, None], n, axis=1)
        kernels.fw_sweep(dist, pred, stop_on_negative=False, jit=jit)

    return run


def bench_tour(a, jit):
    return lambda: kernels.best_tour(a, jit=jit)


def bench_dfs(a, jit):
    m = CostMatrix(a)
    r = reduce(m, Permutation(hungarian_ap(m)[0]))
    lb = classic_apsp(r).dist
    roots = np.arange(m.n)
    bound = int(np.median(r.array[r.array < INF]))
    return lambda: kernels.bounded_cycles(r.array, lb, r.order, max(bound, 1), roots, 10**8, jit=jit)


CASES = [
    ("fw_sweep", bench_fw, (50, 100, 200)),
    ("best_tour", bench_tour, (8, 9, 10)),
    ("bounded_cycles", bench_dfs, (10, 14, 18)),
]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    if not NUMBA_AVAILABLE:
        print("numba not available (or disabled); only the numpy path can run")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<16}{'n':>5}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for name, make, sizes in CASES:
        for n in sizes:
            a = random_array(rng, n)
            jit_t = None
            if NUMBA_AVAILABLE:
                make(a, True)()  # compile
                jit_t = best_of(make(a, True), args.repeat)
            py_t = best_of(make(a, False), max(1, args.repeat // 2))
            jt = f"{jit_t:12.5f}" if jit_t is not None else f"{'-':>12}"
            sp = f"{py_t / jit_t:9.1f}x" if jit_t else f"{'-':>10}"
            print(f"{name:<16}{n:>5}{jt}{py_t:12.5f}{sp}")


if __name__ == "__main__":
    main()
