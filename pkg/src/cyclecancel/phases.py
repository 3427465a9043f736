"""The three-phase pipeline.

Phase 1 walks the sorted rows of M from the vertices whose current arc is
most undercut, harvesting negative cycles and applying the best one until no
trial improves. Phase 2 cancels negative cycles of the reduced matrix until
none remain, which yields an optimal assignment. Phase 3 turns the
permutations seen so far into tours, then searches cycles of bounded value
over the optimal assignment to improve the best tour and decide whether it
can be certified optimal.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

from cyclecancel.fw import (
    CycleCandidate,
    NegativeCycleFound,
    NoneFound,
    canonical_rotation,
    classic_apsp,
    ctree_search,
    nnvs_search,
    nvs_search,
)
from cyclecancel.kernels import INF
from cyclecancel.matrix import CostMatrix, MinIndex, diff_vector, instance_hash, min_index, reduce, value
from cyclecancel.perm import (
    Permutation,
    compose,
    format_cycles,
    inverse,
    is_derangement,
    is_n_cycle,
    random_n_cycle,
)
from cyclecancel.trace import NULL, Trace

__all__ = [
    "log_budget",
    "Move",
    "HistoryEntry",
    "SolverState",
    "Phase3Result",
    "Infeasible",
    "phase1",
    "phase2",
    "phase3",
    "disjoint_products",
    "solve",
    "SolveReport",
]

DEFAULT_SUBSET_NODES = 2_000_000


def log_budget(n: int) -> int:
    """Natural log of n rounded to the nearest integer, at least 1 (8 -> 2, 20 -> 3)."""
    return max(1, int(math.floor(math.log(max(n, 1)) + 0.5)))


class Infeasible(RuntimeError):
    """No finite-valued derangement or tour could be produced."""


@dataclass(frozen=True)
class Move:
    """Disjoint cycles applied together to ``base``; values are reduced-matrix values."""

    cycles: tuple[CycleCandidate, ...]
    base: Permutation
    label: str = ""

    @property
    def value(self) -> int:
        return sum(c.value for c in self.cycles)

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for c in self.cycles for v in c.vertices)

    @property
    def size(self) -> int:
        return sum(c.length for c in self.cycles)

    def key(self) -> tuple:
        return tuple(sorted(c.canonical() for c in self.cycles))

    def permutation(self) -> Permutation:
        return Permutation.from_cycles([c.vertices for c in self.cycles], self.base.n)

    def apply(self) -> Permutation:
        return compose(self.base, self.permutation())

    def rank(self) -> tuple:
        # best value, then fewer vertices, then lexicographic
        return (self.value, self.size, self.key())

    def __str__(self):
        return "".join("(" + " ".join(map(str, c.vertices)) + ")" for c in self.cycles) + f" = {self.value}"


@dataclass(frozen=True)
class HistoryEntry:
    perm: Permutation
    value: int
    applied: Move | None
    phase: int


@dataclass
class SolverState:
    matrix: CostMatrix
    current: Permutation
    history: list[HistoryEntry] = field(default_factory=list)
    candidate_bag: list[Move] = field(default_factory=list)
    bounds: list[int] = field(default_factory=list)
    best_tour: tuple[Permutation, int] | None = None
    ap: tuple[Permutation, int] | None = None
    min_idx: MinIndex | None = None
    notes: list[str] = field(default_factory=list)
    phase1_rounds: list[dict] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.matrix.n

    def record(self, perm: Permutation, move: Move | None, phase: int) -> None:
        v = value(self.matrix, perm)
        if self.history and not v < self.history[-1].value:
            raise AssertionError(f"value did not decrease: {self.history[-1].value} -> {v}")
        self.history.append(HistoryEntry(perm, v, move, phase))
        self.current = perm

    def offer_tour(self, perm: Permutation, v: int) -> bool:
        if v >= INF or not is_n_cycle(perm):
            return False
        if self.best_tour is None or (v, perm.image) < (self.best_tour[1], self.best_tour[0].image):
            self.best_tour = (perm, v)
            return True
        return False


# ---------------------------------------------------------------------------
# Phase 1
# ---------------------------------------------------------------------------


def _trial_walk(r, d, dinv, mi: MinIndex, start: int, t: int):
    """One trial from ``start`` (0-based) using the t-th smallest entry of its row.

    Returns the vertex path, its running sums, and the index where the walk
    ran into a vertex already on it (or None), plus the closing vertex.
    """
    a = r.array
    col = int(mi.order[start, t - 1])
    if col == d[start]:
        return None
    y = int(dinv[col])
    w = int(a[start, y])
    if w >= INF or w >= 0:
        return None
    path, sums = [start, y], [0, w]
    repeat = None
    while True:
        x = path[-1]
        row = mi.order[x]
        col = next(int(c) for c in row if c != d[x])
        y = int(dinv[col])
        w = int(a[x, y])
        if w >= INF or sums[-1] + w >= 0:
            break
        if y in path:
            repeat = (path.index(y), sums[-1] + w)
            break
        path.append(y)
        sums.append(sums[-1] + w)
    return path, sums, repeat


def _trial_candidates(r, base: Permutation, path, sums, repeat, label) -> list[Move]:
    a = r.array
    out = []
    closures = {}
    for i in range(1, len(path)):
        back = int(a[path[i], path[0]])
        if back >= INF:
            continue
        cyc = CycleCandidate(tuple(v + 1 for v in path[: i + 1]), sums[i] + back, "phase1-trial", base=base)
        closures[i] = cyc
        out.append(Move((cyc,), base, f"{label}.c{i}"))
    if repeat is not None:
        q, total = repeat
        rc = CycleCandidate(tuple(v + 1 for v in path[q:]), total - sums[q], "phase1-trial", base=base)
        out.append(Move((rc,), base, f"{label}.r"))
        if rc.value < 0:
            for i, cyc in closures.items():
                if i < q and cyc.value < 0:
                    out.append(Move((cyc, rc), base, f"{label}.p{i}"))
    return out


def phase1(
    m: CostMatrix,
    d0: Permutation,
    trial_budget: int | None = None,
    start_budget: int | None = None,
    trace: Trace = NULL,
    state: SolverState | None = None,
) -> SolverState:
    """Greedy trial-based descent from the derangement ``d0``.

    Each round takes the most negative DIFF vertices (at most ``start_budget``,
    default the rounded natural log of n) as starts. A start runs up to
    ``trial_budget`` trials; trial t leaves the start along its t-th smallest
    row entry and then follows each vertex's best arc other than its current
    one, keeping every partial sum negative. Closures of the walk, the cycle
    it runs into, and products of the two are collected; once a start
    produces a negative candidate the best one is applied and the next round
    begins. The round that finds nothing ends the phase.
    """
    n = m.n
    if not is_derangement(d0):
        raise ValueError("phase 1 needs a derangement")
    if value(m, d0) >= INF:
        raise Infeasible("initial derangement uses a missing arc")
    lb = log_budget(n)
    trial_budget = lb if trial_budget is None else trial_budget
    start_budget = lb if start_budget is None else start_budget
    if state is None:
        state = SolverState(matrix=m, current=d0, min_idx=min_index(m))
    mi = state.min_idx or min_index(m)
    state.min_idx = mi
    if not state.history:
        state.record(d0, None, 1)
    rnd = 0
    while True:
        rnd += 1
        D = state.current
        d = D.zero_based()
        dinv = inverse(D).zero_based()
        r = reduce(m, D, mi)
        diff = diff_vector(m, D, mi)
        starts = sorted((dv, a) for a, dv in enumerate(diff) if dv < 0)[:start_budget]
        chosen: Move | None = None
        for dv, a in starts:
            trace.emit("phase1-start", round=rnd, start=a + 1, diff=dv)
            found = []
            for t in range(1, trial_budget + 1):
                walk = _trial_walk(r, d, dinv, mi, a, t)
                if walk is None:
                    break
                path, sums, repeat = walk
                cands = _trial_candidates(r, D, path, sums, repeat, f"r{rnd}.s{a + 1}.t{t}")
                trace.emit(
                    "phase1-trial",
                    round=rnd,
                    start=a + 1,
                    trial=t,
                    path=[v + 1 for v in path] + ([path[repeat[0]] + 1] if repeat else []),
                    sums=sums[1:],
                    candidates=[str(c) for c in cands],
                )
                state.candidate_bag.extend(cands)
                found.extend(c for c in cands if c.value < 0)
            if found:
                chosen = min(found, key=Move.rank)
                break
        if chosen is None:
            break
        new = chosen.apply()
        before = value(m, D)
        state.record(new, chosen, 1)
        after = state.history[-1].value
        if after != before + chosen.value:
            raise AssertionError("cost correspondence violated")
        trace.emit("phase1-apply", round=rnd, move=str(chosen), value=after, perm=format_cycles(new))
        state.phase1_rounds.append({"round": rnd, "applied": str(chosen), "value": after, "perm": format_cycles(new)})
    return state


# ---------------------------------------------------------------------------
# Phase 2
# ---------------------------------------------------------------------------


def phase2(m: CostMatrix, state: SolverState, trace: Trace = NULL, verify: bool = True) -> SolverState:
    """Cancel negative cycles of the reduced matrix until none is left.

    The column search is tried first. If it reports nothing, a classic
    Floyd-Warshall pass double-checks the reduction (``verify``); a cycle it
    finds is applied as well and the disagreement is noted.
    """
    mi = state.min_idx or min_index(m)
    state.min_idx = mi
    if not state.history:
        state.record(state.current, None, 2)
    while True:
        D = state.current
        r = reduce(m, D, mi)
        res = nvs_search(r, mi, trace=trace)
        if isinstance(res, NoneFound):
            if not verify:
                break
            chk = classic_apsp(r)
            if not isinstance(chk, NegativeCycleFound):
                break
            cyc = chk.cycle
            msg = f"column search missed negative cycle {cyc} over {format_cycles(D)}"
            state.notes.append(msg)
            trace.emit("phase2-oracle-fallback", cycle=list(cyc.vertices), value=cyc.value, perm=format_cycles(D))
        else:
            cyc = res
        move = Move((cyc,), D, "phase2")
        state.candidate_bag.append(move)
        state.record(move.apply(), move, 2)
        trace.emit("phase2-apply", move=str(move), value=state.history[-1].value, perm=format_cycles(state.current))
    state.ap = (state.current, value(m, state.current))
    return state


# ---------------------------------------------------------------------------
# Phase 3
# ---------------------------------------------------------------------------


def disjoint_products(
    bag: Sequence[Move | CycleCandidate],
    sigma: Permutation,
    m: CostMatrix,
    cap: int | None = None,
) -> Iterator[tuple[Permutation, int]]:
    """Tours ``sigma * product`` over vertex-disjoint subsets of ``bag``.

    Only items whose base is ``sigma`` take part; subsets hold at most
    ``cap`` items (default the rounded log of n). Values are exact:
    value(sigma) plus the reduced values of the chosen items.
    """
    n = sigma.n
    cap = log_budget(n) if cap is None else cap
    items = []
    seen = set()
    for it in bag:
        mv = it if isinstance(it, Move) else Move((it,), it.base if it.base is not None else sigma)
        if mv.base != sigma or mv.key() in seen:
            continue
        seen.add(mv.key())
        items.append(mv)
    if not items:
        return
    base_val = value(m, sigma)
    if base_val >= INF:
        return
    emitted = set()
    for size in range(1, cap + 1):
        for combo in combinations(items, size):
            verts = [mv.vertices for mv in combo]
            if sum(len(v) for v in verts) != len(frozenset().union(*verts)):
                continue
            key = tuple(sorted(k for mv in combo for k in mv.key()))
            if key in emitted:
                continue
            emitted.add(key)
            cycles = [c.vertices for mv in combo for c in mv.cycles]
            tour = compose(sigma, Permutation.from_cycles(cycles, n))
            if is_n_cycle(tour):
                yield tour, base_val + sum(mv.value for mv in combo)


@dataclass
class Phase3Result:
    tour: Permutation
    value: int
    certified: bool
    sigma1: tuple[Permutation, int]
    bounds: list[int]
    method: str
    restarts_used: int = 0
    step3a_cycles: int = 0
    ctree_cycles: int = 0


def _harvest(m: CostMatrix, state: SolverState, include_d0: bool) -> None:
    hist = state.history if include_d0 else state.history[1:]
    for h in hist:
        state.offer_tour(h.perm, h.value)
    bases = []
    for mv in state.candidate_bag:
        if mv.base not in bases:
            bases.append(mv.base)
    for base in bases:
        for tour, v in disjoint_products(state.candidate_bag, base, m):
            state.offer_tour(tour, v)


def _restart(m: CostMatrix, seed: int, mi: MinIndex):
    d0 = random_n_cycle(m.n, seed)
    if value(m, d0) >= INF:
        return None
    st = SolverState(matrix=m, current=d0, min_idx=mi)
    phase1(m, d0, state=st)
    _harvest(m, st, include_d0=True)
    return st.best_tour


def _thread_count() -> int:
    raw = os.environ.get("CYCLECANCEL_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


def _run_restarts(m: CostMatrix, state: SolverState, seed: int, budget: int) -> int:
    seeds = [seed + 1 + k for k in range(budget)]
    workers = min(_thread_count(), max(1, budget))
    if workers == 1:
        results = [_restart(m, s, state.min_idx) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _restart(m, s, state.min_idx), seeds))
    # deterministic merge: lowest value, then lowest seed
    best = None
    for s, res in zip(seeds, results):
        if res is not None and (best is None or (res[1], s) < (best[1][1], best[0])):
            best = (s, res)
    if best is not None:
        state.offer_tour(*best[1])
    return budget


def _products_with(new: CycleCandidate, pool: list[CycleCandidate], cap: int):
    """Disjoint sets from ``pool`` that, together with ``new``, have at most ``cap`` cycles."""
    nv = set(new.vertices)
    others = [c for c in pool if nv.isdisjoint(c.vertices)]
    yield (new,)
    for size in range(1, cap):
        for combo in combinations(others, size):
            vs = [v for c in combo for v in c.vertices]
            if len(vs) == len(set(vs)):
                yield (new,) + combo


def _subset_search(m, sigma, ap_value, cycles, bound, state, max_nodes):
    """Exact search over vertex-disjoint cycle sets of total value < bound.

    Every tour cheaper than ``ap_value + bound`` is ``sigma`` times such a set
    (all cycles are non-negative over an optimal assignment). Returns
    (completed, improved).
    """
    n = m.n
    cyc = sorted(cycles, key=lambda c: (c.value, c.canonical()))
    vals = [c.value for c in cyc]
    nodes = 0
    improved = False
    bound_ref = [bound]
    used = [False] * (n + 1)
    chosen: list[CycleCandidate] = []

    def rec(start, total):
        nonlocal nodes, improved
        if chosen:
            tour = compose(sigma, Permutation.from_cycles([c.vertices for c in chosen], n))
            if is_n_cycle(tour):
                v = ap_value + total
                if state.offer_tour(tour, v):
                    improved = True
                    bound_ref[0] = min(bound_ref[0], v - ap_value)
                    state.bounds.append(bound_ref[0])
        for k in range(start, len(cyc)):
            if total + vals[k] >= bound_ref[0]:
                break
            c = cyc[k]
            if any(used[v] for v in c.vertices):
                continue
            nodes += 1
            if nodes > max_nodes:
                return False
            for v in c.vertices:
                used[v] = True
            chosen.append(c)
            ok = rec(k + 1, total + vals[k])
            chosen.pop()
            for v in c.vertices:
                used[v] = False
            if ok is False:
                return False
        return True

    done = rec(0, 0)
    return done is not False, improved


def phase3(
    m: CostMatrix,
    state: SolverState,
    restart_budget: int | None = None,
    seed: int = 0,
    trace: Trace = NULL,
    ctree_nodes: int | None = None,
    subset_nodes: int = DEFAULT_SUBSET_NODES,
) -> Phase3Result:
    """Harvest a first tour, then narrow the gap to the assignment bound.

    (a) tours among the derangements seen after the start and among products
        of bagged cycles with the permutation they were found over; if none,
        ``restart_budget`` Phase-1 passes from seeded random n-cycles (the
        starting tour is always a fallback);
    (b) bounded cycle search over the optimal assignment with bound
        m = tour - assignment, lowered whenever a cheaper tour shows up;
    (c) if (b) found no cycle at all the tour is certified; otherwise an
        exhaustive c-tree search at the final bound plus an exact search over
        disjoint cycle sets decides it.
    """
    n = m.n
    if state.ap is None:
        raise ValueError("phase3 needs the optimal assignment from phase2")
    sigma, ap_value = state.ap
    lb = log_budget(n)
    restart_budget = n * lb if restart_budget is None else restart_budget
    mi = state.min_idx or min_index(m)

    _harvest(m, state, include_d0=False)
    restarts = 0
    if state.best_tour is None:
        restarts = _run_restarts(m, state, seed, restart_budget)
    # the starting derangement only decides restarts by its absence above; it
    # always competes as a tour (it may itself be the assignment optimum)
    if state.history:
        state.offer_tour(state.history[0].perm, state.history[0].value)
    if state.best_tour is None:
        raise Infeasible("no finite tour found")
    sigma1 = state.best_tour
    trace.emit("phase3-tour", tour=format_cycles(sigma1[0]), value=sigma1[1], restarts=restarts)

    bound = sigma1[1] - ap_value
    state.bounds.append(bound)
    trace.emit("phase3-bound", bound=bound, step="3a")
    if bound <= 0:
        trace.emit("phase3-certificate", certified=True, reason="tour equals assignment bound")
        return Phase3Result(sigma1[0], sigma1[1], True, sigma1, list(state.bounds), "assignment-bound", restarts)

    r = reduce(m, sigma, mi)
    pool: list[CycleCandidate] = []

    def on_cycle(c: CycleCandidate):
        for combo in _products_with(c, pool, lb):
            tour = compose(sigma, Permutation.from_cycles([x.vertices for x in combo], n))
            if is_n_cycle(tour):
                state.offer_tour(tour, ap_value + sum(x.value for x in combo))
        pool.append(c)
        nb = state.best_tour[1] - ap_value
        if nb < state.bounds[-1]:
            state.bounds.append(nb)
            trace.emit("phase3-bound", bound=nb, step="3a")
            return nb
        return None

    found = nnvs_search(r, bound, mi, callback=on_cycle, trace=trace)
    n3a = len(found)
    if n3a == 0:
        tour, v = state.best_tour
        trace.emit("phase3-certificate", certified=True, reason="step 3a found no cycle")
        return Phase3Result(tour, v, True, sigma1, list(state.bounds), "step3a-empty", restarts, 0)

    m_star = state.best_tour[1] - ap_value
    if m_star <= 0:
        tour, v = state.best_tour
        trace.emit("phase3-certificate", certified=True, reason="tour equals assignment bound")
        return Phase3Result(tour, v, True, sigma1, list(state.bounds), "assignment-bound", restarts, n3a)

    kw = {} if ctree_nodes is None else {"max_nodes": ctree_nodes}
    trees = ctree_search(r, m_star, **kw)
    done, _ = _subset_search(m, sigma, ap_value, list(trees), m_star, state, subset_nodes)
    certified = done and not trees.truncated
    tour, v = state.best_tour
    trace.emit(
        "phase3-certificate",
        certified=certified,
        reason="exhaustive c-tree search" if certified else "search budget exhausted",
        ctree_cycles=len(trees),
    )
    return Phase3Result(tour, v, certified, sigma1, list(state.bounds), "ctree", restarts, n3a, len(trees))


# ---------------------------------------------------------------------------
# End to end
# ---------------------------------------------------------------------------


@dataclass
class SolveReport:
    instance_hash: str
    n: int
    seed: int
    initial: Permutation
    initial_value: int
    phase1_rounds: list[dict]
    phase1_value: int
    phase2_cycles: list[str]
    ap: Permutation
    ap_value: int
    sigma1: Permutation
    sigma1_value: int
    bounds: list[int]
    tour: Permutation
    tour_value: int
    certified: bool
    method: str
    restarts: int
    notes: list[str]
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self, timings: bool = False) -> dict:
        out = {
            "instance_hash": self.instance_hash,
            "n": self.n,
            "seed": self.seed,
            "initial": format_cycles(self.initial),
            "initial_value": self.initial_value,
            "phase1": {"rounds": self.phase1_rounds, "value": self.phase1_value},
            "phase2": {"cycles": self.phase2_cycles},
            "ap": format_cycles(self.ap),
            "ap_value": self.ap_value,
            "sigma1": format_cycles(self.sigma1),
            "sigma1_value": self.sigma1_value,
            "bounds": self.bounds,
            "tour": format_cycles(self.tour),
            "tour_row_form": list(self.tour.image),
            "tour_value": self.tour_value,
            "certified": self.certified,
            "certificate": self.method,
            "restarts": self.restarts,
            "notes": self.notes,
        }
        if timings:
            out["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return out


def _first_finite_cycle(m: CostMatrix, seed: int, tries: int) -> tuple[Permutation, int]:
    for k in range(max(1, tries)):
        d0 = random_n_cycle(m.n, seed + k)
        if value(m, d0) < INF:
            return d0, seed + k
    raise Infeasible(f"no finite random n-cycle within {tries} draws")


def solve(
    m: CostMatrix,
    seed: int = 0,
    restarts: int | None = None,
    initial: Permutation | None = None,
    trace: Trace = NULL,
) -> SolveReport:
    n = m.n
    if n < 2:
        raise Infeasible("no derangement exists on fewer than two points")
    budget = n * log_budget(n) if restarts is None else restarts
    t0 = time.perf_counter()
    if initial is None:
        d0, used_seed = _first_finite_cycle(m, seed, budget + 1)
    else:
        d0, used_seed = initial, seed
        if value(m, d0) >= INF:
            raise Infeasible("initial permutation uses a missing arc")
    state = SolverState(matrix=m, current=d0, min_idx=min_index(m))
    phase1(m, d0, trace=trace, state=state)
    t1 = time.perf_counter()
    p1_len = len(state.history)
    phase2(m, state, trace=trace)
    t2 = time.perf_counter()
    res = phase3(m, state, restart_budget=budget, seed=used_seed, trace=trace)
    t3 = time.perf_counter()
    return SolveReport(
        instance_hash=instance_hash(m),
        n=n,
        seed=seed,
        initial=d0,
        initial_value=state.history[0].value,
        phase1_rounds=state.phase1_rounds,
        phase1_value=state.history[p1_len - 1].value,
        phase2_cycles=[str(h.applied) for h in state.history[p1_len:]],
        ap=state.ap[0],
        ap_value=state.ap[1],
        sigma1=res.sigma1[0],
        sigma1_value=res.sigma1[1],
        bounds=res.bounds,
        tour=res.tour,
        tour_value=res.value,
        certified=res.certified,
        method=res.method,
        restarts=res.restarts_used,
        notes=list(state.notes),
        timings={"phase1": t1 - t0, "phase2": t2 - t1, "phase3": t3 - t2},
    )
