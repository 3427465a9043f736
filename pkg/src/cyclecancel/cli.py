"""Command-line front end.

Exit codes: 0 success, 1 usage or input-format error, 2 infeasible instance
or an error raised by the solver modules.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from typing import Sequence

import numpy as np

from cyclecancel import detvertex, fixtures, fw, oracle
from cyclecancel.kernels import INF
from cyclecancel.matrix import CostMatrix, MatrixFormatError, dumps, load, loads, reduce
from cyclecancel.perm import Permutation, format_cycles, format_row_form, parse_cycles, random_n_cycle
from cyclecancel.phases import Infeasible, log_budget, solve
from cyclecancel.trace import Trace

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAIL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _read_matrix(source: str) -> CostMatrix:
    if os.path.exists(source):
        return load(source)
    name = os.path.basename(source)
    name = name[:-4] if name.endswith(".mat") else name
    if name in fixtures.NAMES:
        return fixtures.load_fixture(name)
    raise UsageError(f"no such matrix file: {source}")


def _read_perm(text: str | None, n: int, seed: int) -> Permutation:
    if text is None:
        return random_n_cycle(n, seed)
    text = text.strip()
    if text.startswith("("):
        return parse_cycles(text, n)
    return Permutation(int(t) for t in text.replace(",", " ").split())


@contextlib.contextmanager
def _trace_for(args):
    path = getattr(args, "trace", None)
    if not path:
        yield Trace(None, snapshots=False) if getattr(args, "collect", False) else None
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        yield Trace(fh, snapshots=getattr(args, "snapshots", False))


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    m = _read_matrix(args.matrix)
    initial = _read_perm(args.initial, m.n, args.seed) if args.initial else None
    with _trace_for(args) as tr:
        kw = {"trace": tr} if tr is not None else {}
        rep = solve(m, seed=args.seed, restarts=args.restarts, initial=initial, **kw)
    if args.json:
        print(_dump_json(rep.to_dict(timings=args.timings)))
    elif args.pretty:
        print(f"instance {rep.instance_hash[:16]}  n={rep.n}  seed={rep.seed}")
        print(f"start       {format_cycles(rep.initial)} = {rep.initial_value}")
        for rd in rep.phase1_rounds:
            print(f"phase 1.{rd['round']:<3} {rd['applied']:<40} -> {rd['value']}")
        for c in rep.phase2_cycles:
            print(f"phase 2     {c}")
        print(f"assignment  {format_cycles(rep.ap)} = {rep.ap_value}")
        print(f"first tour  {format_cycles(rep.sigma1)} = {rep.sigma1_value}")
        print(f"bounds      {' > '.join(map(str, rep.bounds))}")
        print("tour (row form):")
        print(format_row_form(rep.tour))
        print(f"value       {rep.tour_value}")
        print(f"certified   {str(rep.certified).lower()} ({rep.method})")
    else:
        print(f"tour: {format_cycles(rep.tour)}")
        print(f"value: {rep.tour_value}")
        print(f"certified: {str(rep.certified).lower()}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def generate(n: int, seed: int, low: int, high: int) -> CostMatrix:
    if n < 2:
        raise UsageError("n must be at least 2")
    if low > high:
        raise UsageError(f"empty weight range [{low}, {high}]")
    rng = np.random.default_rng(seed)
    a = rng.integers(low, high, size=(n, n), endpoint=True, dtype=np.int64)
    np.fill_diagonal(a, INF)
    try:
        return CostMatrix(a)
    except MatrixFormatError as exc:
        raise UsageError(str(exc)) from None


def cmd_gen(args) -> int:
    m = generate(args.n, args.seed, args.low, args.high)
    text = f"# generated n={args.n} seed={args.seed} range=[{args.low},{args.high}]\n" + dumps(m)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# detvertex
# ---------------------------------------------------------------------------


def cmd_detvertex(args) -> int:
    w = args.weights
    if len(w) < 2:
        raise UsageError("need at least two weights")
    starts = detvertex.determining_vertices(w, args.bound)
    folded = detvertex.fold_procedure(w) if sum(w) < 0 else None
    show = args.start or (folded if folded is not None and detvertex.is_determining(w, folded, args.bound) else starts[0])
    if args.json:
        print(
            _dump_json(
                {
                    "total": sum(w),
                    "bound": args.bound,
                    "starts": starts,
                    "folded": folded,
                    "start": show,
                    "prefix_sums": detvertex.rotated_prefix_sums(w, show),
                }
            )
        )
        return EXIT_OK
    print(f"total: {sum(w)}  bound: {args.bound}")
    print("valid starts: " + " ".join(map(str, starts)))
    if folded is not None:
        print(f"folding: {folded}")
    print(f"start {show}:")
    print(detvertex.format_prefix_table(w, show))
    return EXIT_OK


# ---------------------------------------------------------------------------
# fw
# ---------------------------------------------------------------------------


def _cycle_dict(c: fw.CycleCandidate) -> dict:
    return {"cycle": list(c.vertices), "value": c.value, "source": c.source}


def cmd_fw(args) -> int:
    m = _read_matrix(args.matrix)
    variant = args.variant
    out: dict = {"variant": variant}
    with _trace_for(args) as tr:
        kw = {"trace": tr} if tr is not None else {}
        if variant == "classic":
            target = reduce(m, _read_perm(args.perm, m.n, args.seed)) if args.perm else m
            res = fw.classic_apsp(target)
            if isinstance(res, fw.NegativeCycleFound):
                out.update(negative_cycle=_cycle_dict(res.cycle), column=res.column)
                table = res.table
            else:
                out["negative_cycle"] = None
                table = res
            out["dist"] = [[None if x >= INF else int(x) for x in row] for row in table.dist]
        else:
            d = _read_perm(args.perm, m.n, args.seed)
            out["perm"] = format_cycles(d)
            r = reduce(m, d)
            if variant == "nvs":
                res = fw.nvs_search(r, **kw)
                out["cycle"] = _cycle_dict(res) if isinstance(res, fw.CycleCandidate) else None
                out["blocks"] = res.blocks
            else:
                if args.bound is None:
                    raise UsageError(f"--bound is required for {variant}")
                if variant == "nnvs":
                    res = fw.nnvs_search(r, args.bound, **kw)
                else:
                    res = fw.ctree_search(r, args.bound)
                    out["truncated"] = res.truncated
                out["cycles"] = [_cycle_dict(c) for c in res]
    if args.json:
        print(_dump_json(out))
        return EXIT_OK
    if variant == "classic":
        nc = out["negative_cycle"]
        if nc:
            print(f"negative cycle: ({' '.join(map(str, nc['cycle']))}) value {nc['value']} after column {out['column']}")
        else:
            print("no negative cycle")
        for i, row in enumerate(out["dist"], start=1):
            print(f"{i:>3} " + " ".join("inf" if x is None else str(x) for x in row))
    elif variant == "nvs":
        c = out["cycle"]
        print(f"negative cycle: ({' '.join(map(str, c['cycle']))}) value {c['value']}" if c else "none found")
    else:
        if not out["cycles"]:
            print(f"no cycle below {args.bound}")
        for c in out["cycles"]:
            print(f"({' '.join(map(str, c['cycle']))}) value {c['value']}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------


def cmd_oracle(args) -> int:
    m = _read_matrix(args.matrix)
    which = args.which
    if which == "brute-tsp":
        perm, val = oracle.brute_tsp(m)
        out = {"tour": format_cycles(Permutation(perm)), "value": val}
    elif which == "brute-ap":
        perm, val = oracle.brute_ap(m)
        out = {"assignment": format_cycles(Permutation(perm)), "value": val}
    elif which == "hungarian":
        perm, val = oracle.hungarian_ap(m)
        out = {"assignment": format_cycles(Permutation(perm)), "value": val}
    elif which == "bellman-ford":
        if not 1 <= args.source <= m.n:
            raise UsageError(f"source must be in 1..{m.n}")
        dist = oracle.bellman_ford(m, args.source)
        out = {"source": args.source, "dist": [None if x >= INF else x for x in dist]}
    else:
        if args.bound is None:
            raise UsageError("--bound is required for enumerate-cycles")
        r = reduce(m, _read_perm(args.perm, m.n, args.seed))
        out = {"cycles": [{"cycle": list(c), "value": v} for c, v in oracle.enumerate_cycles(r, args.bound)]}
    if args.json:
        print(_dump_json(out))
    else:
        for k, v in out.items():
            print(f"{k}: {v}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fixtures
# ---------------------------------------------------------------------------


def cmd_fixtures(args) -> int:
    if not args.name:
        for name in fixtures.NAMES:
            m = loads(fixtures.fixture_text(name))
            print(f"{name}  n={m.n}")
        return EXIT_OK
    text = fixtures.fixture_text(args.name)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cyclecancel", description="Assignment and tour search by negative cycle cancelling.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("solve", help="run all three phases on a matrix")
    s.add_argument("--matrix", required=True, help="matrix file (or a bundled fixture name: ex32, ex34, ex35)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--restarts", type=int, default=None, help="restart budget (default n * round(ln n))")
    s.add_argument("--initial", default=None, help='starting derangement, e.g. "(1 2 3 4 5 6 7 8)"')
    s.add_argument("--trace", default=None, help="write JSON-lines trace events here")
    s.add_argument("--snapshots", action="store_true", help="include table dumps in block-snapshot events")
    s.add_argument("--json", action="store_true")
    s.add_argument("--pretty", action="store_true", help="human-readable tables")
    s.add_argument("--timings", action="store_true", help="add wall times to the JSON report")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("gen", help="random instance with uniform integer weights")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--low", type=int, default=1)
    g.add_argument("--high", type=int, default=100)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("detvertex", help="determining vertices of a weighted cycle")
    d.add_argument("weights", type=int, nargs="+")
    d.add_argument("--bound", type=int, default=0)
    d.add_argument("--start", type=int, default=None, help="show the prefix table from this start")
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_detvertex)

    f = sub.add_parser("fw", help="Floyd-Warshall variants")
    f.add_argument("--matrix", required=True)
    f.add_argument("--variant", choices=["classic", "nvs", "nnvs", "ctree"], default="classic")
    f.add_argument("--bound", type=int, default=None)
    f.add_argument("--perm", default=None, help="derangement to reduce by (default: random n-cycle from --seed)")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--trace", default=None)
    f.add_argument("--snapshots", action="store_true")
    f.add_argument("--json", action="store_true")
    f.set_defaults(func=cmd_fw)

    o = sub.add_parser("oracle", help="independent reference solvers")
    o.add_argument("which", choices=["brute-tsp", "brute-ap", "hungarian", "bellman-ford", "enumerate-cycles"])
    o.add_argument("--matrix", required=True)
    o.add_argument("--source", type=int, default=1)
    o.add_argument("--bound", type=int, default=None)
    o.add_argument("--perm", default=None)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--json", action="store_true")
    o.set_defaults(func=cmd_oracle)

    x = sub.add_parser("fixtures", help="list or export bundled instances")
    x.add_argument("name", nargs="?", choices=list(fixtures.NAMES))
    x.add_argument("--out", default=None)
    x.set_defaults(func=cmd_fixtures)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, MatrixFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (Infeasible, oracle.InfeasibleInstance) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
