"""Command-line front end: ``solve``, ``pareto``, ``validate``, ``oracle``, ``gen``.

Solver limits can also come from the environment (``SPOOKY_T_WAIT``,
``SPOOKY_T_MAX``, ``SPOOKY_T_SKIP``, ``SPOOKY_SEED``, ``SPOOKY_REPEATS``,
``SPOOKY_OPTIMIZER_RUNS``).  They replace the built-in defaults, and an
explicit flag still wins.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterator, Sequence, TextIO

from .dag import (
    Dag,
    DagError,
    diamond_gadget,
    diamond_gadget_strategy,
    format_dag,
    line_graph,
    line_graph_strategy,
    parse_dag,
    random_dag,
)
from .game import IllegalMove, IncompleteStrategy, Semantics, Strategy, format_strategy, parse_strategy, validate
from .optimize import InterleavingStuck, TrailEntry, optimize_fixpoint, sequentialize
from .oracle import OracleCapExceeded, min_pebbles, min_strategy
from .solve import BackendError, SolveLimits, solve_spooky

log = logging.getLogger("spooky_pebble")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_EXHAUSTED = 3

LARGE_PRESET = {"t_wait": 60.0, "t_max": 480.0}


@dataclass
class ParetoPoint:
    pebbles: int
    ghosts: int
    time: int
    provenance: str  # "raw-sat" | "optimized"
    seed: int
    wall_time: float
    P: int
    S: int
    strategy: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self))


CSV_FIELDS = ["pebbles", "ghosts", "time", "provenance", "seed", "wall_time", "P", "S"]


def ghost_budgets(n: int) -> list[int]:
    """``n, ⌈n/5⌉, ⌈n/10⌉, ⌈n/20⌉, 0`` without repeats."""
    out: list[int] = []
    for s in (n, math.ceil(n / 5), math.ceil(n / 10), math.ceil(n / 20), 0):
        if s not in out:
            out.append(s)
    return out


def _env(name: str, cast: Callable, default):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise SystemExit(f"error: environment variable {name}={raw!r} is not a valid {cast.__name__}")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _load_dag(path: str) -> Dag:
    return parse_dag(_read(path))


def _limits(args: argparse.Namespace, seed: int | None = None) -> SolveLimits:
    t_wait, t_max = args.t_wait, args.t_max
    if args.large:
        t_wait = t_wait if args.t_wait_set else LARGE_PRESET["t_wait"]
        t_max = t_max if args.t_max_set else LARGE_PRESET["t_max"]
    return SolveLimits(
        t_wait=min(t_wait, t_max),
        t_max=t_max,
        t_skip=args.t_skip,
        seed=args.seed if seed is None else seed,
        max_horizon=args.max_horizon,
    )


def _sequentialize(dag: Dag, trace, P: int, S: int) -> Strategy:
    try:
        return sequentialize(dag, trace, P, S, strict=True)
    except InterleavingStuck as exc:
        log.warning("%s; linearizing with a paired ghost/unghost", exc)
        return sequentialize(dag, trace, P, S, strict=False)


def _point(dag: Dag, strat: Strategy, provenance: str, seed: int, wall: float, P: int, S: int) -> ParetoPoint:
    cost = validate(dag, strat, Semantics.SPOOKY)
    return ParetoPoint(
        pebbles=cost.pebbles,
        ghosts=cost.ghosts,
        time=cost.time,
        provenance=provenance,
        seed=seed,
        wall_time=round(wall, 6),
        P=P,
        S=S,
        strategy=[f"{m.kind.value} {dag.labels[m.vertex]}" for m in strat],
    )


def _best_key(p: ParetoPoint) -> tuple[int, int, int]:
    return (p.pebbles, p.ghosts, p.time)


def solve_cell(
    dag: Dag,
    P: int,
    S: int,
    limits: SolveLimits,
    optimize: bool,
    optimizer_runs: int,
) -> list[ParetoPoint] | None:
    """Solve one ``(P, S, seed)`` cell.  Returns the raw point followed by
    every distinct strategy seen while optimizing, or None if unsolved."""
    t0 = time.monotonic()
    outcome = solve_spooky(dag, P, S, limits)
    if not outcome.solved:
        return None
    raw = _sequentialize(dag, outcome.trace, outcome.P, outcome.S)
    points = [_point(dag, raw, "raw-sat", limits.seed, time.monotonic() - t0, P, S)]
    if optimize:
        seen = {tuple(raw)}
        for run in range(optimizer_runs):
            trail: list[TrailEntry] = []
            optimize_fixpoint(dag, raw, P, order_seed=limits.seed + run, trail=trail)
            for entry in trail:
                if entry.strategy in seen:
                    continue
                seen.add(entry.strategy)
                points.append(_point(dag, list(entry.strategy), "optimized", limits.seed, time.monotonic() - t0, P, S))
    return points


def pareto_sweep(
    dag: Dag,
    limits: SolveLimits,
    repeats: int,
    step: int = 5,
    optimize: bool = True,
    optimizer_runs: int = 5,
) -> Iterator[ParetoPoint]:
    """Budget sweep: for each ghost budget, solve with all pebbles, then lower
    the pebble budget from the best cost found in steps of ``step`` until
    every repeat fails.  Repeat ``r`` uses seed ``limits.seed + r``."""
    n = dag.n

    def cell(P: int, S: int) -> list[list[ParetoPoint]]:
        found = []
        for r in range(repeats):
            lim = SolveLimits(limits.t_wait, limits.t_max, limits.t_skip, limits.seed + r, limits.max_horizon)
            pts = solve_cell(dag, P, S, lim, optimize, optimizer_runs)
            if pts is None:
                log.info("P=%d S=%d seed=%d: no solution", P, S, lim.seed)
            else:
                found.append(pts)
        return found

    for S in ghost_budgets(n):
        first = cell(n, S)
        if not first:
            log.info("S=%d: no solution with all %d pebbles", S, n)
            continue
        pb = n
        for pts in first:
            yield from pts
            pb = min([pb] + [p.pebbles for p in pts])
        P = pb
        while P >= 1:
            found = cell(P, S)
            if not found:
                break
            for pts in found:
                yield from pts
            P -= step


def _write_points(points: Sequence[ParetoPoint], out: TextIO, csv_path: str | None) -> None:
    for p in points:
        out.write(p.to_json() + "\n")
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, extrasaction="ignore")
            writer.writeheader()
            for p in points:
                writer.writerow(asdict(p))


def cmd_solve(args: argparse.Namespace) -> int:
    dag = _load_dag(args.dag)
    P = dag.n if args.pebbles is None else args.pebbles
    points = solve_cell(dag, P, args.ghosts, _limits(args), args.optimize, args.optimizer_runs)
    if points is None:
        print(f"error: budget exhausted without a solution for P={P}, S={args.ghosts}", file=sys.stderr)
        return EXIT_EXHAUSTED
    best = min(points, key=_best_key)
    text = "".join(line + "\n" for line in best.strategy)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.points:
        with open(args.points, "w") as fh:
            _write_points(points, fh, args.csv)
    print(
        json.dumps({"pebbles": best.pebbles, "ghosts": best.ghosts, "time": best.time, "provenance": best.provenance}),
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_pareto(args: argparse.Namespace) -> int:
    dag = _load_dag(args.dag)
    points = list(
        pareto_sweep(
            dag,
            _limits(args),
            repeats=args.repeats,
            step=args.step,
            optimize=args.optimize,
            optimizer_runs=args.optimizer_runs,
        )
    )
    if args.out:
        with open(args.out, "w") as fh:
            _write_points(points, fh, args.csv)
    else:
        _write_points(points, sys.stdout, args.csv)
    if not points:
        print("error: budget exhausted, no solution at any ghost budget", file=sys.stderr)
        return EXIT_EXHAUSTED
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    dag = _load_dag(args.dag)
    strat = parse_strategy(_read(args.strategy), dag)
    try:
        cost = validate(dag, strat, args.semantics, complete=not args.partial)
    except (IllegalMove, IncompleteStrategy) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(cost.to_json())
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    dag = _load_dag(args.dag)
    result: dict = {"semantics": args.semantics, "ghosts": args.ghosts}
    if args.pebbles is None:
        result["min_pebbles"] = min_pebbles(dag, args.semantics, args.ghosts, cap=args.cap)
        P = result["min_pebbles"]
    else:
        P = args.pebbles
    strat = min_strategy(dag, args.semantics, P, args.ghosts, cap=args.cap)
    result["pebbles"] = P
    result["min_time"] = None if strat is None else len(strat)
    print(json.dumps(result))
    if strat is not None and args.strategy_out:
        with open(args.strategy_out, "w") as fh:
            fh.write(format_strategy(strat, dag))
    return EXIT_OK if strat is not None else EXIT_INVALID


def cmd_gen(args: argparse.Namespace) -> int:
    if args.family == "line":
        dag, strat = line_graph(args.size), line_graph_strategy(args.size)
    elif args.family == "diamond":
        dag, strat = diamond_gadget(args.size), diamond_gadget_strategy(args.size)
    else:
        dag, strat = random_dag(args.size, args.density, args.seed), None
    sys.stdout.write(format_dag(dag))
    if args.strategy_out:
        if strat is None:
            print("error: random DAGs come without a reference strategy", file=sys.stderr)
            return EXIT_INVALID
        with open(args.strategy_out, "w") as fh:
            fh.write(format_strategy(strat, dag))
    return EXIT_OK


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("dag", help="edge-list file ('-' for stdin)")
    p.add_argument("--t-wait", type=float, default=None, help="seconds per SAT call (default 15)")
    p.add_argument("--t-max", type=float, default=None, help="seconds per solve (default 120)")
    p.add_argument("--t-skip", type=_positive_int, default=_env("SPOOKY_T_SKIP", int, 5),
                   help="horizon increase after a timed-out call")
    p.add_argument("--max-horizon", type=_nonneg_int, default=None, help="stop deepening past this horizon")
    p.add_argument("--large", action="store_true", help="use t_wait=60s, t_max=480s")
    p.add_argument("--seed", type=int, default=_env("SPOOKY_SEED", int, 0))
    p.add_argument("--optimize", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--optimizer-runs", type=_positive_int, default=_env("SPOOKY_OPTIMIZER_RUNS", int, 5),
                   help="seed-permuted optimizer runs per solution")
    p.add_argument("--csv", help="also write points as CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spooky-pebble", description="Spooky pebble game solver and tools")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="find a strategy within pebble/ghost budgets")
    _add_solver_flags(p)
    p.add_argument("-P", "--pebbles", type=_nonneg_int, default=None, help="pebble budget (default |V|)")
    p.add_argument("-S", "--ghosts", type=_nonneg_int, default=0, help="ghost budget")
    p.add_argument("-o", "--out", help="strategy output file (default stdout)")
    p.add_argument("--points", help="write all found points as JSON lines")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("pareto", help="sweep pebble and ghost budgets")
    _add_solver_flags(p)
    p.add_argument("--repeats", type=_positive_int, default=_env("SPOOKY_REPEATS", int, 3))
    p.add_argument("--step", type=_positive_int, default=5, help="pebble budget decrement")
    p.add_argument("-o", "--out", help="JSON-lines output (default stdout)")
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("validate", help="replay a strategy and report its costs")
    p.add_argument("dag")
    p.add_argument("strategy")
    p.add_argument("--semantics", choices=[s.value for s in Semantics], default="spooky")
    p.add_argument("--partial", action="store_true", help="do not require the final configuration")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", help="exhaustive search on small DAGs")
    p.add_argument("dag")
    p.add_argument("--semantics", choices=[s.value for s in Semantics], default="spooky")
    p.add_argument("-P", "--pebbles", type=_nonneg_int, default=None, help="fixed pebble budget; else minimize")
    p.add_argument("-S", "--ghosts", type=_nonneg_int, default=0)
    p.add_argument("--cap", type=_positive_int, default=10, help="largest DAG accepted")
    p.add_argument("--strategy-out", help="write a shortest strategy here")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="print a generated DAG")
    p.add_argument("family", choices=["line", "diamond", "random"])
    p.add_argument("size", type=_positive_int)
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy-out", help="write the family's reference irreversible strategy here")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    if hasattr(args, "t_wait"):
        args.t_wait_set = args.t_wait is not None
        args.t_max_set = args.t_max is not None
        if args.t_wait is None:
            args.t_wait = _env("SPOOKY_T_WAIT", float, 15.0)
        if args.t_max is None:
            args.t_max = _env("SPOOKY_T_MAX", float, 120.0)
    try:
        return args.func(args)
    except (DagError, OSError, ValueError, OracleCapExceeded, BackendError) as exc:
        # ValueError covers malformed strategy files and inconsistent limits
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
