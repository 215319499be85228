"""Pebble-game semantics: moves, configurations, validators and costs.

Three rule sets are supported.  Under every one of them ``pebble(v)`` needs
all direct predecessors of ``v`` pebbled.  ``unpebble(v)`` needs them too
except in the irreversible game.  The spooky game adds ``ghost(v)`` (turn a
pebble into a ghost) and ``unghost(v)`` (turn it back, predecessors needed).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .dag import Dag


class Semantics(str, enum.Enum):
    IRREVERSIBLE = "irreversible"
    REVERSIBLE = "reversible"
    SPOOKY = "spooky"


class MoveKind(str, enum.Enum):
    PEBBLE = "pebble"
    UNPEBBLE = "unpebble"
    GHOST = "ghost"
    UNGHOST = "unghost"


class Move(NamedTuple):
    kind: MoveKind
    vertex: int

    @classmethod
    def pebble(cls, v: int) -> Move:
        return cls(MoveKind.PEBBLE, v)

    @classmethod
    def unpebble(cls, v: int) -> Move:
        return cls(MoveKind.UNPEBBLE, v)

    @classmethod
    def ghost(cls, v: int) -> Move:
        return cls(MoveKind.GHOST, v)

    @classmethod
    def unghost(cls, v: int) -> Move:
        return cls(MoveKind.UNGHOST, v)

    def __str__(self) -> str:
        return f"{self.kind.value}({self.vertex})"


@dataclass(frozen=True)
class Configuration:
    pebbled: frozenset[int] = frozenset()
    ghosted: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "pebbled", frozenset(self.pebbled))
        object.__setattr__(self, "ghosted", frozenset(self.ghosted))
        if self.pebbled & self.ghosted:
            raise ValueError(f"vertices both pebbled and ghosted: {sorted(self.pebbled & self.ghosted)}")


EMPTY = Configuration()

# A sequential strategy is a list of moves; a parallel trace is a list of
# configurations (length T + 1).
Strategy = list[Move]
ParallelTrace = list[Configuration]


@dataclass(frozen=True)
class CostReport:
    pebbles: int
    ghosts: int
    time: int

    @property
    def triple(self) -> tuple[int, int, int]:
        """``(time, pebbles, ghosts)``."""
        return (self.time, self.pebbles, self.ghosts)

    def to_json(self) -> str:
        return json.dumps({"pebbles": self.pebbles, "ghosts": self.ghosts, "time": self.time})


class IllegalMove(ValueError):
    """A move whose preconditions fail.  ``reason`` is a short code such as
    ``predecessor-not-pebbled`` or ``vertex-not-pebbled``."""

    def __init__(self, move: Move, reason: str, index: int | None = None, dag: Dag | None = None):
        self.move = move
        self.reason = reason
        self.index = index
        name = dag.labels[move.vertex] if dag is not None and 0 <= move.vertex < dag.n else move.vertex
        where = f" at index {index}" if index is not None else ""
        super().__init__(f"illegal move {move.kind.value}({name}){where}: {reason}")


class IncompleteStrategy(ValueError):
    pass


class ClauseViolation(ValueError):
    def __init__(self, family: str, step: int, vertex: int | None, detail: str = ""):
        self.family = family
        self.step = step
        self.vertex = vertex
        msg = f"{family} violated at step {step}"
        if vertex is not None:
            msg += f" on vertex {vertex}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


def _preds_pebbled(dag: Dag, v: int, pebbled: frozenset[int] | set[int]) -> bool:
    return all(u in pebbled for u in dag.preds[v])


def apply_move(dag: Dag, cfg: Configuration, mv: Move, semantics: Semantics | str) -> Configuration:
    semantics = Semantics(semantics)
    v = mv.vertex
    if not 0 <= v < dag.n:
        raise IllegalMove(mv, "unknown-vertex")
    P, S = cfg.pebbled, cfg.ghosted
    kind = mv.kind

    if kind in (MoveKind.GHOST, MoveKind.UNGHOST) and semantics is not Semantics.SPOOKY:
        raise IllegalMove(mv, "ghost-in-wrong-semantics", dag=dag)

    if kind is MoveKind.PEBBLE:
        if v in P:
            raise IllegalMove(mv, "already-pebbled", dag=dag)
        if v in S:
            raise IllegalMove(mv, "vertex-ghosted", dag=dag)
        if not _preds_pebbled(dag, v, P):
            raise IllegalMove(mv, "predecessor-not-pebbled", dag=dag)
        return Configuration(P | {v}, S)

    if kind is MoveKind.UNPEBBLE:
        if v not in P:
            raise IllegalMove(mv, "vertex-not-pebbled", dag=dag)
        if semantics is not Semantics.IRREVERSIBLE and not _preds_pebbled(dag, v, P):
            raise IllegalMove(mv, "predecessor-not-pebbled", dag=dag)
        return Configuration(P - {v}, S)

    if kind is MoveKind.GHOST:
        if v not in P:
            raise IllegalMove(mv, "vertex-not-pebbled", dag=dag)
        return Configuration(P - {v}, S | {v})

    # unghost
    if v not in S:
        raise IllegalMove(mv, "vertex-not-ghosted", dag=dag)
    if not _preds_pebbled(dag, v, P):
        raise IllegalMove(mv, "predecessor-not-pebbled", dag=dag)
    return Configuration(P | {v}, S - {v})


def replay(
    dag: Dag,
    moves: Iterable[Move],
    semantics: Semantics | str = Semantics.SPOOKY,
    start: Configuration = EMPTY,
) -> list[Configuration]:
    """All configurations visited, ``start`` included.  Raises IllegalMove with
    the offending index."""
    cfgs = [start]
    for i, mv in enumerate(moves):
        try:
            cfgs.append(apply_move(dag, cfgs[-1], mv, semantics))
        except IllegalMove as exc:
            raise IllegalMove(mv, exc.reason, index=i, dag=dag) from None
    return cfgs


def final_configuration(dag: Dag) -> Configuration:
    return Configuration(dag.roots, frozenset())


def trace_costs(cfgs: Sequence[Configuration]) -> CostReport:
    return CostReport(
        pebbles=max((len(c.pebbled) for c in cfgs), default=0),
        ghosts=max((len(c.ghosted) for c in cfgs), default=0),
        time=max(len(cfgs) - 1, 0),
    )


def validate(
    dag: Dag,
    strat: Sequence[Move],
    semantics: Semantics | str = Semantics.SPOOKY,
    complete: bool = True,
    start: Configuration | None = None,
) -> CostReport:
    """Replay ``strat`` and return its exact costs.

    With ``complete`` set the strategy must start empty and end at
    ``(roots, {})``.  Otherwise it is checked as a sub-strategy from ``start``.
    """
    if start is None:
        start = EMPTY
    elif complete and start != EMPTY:
        raise ValueError("a complete strategy starts from the empty configuration")
    cfgs = replay(dag, strat, semantics, start)
    if complete and cfgs[-1] != final_configuration(dag):
        end = cfgs[-1]
        raise IncompleteStrategy(
            f"final configuration has pebbles {sorted(end.pebbled)} and ghosts {sorted(end.ghosted)}; "
            f"expected pebbles exactly on roots {sorted(dag.roots)} and no ghosts"
        )
    return trace_costs(cfgs)


def metrics_triple(dag: Dag, strat: Sequence[Move], semantics: Semantics | str = Semantics.SPOOKY) -> tuple[int, int, int]:
    """``(time, pebble_cost, ghost_cost)`` of a valid complete strategy."""
    return validate(dag, strat, semantics).triple


Pair = tuple[frozenset[int], frozenset[int]]


def _as_pair(cfg) -> Pair:
    if isinstance(cfg, Configuration):
        return cfg.pebbled, cfg.ghosted
    p, s = cfg
    return frozenset(p), frozenset(s)


def check_step(dag: Dag, before, after, step: int = 0) -> None:
    """Check one parallel step against the move-clause families M1..M4.

    ``before``/``after`` are configurations or raw ``(pebbled, ghosted)`` pairs.
    """
    P0, S0 = _as_pair(before)
    P1, S1 = _as_pair(after)
    stable = P0 & P1
    for v in sorted(P1 - P0):
        if not _preds_pebbled(dag, v, stable):
            raise ClauseViolation("M1", step, v, "pebbled without predecessors pebbled at both steps")
        if v in S1:
            raise ClauseViolation("M1", step, v, "pebbled while a ghost stays on it")
    for v in sorted(P0 - P1):
        if v not in S1 and not _preds_pebbled(dag, v, stable):
            raise ClauseViolation("M2", step, v, "unpebbled without predecessors and without ghosting")
    for v in sorted(S1 - S0):
        if v not in P0 or v in P1:
            raise ClauseViolation("M3", step, v, "ghost placed on a vertex that was not just unpebbled")
    for v in sorted(S0 - S1):
        # An unghosted vertex is also newly pebbled, so its inputs were
        # already checked under M1 above.
        if v not in P1:
            raise ClauseViolation("M4", step, v, "ghost removed without becoming a pebble")


def validate_parallel(
    dag: Dag,
    trace: Sequence,
    pebble_budget: int,
    ghost_budget: int,
    complete: bool = True,
) -> CostReport:
    """Check a parallel trace set-wise against the transition clauses, the
    cardinality bounds at every step and (if ``complete``) the boundary
    clauses.  Raises ClauseViolation naming family, step and vertex."""
    pairs = [_as_pair(c) for c in trace]
    if not pairs:
        raise ClauseViolation("I", 0, None, "empty trace")
    for t, (P, S) in enumerate(pairs):
        if len(P) > pebble_budget:
            raise ClauseViolation("C", t, None, f"{len(P)} pebbles exceed budget {pebble_budget}")
        if len(S) > ghost_budget:
            raise ClauseViolation("C", t, None, f"{len(S)} ghosts exceed budget {ghost_budget}")
    if complete:
        P, S = pairs[0]
        if P or S:
            raise ClauseViolation("I", 0, min(P | S), "initial configuration is not empty")
        P, S = pairs[-1]
        if P != dag.roots or S:
            raise ClauseViolation("F", len(pairs) - 1, min((P ^ dag.roots) | S), "final configuration is not (roots, {})")
    for t in range(len(pairs) - 1):
        check_step(dag, pairs[t], pairs[t + 1], t)
    return CostReport(
        pebbles=max(len(P) for P, _ in pairs),
        ghosts=max(len(S) for _, S in pairs),
        time=len(pairs) - 1,
    )


def to_parallel(dag: Dag, strat: Sequence[Move], start: Configuration = EMPTY) -> ParallelTrace:
    """One-move-per-step trace of a sequential strategy."""
    return replay(dag, strat, Semantics.SPOOKY, start)


def parse_strategy(text: str, dag: Dag) -> Strategy:
    moves = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected '<move> <label>', got {raw.strip()!r}")
        try:
            kind = MoveKind(parts[0].lower())
        except ValueError:
            raise ValueError(f"line {lineno}: unknown move {parts[0]!r}") from None
        try:
            moves.append(Move(kind, dag.index(parts[1])))
        except KeyError as exc:
            raise ValueError(f"line {lineno}: {exc.args[0]}") from None
    return moves


def format_strategy(strat: Iterable[Move], dag: Dag) -> str:
    return "".join(f"{m.kind.value} {dag.labels[m.vertex]}\n" for m in strat)
