"""Turn an irreversible strategy into a spooky one.

The front replays the irreversible moves, ghosting instead of unpebbling.
It ends with the roots pebbled and every other vertex ghosted.  The cleanup
then clears those ghosts one vertex at a time.  It goes in reverse order of
first pebbling.  For each vertex it replays the part of the irreversible
strategy that first pebbles it, restricted to its ancestors.  That replay
turns the ghost back into a pebble, which is then removed.
"""

from __future__ import annotations

from typing import AbstractSet, Iterable, Sequence

from .dag import Dag
from .game import Move, MoveKind, Semantics, Strategy, replay, validate

__all__ = [
    "first_pebbling",
    "irrev_to_spooky",
    "irrev_to_spooky_cleanup",
    "irrev_to_spooky_front",
    "project",
]


def _check_irreversible(dag: Dag, irrev: Sequence[Move], complete: bool) -> None:
    # raises IllegalMove / IncompleteStrategy
    validate(dag, irrev, Semantics.IRREVERSIBLE, complete=complete)


def _front_moves(irrev: Iterable[Move], ghosts: set[int]) -> Strategy:
    """Apply the front rules, tracking the ghost set in place."""
    out: Strategy = []
    for mv in irrev:
        v = mv.vertex
        if mv.kind is MoveKind.PEBBLE:
            if v in ghosts:
                ghosts.discard(v)
                out.append(Move.unghost(v))
            else:
                out.append(Move.pebble(v))
        elif mv.kind is MoveKind.UNPEBBLE:
            ghosts.add(v)
            out.append(Move.ghost(v))
        else:
            raise ValueError(f"{mv} is not an irreversible move")
    return out


def irrev_to_spooky_front(dag: Dag, irrev: Sequence[Move], start_ghosts: AbstractSet[int] = frozenset()) -> Strategy:
    """Spooky sub-strategy from ``(∅, start_ghosts)`` with the same pebble
    configurations as ``irrev``: unpebblings become ghostings and pebbling a
    ghosted vertex becomes an unghosting."""
    _check_irreversible(dag, irrev, complete=False)
    return _front_moves(irrev, set(start_ghosts))


def first_pebbling(irrev: Sequence[Move]) -> dict[int, int]:
    """Index of the first pebble move of every vertex that is ever pebbled."""
    first: dict[int, int] = {}
    for i, mv in enumerate(irrev):
        if mv.kind is MoveKind.PEBBLE:
            first.setdefault(mv.vertex, i)
    return first


def project(irrev: Sequence[Move], vertices: AbstractSet[int], upto: int | None = None) -> Strategy:
    """Moves of ``irrev[:upto+1]`` whose vertex lies in ``vertices``."""
    prefix = irrev if upto is None else irrev[: upto + 1]
    return [mv for mv in prefix if mv.vertex in vertices]


def irrev_to_spooky_cleanup(dag: Dag, irrev: Sequence[Move], keep: AbstractSet[int]) -> Strategy:
    """Spooky sub-strategy from ``(keep, V∖keep)`` to ``(keep, ∅)``.

    ``irrev`` must be a complete irreversible strategy and ``keep`` a subset
    of the roots.  Each vertex outside ``keep`` costs at most ``T + 1``
    moves, and at most ``C + |keep|`` pebbles are in use at any time.
    """
    _check_irreversible(dag, irrev, complete=True)
    keep = frozenset(keep)
    if not keep <= dag.roots:
        raise ValueError(f"kept vertices {sorted(keep - dag.roots)} are not roots")
    first = first_pebbling(irrev)
    ghosts = set(dag.vertices) - keep
    out: Strategy = []
    for v in sorted(ghosts, key=first.__getitem__, reverse=True):
        cone = dag.ancestors(v) | {v}
        # Every vertex of the cone other than v was first pebbled before v,
        # so none has been cleared yet and all are still ghosts here.
        prefix = project(irrev, cone, first[v])
        out += _front_moves(prefix, ghosts)
        out.append(Move.unpebble(v))
        pebbled = replay(dag, prefix, Semantics.IRREVERSIBLE)[-1].pebbled - {v}
        for u in sorted(pebbled):
            ghosts.add(u)
            out.append(Move.ghost(u))
    return out


def irrev_to_spooky(dag: Dag, irrev: Sequence[Move]) -> Strategy:
    """Complete spooky strategy with pebble cost at most ``C + m`` and time at
    most ``T + (T + 1)(|V| - m)``, where ``m`` is the number of roots."""
    _check_irreversible(dag, irrev, complete=True)
    return irrev_to_spooky_front(dag, irrev) + irrev_to_spooky_cleanup(dag, irrev, dag.roots)
