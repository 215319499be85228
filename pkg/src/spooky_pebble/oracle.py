"""Exhaustive breadth-first search over pebble-game configurations.

Only meant for small DAGs: states are pairs of bitmasks ``(pebbled, ghosted)``
so the spooky state space has up to ``3**n`` elements.
"""

from __future__ import annotations

from collections import deque

from .dag import Dag
from .game import Move, MoveKind, Semantics, Strategy

DEFAULT_CAP = 10


class OracleCapExceeded(ValueError):
    pass


def _check_cap(dag: Dag, cap: int) -> None:
    if dag.n > cap:
        raise OracleCapExceeded(f"DAG has {dag.n} vertices, oracle cap is {cap}")


def _successors(dag: Dag, pred_mask: list[int], state: tuple[int, int], semantics: Semantics, P: int, S: int):
    pm, sm = state
    np_, ns = pm.bit_count(), sm.bit_count()
    spooky = semantics is Semantics.SPOOKY
    for v in range(dag.n):
        bit = 1 << v
        ready = pred_mask[v] & pm == pred_mask[v]
        if pm & bit:
            if semantics is Semantics.IRREVERSIBLE or ready:
                yield Move(MoveKind.UNPEBBLE, v), (pm & ~bit, sm)
            if spooky and ns < S:
                yield Move(MoveKind.GHOST, v), (pm & ~bit, sm | bit)
        elif sm & bit:
            if ready and np_ < P:
                yield Move(MoveKind.UNGHOST, v), (pm | bit, sm & ~bit)
        elif ready and np_ < P:
            yield Move(MoveKind.PEBBLE, v), (pm | bit, sm)


def min_strategy(
    dag: Dag,
    semantics: Semantics | str,
    P: int,
    S: int = 0,
    cap: int = DEFAULT_CAP,
) -> Strategy | None:
    """A shortest complete sequential strategy within ``(P, S)``, or None."""
    semantics = Semantics(semantics)
    _check_cap(dag, cap)
    if semantics is not Semantics.SPOOKY:
        S = 0
    pred_mask = [sum(1 << u for u in dag.preds[v]) for v in dag.vertices]
    goal = (sum(1 << v for v in dag.roots), 0)
    start = (0, 0)
    parent: dict[tuple[int, int], tuple[tuple[int, int], Move] | None] = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        if state == goal:
            moves = []
            while parent[state] is not None:
                state, mv = parent[state]
                moves.append(mv)
            return moves[::-1]
        for mv, nxt in _successors(dag, pred_mask, state, semantics, P, S):
            if nxt not in parent:
                parent[nxt] = (state, mv)
                queue.append(nxt)
    return None


def min_time(dag: Dag, semantics: Semantics | str, P: int, S: int = 0, cap: int = DEFAULT_CAP) -> int | None:
    """Length of a shortest strategy within ``(P, S)``; None when unreachable."""
    strat = min_strategy(dag, semantics, P, S, cap)
    return None if strat is None else len(strat)


def min_pebbles(dag: Dag, semantics: Semantics | str, S: int = 0, cap: int = DEFAULT_CAP) -> int:
    """Least pebble budget for which ``(roots, {})`` is reachable."""
    _check_cap(dag, cap)
    if dag.n == 0:
        return 0
    lower = max(len(dag.preds[v]) + 1 for v in dag.vertices)
    for P in range(lower, dag.n + 1):
        if min_strategy(dag, semantics, P, S, cap) is not None:
            return P
    raise AssertionError("every DAG can be pebbled with |V| pebbles")
