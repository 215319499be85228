"""Sequentialization of parallel traces and heuristic post-optimization.

The six passes edit a configuration sequence ``(P_0, S_0) .. (P_T, S_T)`` in
place, shifting single moves earlier or later or cancelling move pairs.  A
shift can leave a step empty or merge two moves into one step, so every
pass ends by re-linearizing the sequence into a one-move-per-step strategy.
"""

from __future__ import annotations

import enum
import logging
import random
from dataclasses import dataclass
from typing import Sequence

from .dag import Dag
from .game import (
    EMPTY,
    Configuration,
    Move,
    Semantics,
    Strategy,
    _as_pair,
    metrics_triple,
    replay,
    validate,
)

log = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_ORDER",
    "InterleavingStuck",
    "MoveEventPredicates",
    "PassKind",
    "TrailEntry",
    "metrics_triple",
    "optimize_fixpoint",
    "pass_order",
    "run_pass",
    "sequentialize",
]


class InterleavingStuck(RuntimeError):
    """No order of a parallel step's moves stays within the budgets."""

    def __init__(self, step: int, message: str):
        self.step = step
        super().__init__(f"step {step}: {message}")


def sequentialize(dag: Dag, trace: Sequence, P: int, S: int, strict: bool = True) -> Strategy:
    """Linearize a parallel trace.

    Per step: unpebblings first, then ghostings and unghostings interleaved
    so both budgets hold, then pebblings.  When both budgets are saturated
    and a ghosting and an unghosting are still pending, the two are emitted
    back to back (ghost first), which momentarily exceeds the ghost budget
    by one; with ``strict`` set this raises InterleavingStuck instead.
    """
    pairs = [_as_pair(c) for c in trace]
    moves: Strategy = []
    if not pairs:
        return moves
    cur_p, cur_s = len(pairs[0][0]), len(pairs[0][1])
    for t in range(len(pairs) - 1):
        (P0, S0), (P1, S1) = pairs[t], pairs[t + 1]
        pebbling = sorted(P1 - P0 - S0)
        unpebbling = sorted(P0 - P1 - S1)
        ghosting = sorted(S1 - S0)
        unghosting = sorted(S0 - S1)
        for v in unpebbling:
            moves.append(Move.unpebble(v))
        cur_p -= len(unpebbling)
        while ghosting or unghosting:
            progressed = False
            if cur_p >= P and cur_s >= S and ghosting and unghosting:
                if strict:
                    raise InterleavingStuck(t, "pebble and ghost budgets both saturated; swap would exceed one")
                w, v = ghosting.pop(), unghosting.pop()
                moves += [Move.ghost(w), Move.unghost(v)]
                log.warning("step %d: paired ghost(%d)/unghost(%d) exceeds ghost budget %d", t, w, v, S)
                progressed = True
            if unghosting and cur_p < P:
                moves.append(Move.unghost(unghosting.pop()))
                cur_p, cur_s = cur_p + 1, cur_s - 1
                progressed = True
            if ghosting and cur_s < S:
                moves.append(Move.ghost(ghosting.pop()))
                cur_p, cur_s = cur_p - 1, cur_s + 1
                progressed = True
            if not progressed:
                raise InterleavingStuck(t, f"cannot place {len(ghosting)} ghostings / {len(unghosting)} unghostings within budgets")
        for v in pebbling:
            moves.append(Move.pebble(v))
        cur_p += len(pebbling)
    return moves


class MoveEventPredicates:
    """Move events of a configuration sequence, recomputed on access so they
    track in-place edits.  ``t`` ranges over ``1..T``; out of range is False."""

    def __init__(self, P: list[set[int]], S: list[set[int]]):
        self.P = P
        self.S = S

    @property
    def T(self) -> int:
        return len(self.P) - 1

    def _ok(self, t: int) -> bool:
        return 1 <= t <= self.T

    def pebbled(self, v: int, t: int) -> bool:
        return self._ok(t) and v in self.P[t] and v not in self.P[t - 1] and v not in self.S[t - 1]

    def unpebbled(self, v: int, t: int) -> bool:
        return self._ok(t) and v in self.P[t - 1] and v not in self.P[t] and v not in self.S[t]

    def ghosted(self, v: int, t: int) -> bool:
        return self._ok(t) and v in self.S[t] and v not in self.S[t - 1]

    def unghosted(self, v: int, t: int) -> bool:
        return self._ok(t) and v in self.S[t - 1] and v not in self.S[t]

    def used(self, v: int, t: int) -> bool:
        return self.pebbled(v, t) or self.unpebbled(v, t) or self.unghosted(v, t)


class PassKind(str, enum.Enum):
    REMOVE_PEBBLINGS = "remove_pebblings"
    REMOVE_GHOSTINGS = "remove_ghostings"
    DELAY_PEBBLE = "delay_pebble"
    EXPEDITE_UNPEBBLE = "expedite_unpebble"
    DELAY_GHOST = "delay_ghost"
    EXPEDITE_UNGHOST = "expedite_unghost"


# Order of the driver loop when no seed is given.
DEFAULT_ORDER = (
    PassKind.REMOVE_GHOSTINGS,
    PassKind.REMOVE_PEBBLINGS,
    PassKind.DELAY_PEBBLE,
    PassKind.EXPEDITE_UNPEBBLE,
    PassKind.DELAY_GHOST,
    PassKind.EXPEDITE_UNGHOST,
)

# Passes allowed to spend extra pebbles (up to the budget) to save ghosts.
_PEBBLE_SPENDING = {PassKind.DELAY_GHOST, PassKind.EXPEDITE_UNGHOST}


def _inputs_stable(dag: Dag, ev: MoveEventPredicates, v: int, t: int) -> bool:
    """All predecessors of ``v`` pebbled at ``t-1`` and ``t``."""
    return all(w in ev.P[t - 1] and w in ev.P[t] for w in dag.preds[v])


def _consumed(dag: Dag, ev: MoveEventPredicates, v: int, *steps: int) -> bool:
    return any(ev.used(w, t) for w in dag.succs[v] for t in steps)


def _remove_pebblings(dag: Dag, ev: MoveEventPredicates, budget: int) -> None:
    P, S = ev.P, ev.S
    for t in range(ev.T, 0, -1):
        for v in sorted(P[t - 1] - P[t] - S[t]):
            for t0 in range(t - 1, 0, -1):
                if ev.unghosted(v, t0) or _consumed(dag, ev, v, t0):
                    break
                if ev.pebbled(v, t0):
                    for i in range(t0, t):
                        P[i].discard(v)
                    break


def _remove_ghostings(dag: Dag, ev: MoveEventPredicates, budget: int) -> None:
    S = ev.S
    for t in range(ev.T, 0, -1):
        for v in sorted(S[t] - S[t - 1]):
            if _inputs_stable(dag, ev, v, t):
                t0 = t
                while t0 <= ev.T and v in S[t0]:
                    S[t0].discard(v)
                    t0 += 1


def _delay_pebble(dag: Dag, ev: MoveEventPredicates, budget: int) -> None:
    P, S = ev.P, ev.S
    T = ev.T
    for t in range(T, 0, -1):
        for v in sorted((P[t] - P[t - 1]) - S[t - 1]):
            t0 = t
            while v in P[t0] and t0 < T:
                if _consumed(dag, ev, v, t0, t0 + 1):
                    break
                if _inputs_stable(dag, ev, v, t0):
                    for i in range(t, t0):
                        P[i].discard(v)
                t0 += 1


def _expedite_unpebble(dag: Dag, ev: MoveEventPredicates, budget: int) -> None:
    P, S = ev.P, ev.S
    for t in range(1, ev.T + 1):
        for v in sorted((P[t - 1] - P[t]) - S[t]):
            t0 = t - 1
            while t0 > 0 and v in P[t0] and v not in S[t0 - 1]:
                if _consumed(dag, ev, v, t0, t0 + 1):
                    break
                if _inputs_stable(dag, ev, v, t0):
                    for i in range(t0, t):
                        P[i].discard(v)
                t0 -= 1


def _delay_ghost(dag: Dag, ev: MoveEventPredicates, budget: int) -> None:
    # Each ghosting is pushed later one step at a time while a spare pebble
    # exists, until it meets its unghosting (the pair then cancels).
    P, S = ev.P, ev.S
    T = ev.T
    for t in range(T, 0, -1):
        for v in sorted(S[t] - S[t - 1]):
            t1 = t
            while t1 < T and len(P[t1]) < budget and ev.ghosted(v, t1):
                P[t1].add(v)
                S[t1].discard(v)
                t1 += 1


def _expedite_unghost(dag: Dag, ev: MoveEventPredicates, budget: int) -> None:
    P, S = ev.P, ev.S
    for t in range(1, ev.T + 1):
        if len(P[t]) >= budget:
            continue
        for v in sorted(S[t - 1] - S[t]):
            t0 = t - 1
            while t0 > 0 and v in S[t0]:
                # every step the pebble now spans must have room for it
                if any(v not in P[i] and len(P[i]) >= budget for i in range(t0, t)):
                    break
                if _inputs_stable(dag, ev, v, t0):
                    for i in range(t0, t):
                        P[i].add(v)
                        S[i].discard(v)
                t0 -= 1


_PASSES = {
    PassKind.REMOVE_PEBBLINGS: _remove_pebblings,
    PassKind.REMOVE_GHOSTINGS: _remove_ghostings,
    PassKind.DELAY_PEBBLE: _delay_pebble,
    PassKind.EXPEDITE_UNPEBBLE: _expedite_unpebble,
    PassKind.DELAY_GHOST: _delay_ghost,
    PassKind.EXPEDITE_UNGHOST: _expedite_unghost,
}


def _pass_once(dag: Dag, strat: Strategy, kind: PassKind, P: int, start: Configuration) -> Strategy:
    cfgs = replay(dag, strat, Semantics.SPOOKY, start)
    ev = MoveEventPredicates([set(c.pebbled) for c in cfgs], [set(c.ghosted) for c in cfgs])
    _PASSES[kind](dag, ev, P)

    pairs = [(frozenset(p), frozenset(s)) for p, s in zip(ev.P, ev.S)]
    pairs = [pairs[0]] + [b for a, b in zip(pairs, pairs[1:]) if a != b]
    out = sequentialize(
        dag,
        pairs,
        max(len(p) for p, _ in pairs),
        max(len(s) for _, s in pairs),
        strict=False,
    )
    before = validate(dag, strat, Semantics.SPOOKY, complete=False, start=start)
    after = validate(dag, out, Semantics.SPOOKY, complete=False, start=start)
    pebble_cap = max(P, before.pebbles) if kind in _PEBBLE_SPENDING else before.pebbles
    if after.ghosts > before.ghosts or after.pebbles > pebble_cap or after.time > before.time:
        log.debug("%s: linearized result %s breaks bounds of %s; keeping input", kind.value, after, before)
        return strat
    return out


def run_pass(
    dag: Dag,
    strat: Sequence[Move],
    kind: PassKind | str,
    P: int,
    start: Configuration = EMPTY,
    max_sweeps: int = 1000,
) -> Strategy:
    """Apply one optimization pass to a valid spooky strategy.

    ``P`` is the pebble budget the ghost-oriented passes may spend.  The
    result is valid, no longer than the input, and never costs more ghosts;
    pebble cost stays within ``max(P, input cost)`` (within the input cost
    for the pebble-oriented passes).  A sweep whose re-linearization would
    break those bounds is discarded.

    A shift can enable another one once the sequence is re-linearized, so
    sweeps repeat until the strategy stops changing.  Should a sweep revisit
    an earlier strategy (a cycle), the smallest one seen is returned.
    """
    kind = PassKind(kind)
    cur = list(strat)
    seen = {tuple(cur)}
    for _ in range(max_sweeps):
        nxt = _pass_once(dag, cur, kind, P, start)
        if nxt == cur:
            return cur
        key = tuple(nxt)
        if key in seen:
            log.debug("%s: sweep cycle detected", kind.value)
            return min(seen)  # deterministic pick; every member is within the bounds
        seen.add(key)
        cur = nxt
    return cur


def pass_order(order_seed: int | None) -> list[PassKind]:
    order = list(DEFAULT_ORDER)
    if order_seed is not None:
        random.Random(order_seed).shuffle(order)
    return order


@dataclass(frozen=True)
class TrailEntry:
    round: int
    pass_kind: PassKind
    metrics: tuple[int, int, int]  # (time, pebbles, ghosts)
    strategy: tuple[Move, ...]


def _improves(new: tuple[int, ...], old: tuple[int, ...]) -> bool:
    return new != old and all(a <= b for a, b in zip(new, old))


def optimize_fixpoint(
    dag: Dag,
    strat: Sequence[Move],
    P: int,
    order_seed: int | None = None,
    max_rounds: int = 100,
    trail: list[TrailEntry] | None = None,
) -> Strategy:
    """Run rounds of all six passes in a seed-permuted order while a round
    improves ``(time, pebbles, ghosts)``; return the last improving strategy.

    Every strategy produced along the way is appended to ``trail`` if given.
    """
    order = pass_order(order_seed)
    best = list(strat)
    best_m = metrics_triple(dag, best)
    for rnd in range(max_rounds):
        cur = best
        for kind in order:
            cur = run_pass(dag, cur, kind, P)
            if trail is not None:
                trail.append(TrailEntry(rnd, kind, metrics_triple(dag, cur), tuple(cur)))
        m = metrics_triple(dag, cur)
        if not _improves(m, best_m):
            break
        best, best_m = cur, m
    return best
