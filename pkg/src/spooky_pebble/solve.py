"""Iterative-deepening SAT search for spooky pebbling strategies.

The horizon starts at 0.  An UNSAT verdict deepens it by one step, a per-call
timeout by ``t_skip`` steps; the first satisfying model is decoded into a
parallel trace.  The whole search is bounded by ``t_max`` seconds.
"""

from __future__ import annotations

import enum
import json
import logging
import random
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Protocol

from pysat.solvers import Solver

from .dag import Dag
from .encode import Encoding, VarMap
from .game import Configuration, ParallelTrace

log = logging.getLogger(__name__)


class BackendError(RuntimeError):
    """The SAT engine failed (as opposed to running out of time)."""


class SatBackend(Protocol):
    def add_clauses(self, clauses: Iterable[list[int]]) -> None: ...

    def solve(self, assumptions: list[int], timeout: float | None) -> bool | None:
        """True / False, or None when the time budget ran out."""

    def model(self) -> list[int]: ...

    def close(self) -> None: ...


class PysatBackend:
    """Incremental pysat solver with a watchdog interrupt and seeded phases.

    The seed picks a random initial polarity for every variable added; with
    the same seed and no interrupts the engine is deterministic.
    """

    def __init__(self, name: str = "glucose4", seed: int = 0):
        self.name = name
        self._rng = random.Random(seed)
        self._seed = seed
        self._nvars = 0
        try:
            self._solver = Solver(name=name)
        except Exception as exc:  # pysat raises bare exceptions for unknown engines
            raise BackendError(f"cannot start solver {name!r}: {exc}") from exc

    def add_clauses(self, clauses: Iterable[list[int]]) -> None:
        top = self._nvars
        for c in clauses:
            self._solver.add_clause(c)
            top = max(top, max((abs(x) for x in c), default=0))
        if top > self._nvars and self._seed:
            phases = [v if self._rng.random() < 0.5 else -v for v in range(self._nvars + 1, top + 1)]
            self._solver.set_phases(phases)
        self._nvars = top

    def solve(self, assumptions: list[int], timeout: float | None) -> bool | None:
        if timeout is None:
            try:
                return self._solver.solve(assumptions=assumptions)
            except Exception as exc:
                raise BackendError(str(exc)) from exc
        timer = threading.Timer(max(timeout, 0.0), self._solver.interrupt)
        timer.start()
        try:
            result = self._solver.solve_limited(assumptions=assumptions, expect_interrupt=True)
        except Exception as exc:
            raise BackendError(str(exc)) from exc
        finally:
            timer.cancel()
            self._solver.clear_interrupt()
        return result

    def model(self) -> list[int]:
        m = self._solver.get_model()
        if m is None:
            raise BackendError("solver reported SAT but returned no model")
        return m

    def close(self) -> None:
        self._solver.delete()


BackendFactory = Callable[[int], SatBackend]


def default_backend(seed: int) -> SatBackend:
    return PysatBackend("glucose4", seed)


@dataclass(frozen=True)
class SolveLimits:
    t_wait: float = 15.0
    t_max: float = 120.0
    t_skip: int = 5
    seed: int = 0
    max_horizon: int | None = None  # give up once the horizon would pass this

    def __post_init__(self):
        if self.t_skip < 1:
            raise ValueError("t_skip must be at least 1")
        if self.t_wait > self.t_max:
            raise ValueError("t_wait must not exceed t_max")
        if self.t_wait <= 0:
            raise ValueError("t_wait must be positive")


class Status(str, enum.Enum):
    SOLVED = "solved"
    EXHAUSTED = "exhausted-budget"


@dataclass(frozen=True)
class HorizonResult:
    T: int
    verdict: str  # "sat" | "unsat" | "timeout"
    elapsed: float


@dataclass
class SolveOutcome:
    status: Status
    trace: ParallelTrace | None = None
    history: list[HorizonResult] = field(default_factory=list)
    P: int = 0
    S: int = 0

    @property
    def solved(self) -> bool:
        return self.status is Status.SOLVED

    @property
    def horizon(self) -> int | None:
        return len(self.trace) - 1 if self.trace is not None else None

    def history_json(self) -> str:
        return json.dumps([{"T": h.T, "verdict": h.verdict, "elapsed": round(h.elapsed, 6)} for h in self.history])


def decode_model(vm: VarMap, assignment: Iterable[int], T: int) -> ParallelTrace:
    """``configs[i] = ({v | p(v,i)}, {v | s(v,i)})`` for ``i`` in ``0..T``."""
    values = {abs(x): x > 0 for x in assignment}
    trace = []
    for t in range(T + 1):
        P, S = set(), set()
        for v in range(vm.n):
            for var, bucket in ((vm.p(v, t), P), (vm.s(v, t), S)):
                if var not in values:
                    raise ValueError(f"assignment has no value for variable {var}")
                if values[var]:
                    bucket.add(v)
        trace.append(Configuration(frozenset(P), frozenset(S)))
    return trace


def solve_spooky(
    dag: Dag,
    P: int,
    S: int,
    limits: SolveLimits = SolveLimits(),
    backend: BackendFactory = default_backend,
) -> SolveOutcome:
    if not (0 <= P and 0 <= S):
        raise ValueError("budgets must be nonnegative")
    P, S = min(P, dag.n), min(S, dag.n)
    start = time.monotonic()
    enc = Encoding(dag, P, S)
    engine = backend(limits.seed)
    history: list[HorizonResult] = []
    try:
        while True:
            remaining = limits.t_max - (time.monotonic() - start)
            if remaining <= 0:
                log.info("budget exhausted at horizon %d (P=%d, S=%d)", enc.T, P, S)
                return SolveOutcome(Status.EXHAUSTED, None, history, P, S)
            engine.add_clauses(enc.take_pending())
            t0 = time.monotonic()
            result = engine.solve(enc.assumptions, min(limits.t_wait, remaining))
            elapsed = time.monotonic() - t0
            if result is True:
                history.append(HorizonResult(enc.T, "sat", elapsed))
                trace = decode_model(enc.vm, engine.model(), enc.T)
                log.debug("solved at horizon %d (P=%d, S=%d)", enc.T, P, S)
                return SolveOutcome(Status.SOLVED, trace, history, P, S)
            if result is False:
                history.append(HorizonResult(enc.T, "unsat", elapsed))
                step = 1
            else:
                history.append(HorizonResult(enc.T, "timeout", elapsed))
                step = limits.t_skip
            nxt = enc.T + step
            if limits.max_horizon is not None and nxt > limits.max_horizon:
                return SolveOutcome(Status.EXHAUSTED, None, history, P, S)
            enc.unroll(nxt)
    finally:
        engine.close()
