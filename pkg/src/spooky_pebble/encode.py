"""CNF encoding of the spooky pebble game as a bounded-model-checking unrolling.

Per time step ``i`` every vertex gets a pebble variable ``p(v, i)`` and a ghost
variable ``s(v, i)``.  The formula for horizon ``T`` is

    Init(0) & Card(0) & Move(0) & Card(1) & ... & Move(T-1) & Card(T) & Final(T)

Final groups are guarded by an activation literal so that deepening the
horizon only needs to retract the old final group and append new steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from pysat.card import CardEnc, EncType

from .dag import Dag

Clause = list[int]


class VarMap:
    """Injective map from ``(vertex, time, kind)`` to positive variable ids.

    Time layers are allocated lazily; auxiliary variables (cardinality
    counters, activation literals) are drawn from the same counter so all ids
    stay distinct.
    """

    def __init__(self, n: int):
        self.n = n
        self.top = 0
        self._layers: list[int] = []
        self.aux: list[int] = []

    def ensure(self, t: int) -> None:
        while len(self._layers) <= t:
            self._layers.append(self.top + 1)
            self.top += 2 * self.n

    @property
    def horizon(self) -> int:
        return len(self._layers) - 1

    def p(self, v: int, t: int) -> int:
        return self._layers[t] + 2 * v

    def s(self, v: int, t: int) -> int:
        return self._layers[t] + 2 * v + 1

    def fresh(self) -> int:
        self.top += 1
        self.aux.append(self.top)
        return self.top

    def game_var_count(self) -> int:
        return 2 * self.n * len(self._layers)

    def decode_var(self, var: int) -> tuple[int, int, str] | None:
        """Inverse lookup ``var -> (vertex, time, 'p'|'s')``; None for auxiliaries."""
        for t, base in enumerate(self._layers):
            if base <= var < base + 2 * self.n:
                off = var - base
                return off // 2, t, "s" if off % 2 else "p"
        return None


@dataclass
class ClauseGroup:
    tag: str  # "init" | "final" | "move" | "card"
    step: int
    clauses: list[Clause] = field(default_factory=list)
    activation: int | None = None  # set for retractable (final) groups

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)


def encode_initial(dag: Dag, vm: VarMap) -> ClauseGroup:
    vm.ensure(0)
    clauses = []
    for v in dag.vertices:
        clauses.append([-vm.p(v, 0)])
        clauses.append([-vm.s(v, 0)])
    return ClauseGroup("init", 0, clauses)


def encode_final(dag: Dag, vm: VarMap, T: int, activation: int | None = None) -> ClauseGroup:
    """Pin ``(roots, {})`` at time ``T``.  With an activation literal ``a`` each
    clause becomes ``(-a | lit)`` so the group only binds while ``a`` is assumed."""
    vm.ensure(T)
    lits = []
    for v in dag.vertices:
        lits.append(vm.p(v, T) if v in dag.roots else -vm.p(v, T))
        lits.append(-vm.s(v, T))
    if activation is None:
        clauses = [[lit] for lit in lits]
    else:
        clauses = [[-activation, lit] for lit in lits]
    return ClauseGroup("final", T, clauses, activation)


def encode_moves(dag: Dag, vm: VarMap, i: int) -> ClauseGroup:
    """Transition clauses for step ``i -> i+1`` with implications expanded.

    Per predecessor ``w`` of ``v``:
      M1  newly pebbled v    => w pebbled at i and i+1
      M2  removed pebble v   => (w pebbled at i and i+1) or ghost on v at i+1
      M4  removed ghost v    => w pebbled at i and i+1
    Per vertex:
      M1  newly pebbled v    => no ghost on v at i+1
      M3  new ghost on v     => v pebbled at i and not at i+1
      M4  removed ghost v    => v pebbled at i+1
    """
    vm.ensure(i + 1)
    cl: list[Clause] = []
    for v in dag.vertices:
        p0, p1 = vm.p(v, i), vm.p(v, i + 1)
        s0, s1 = vm.s(v, i), vm.s(v, i + 1)
        for w in dag.preds[v]:
            for pw in (vm.p(w, i), vm.p(w, i + 1)):
                cl.append([p0, -p1, pw])
                cl.append([-p0, p1, pw, s1])
                cl.append([-s0, s1, pw])
        cl.append([p0, -p1, -s1])
        cl.append([s0, -s1, p0])
        cl.append([s0, -s1, -p1])
        cl.append([-s0, s1, p1])
    return ClauseGroup("move", i, cl)


def _at_most(lits: list[int], bound: int, vm: VarMap) -> list[Clause]:
    if bound >= len(lits):
        return []
    if bound == 0:
        return [[-x] for x in lits]
    enc = CardEnc.atmost(lits=lits, bound=bound, top_id=vm.top, encoding=EncType.seqcounter)
    while vm.top < enc.nv:
        vm.fresh()
    return [list(c) for c in enc.clauses]


def encode_cardinality(dag: Dag, vm: VarMap, i: int, P: int, S: int) -> ClauseGroup:
    """At most ``P`` pebbles and ``S`` ghosts at time ``i`` (sequential counter)."""
    if P < 0 or S < 0:
        raise ValueError("budgets must be nonnegative")
    vm.ensure(i)
    clauses = _at_most([vm.p(v, i) for v in dag.vertices], P, vm)
    clauses += _at_most([vm.s(v, i) for v in dag.vertices], S, vm)
    return ClauseGroup("card", i, clauses)


class Encoding:
    """Incremental BMC encoding for fixed budgets ``(P, S)``.

    ``groups`` holds the permanent groups in emission order; ``final`` is the
    single active retractable group.  ``pending`` collects clauses a solver
    session has not consumed yet (see :meth:`take_pending`).
    """

    def __init__(self, dag: Dag, P: int, S: int, horizon: int = 0):
        if P < 0 or S < 0:
            raise ValueError("budgets must be nonnegative")
        self.dag = dag
        self.P = P
        self.S = S
        self.vm = VarMap(dag.n)
        self.groups: list[ClauseGroup] = []
        self.retracted: list[int] = []
        self.pending: list[Clause] = []
        self.T = 0
        self._emit(encode_initial(dag, self.vm))
        self._emit(encode_cardinality(dag, self.vm, 0, P, S))
        self._append_steps(0, horizon)
        self.T = horizon
        self.final = self._new_final(horizon)

    def _emit(self, group: ClauseGroup) -> None:
        self.groups.append(group)
        self.pending.extend(group.clauses)

    def _append_steps(self, lo: int, hi: int) -> None:
        for i in range(lo, hi):
            self._emit(encode_moves(self.dag, self.vm, i))
            self._emit(encode_cardinality(self.dag, self.vm, i + 1, self.P, self.S))

    def _new_final(self, T: int) -> ClauseGroup:
        group = encode_final(self.dag, self.vm, T, activation=self.vm.fresh())
        self.pending.extend(group.clauses)
        return group

    @property
    def assumptions(self) -> list[int]:
        return [self.final.activation]

    def take_pending(self) -> list[Clause]:
        out, self.pending = self.pending, []
        return out

    def unroll(self, T: int) -> None:
        """Deepen the horizon to ``T``: retract the old final group, append
        move/cardinality groups for the new steps and a fresh final group."""
        if T <= self.T:
            raise ValueError(f"horizon must grow (current {self.T}, requested {T})")
        old = self.final.activation
        self.retracted.append(old)
        self.pending.append([-old])
        self._append_steps(self.T, T)
        self.T = T
        self.final = self._new_final(T)

    def clauses(self) -> list[Clause]:
        """The formula currently in force: permanent groups plus the active
        final group with its guard dropped."""
        out = [c for g in self.groups for c in g.clauses]
        out += [[lit for lit in c if lit != -self.final.activation] for c in self.final.clauses]
        return out

    def to_dimacs(self) -> str:
        lines = [f"c spooky pebble game: n={self.dag.n} P={self.P} S={self.S} T={self.T}"]
        for t in range(self.T + 1):
            for v in self.dag.vertices:
                lines.append(f"c {self.vm.p(v, t)} p {self.dag.labels[v]} {t}")
                lines.append(f"c {self.vm.s(v, t)} s {self.dag.labels[v]} {t}")
        body = self.clauses()
        lines.append(f"p cnf {self.vm.top} {len(body)}")
        lines += [" ".join(map(str, c)) + " 0" for c in body]
        return "\n".join(lines) + "\n"


def encode_monolithic(dag: Dag, P: int, S: int, T: int) -> Encoding:
    """Encoding built in one go for horizon ``T``."""
    return Encoding(dag, P, S, horizon=T)


def unroll(enc: Encoding, T: int) -> Encoding:
    enc.unroll(T)
    return enc
