"""DAG representation, edge-list parsing and graph generators.

Edges are stored predecessor -> successor: ``(u, v)`` means ``u`` is a
direct input of ``v``.  Vertices are dense integers ``0..n-1``; string
labels are kept alongside for file I/O.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence


class DagError(ValueError):
    """Raised for malformed DAG input (cycles, duplicate edges, bad lines)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Dag:
    n: int
    edges: tuple[tuple[int, int], ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(self.n)))
        if len(self.labels) != self.n:
            raise DagError(f"expected {self.n} labels, got {len(self.labels)}")
        if len(set(self.labels)) != self.n:
            raise DagError("vertex labels must be unique")
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise DagError(f"edge ({u}, {v}) references an unknown vertex")
            if u == v:
                raise DagError(f"self-loop on {self.labels[u]}")
            if (u, v) in seen:
                raise DagError(f"duplicate edge {self.labels[u]} -> {self.labels[v]}")
            seen.add((u, v))
        object.__setattr__(self, "edges", tuple(sorted(seen)))
        if len(self.topological_order) != self.n:
            raise DagError("graph contains a cycle")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], labels: Sequence[str] = ()) -> Dag:
        return cls(n, tuple(edges), tuple(labels))

    @property
    def vertices(self) -> range:
        return range(self.n)

    @cached_property
    def preds(self) -> tuple[tuple[int, ...], ...]:
        """``preds[v]``: direct predecessors (inputs) of ``v``, ascending."""
        out: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            out[v].append(u)
        return tuple(tuple(sorted(p)) for p in out)

    @cached_property
    def succs(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            out[u].append(v)
        return tuple(tuple(sorted(s)) for s in out)

    @cached_property
    def roots(self) -> frozenset[int]:
        return frozenset(v for v in range(self.n) if not self.succs[v])

    @cached_property
    def leaves(self) -> frozenset[int]:
        return frozenset(v for v in range(self.n) if not self.preds[v])

    @cached_property
    def topological_order(self) -> tuple[int, ...]:
        indeg = [len(self.preds[v]) for v in range(self.n)]
        ready = deque(v for v in range(self.n) if indeg[v] == 0)
        order = []
        while ready:
            v = ready.popleft()
            order.append(v)
            for w in self.succs[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
        return tuple(order)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown vertex label {label!r}") from None

    def ancestors(self, v: int) -> frozenset[int]:
        """Vertices of the largest sub-DAG rooted at ``v`` (``v`` included)."""
        seen = {v}
        stack = [v]
        while stack:
            for u in self.preds[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return frozenset(seen)

    def __len__(self) -> int:
        return self.n


def _reaches(succs: dict[int, set[int]], src: int, dst: int) -> bool:
    stack, seen = [src], {src}
    while stack:
        x = stack.pop()
        if x == dst:
            return True
        for y in succs.get(x, ()):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return False


def parse_dag(text: str) -> Dag:
    """Parse the edge-list format: ``<pred> <succ>`` per line, ``#`` comments,
    a bare ``<label>`` declares an isolated vertex."""
    labels: list[str] = []
    index: dict[str, int] = {}
    edges: set[tuple[int, int]] = set()
    succs: dict[int, set[int]] = {}

    def vertex(label: str) -> int:
        if label not in index:
            index[label] = len(labels)
            labels.append(label)
        return index[label]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 1:
            vertex(parts[0])
            continue
        if len(parts) != 2:
            raise DagError(f"expected '<pred> <succ>', got {raw.strip()!r}", lineno)
        a, b = parts
        if a == b:
            raise DagError(f"self-loop on {a}", lineno)
        u, v = vertex(a), vertex(b)
        if (u, v) in edges:
            raise DagError(f"duplicate edge {a} -> {b}", lineno)
        if _reaches(succs, v, u):
            raise DagError(f"edge {a} -> {b} closes a cycle", lineno)
        edges.add((u, v))
        succs.setdefault(u, set()).add(v)
    return Dag(len(labels), tuple(edges), tuple(labels))


def format_dag(dag: Dag) -> str:
    lines = [f"{dag.labels[u]} {dag.labels[v]}" for u, v in dag.edges]
    lines += [dag.labels[v] for v in dag.vertices if not dag.preds[v] and not dag.succs[v]]
    return "\n".join(lines) + "\n"


def line_graph(n: int) -> Dag:
    """Path ``v1 -> v2 -> ... -> vn``."""
    if n < 1:
        raise ValueError("line graph needs at least one vertex")
    return Dag(n, tuple((i, i + 1) for i in range(n - 1)), tuple(f"v{i + 1}" for i in range(n)))


def line_graph_strategy(n: int) -> list:
    """Two-pebble leapfrog irreversible strategy for ``line_graph(n)``."""
    from .game import Move

    moves = [Move.pebble(0)]
    for i in range(1, n):
        moves += [Move.pebble(i), Move.unpebble(i - 1)]
    return moves


def _grid_id(p: int, i: int, j: int) -> int:
    return (i - 1) * p + (j - 1)


def diamond_gadget(p: int) -> Dag:
    """The ``p x p`` diamond lattice: vertex ``(i, j)`` feeds ``(i+1, j)`` and
    ``(i, j+1)`` where they exist.  Single leaf ``(1, 1)``, single root ``(p, p)``."""
    if p < 2:
        raise ValueError("diamond gadget needs p >= 2")
    edges = []
    for i in range(1, p + 1):
        for j in range(1, p + 1):
            if i < p:
                edges.append((_grid_id(p, i, j), _grid_id(p, i + 1, j)))
            if j < p:
                edges.append((_grid_id(p, i, j), _grid_id(p, i, j + 1)))
    labels = tuple(f"{i},{j}" for i in range(1, p + 1) for j in range(1, p + 1))
    return Dag(p * p, tuple(edges), labels)


def diamond_gadget_strategy(p: int) -> list:
    """Column sweep pebbling ``diamond_gadget(p)`` irreversibly with ``p + 1``
    pebbles; the leaf is pebbled exactly once."""
    from .game import Move

    if p < 2:
        raise ValueError("diamond gadget needs p >= 2")
    g = lambda i, j: _grid_id(p, i, j)  # noqa: E731
    moves = [Move.pebble(g(i, 1)) for i in range(1, p + 1)]
    for j in range(2, p + 1):
        for i in range(1, p + 1):
            moves.append(Move.pebble(g(i, j)))
            moves.append(Move.unpebble(g(i, j - 1)))
    moves += [Move.unpebble(g(i, p)) for i in range(1, p)]
    return moves


def random_dag(n: int, density: float, seed: int) -> Dag:
    """Edges only go from lower to higher index, each with probability ``density``."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    rng = random.Random(seed)
    edges = [(u, v) for v in range(n) for u in range(v) if rng.random() < density]
    return Dag(n, tuple(edges))
