"""Solver toolkit for the spooky pebble game on DAGs."""

from .dag import Dag, DagError, diamond_gadget, diamond_gadget_strategy, line_graph, line_graph_strategy, parse_dag, random_dag
from .game import (
    Configuration,
    CostReport,
    IllegalMove,
    IncompleteStrategy,
    Move,
    MoveKind,
    Semantics,
    validate,
    validate_parallel,
)
from .optimize import PassKind, optimize_fixpoint, run_pass, sequentialize
from .oracle import min_pebbles, min_strategy, min_time
from .solve import SolveLimits, solve_spooky
from .transform import irrev_to_spooky

__all__ = [
    "Configuration",
    "CostReport",
    "Dag",
    "DagError",
    "IllegalMove",
    "IncompleteStrategy",
    "Move",
    "MoveKind",
    "PassKind",
    "Semantics",
    "SolveLimits",
    "diamond_gadget",
    "diamond_gadget_strategy",
    "irrev_to_spooky",
    "line_graph",
    "line_graph_strategy",
    "min_pebbles",
    "min_strategy",
    "min_time",
    "optimize_fixpoint",
    "parse_dag",
    "random_dag",
    "run_pass",
    "sequentialize",
    "solve_spooky",
    "validate",
    "validate_parallel",
]

__version__ = "0.1.0"
