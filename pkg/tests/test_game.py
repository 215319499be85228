import pytest
from hypothesis import given, strategies as st

from spooky_pebble.dag import line_graph, random_dag
from spooky_pebble.game import (
    EMPTY,
    ClauseViolation,
    Configuration,
    IllegalMove,
    IncompleteStrategy,
    Move,
    MoveKind,
    Semantics,
    apply_move,
    check_step,
    format_strategy,
    metrics_triple,
    parse_strategy,
    replay,
    to_parallel,
    validate,
    validate_parallel,
)
from spooky_pebble.oracle import min_pebbles, min_strategy


def _cfg(dag, pebbled="", ghosted=""):
    return Configuration({dag.index(x) for x in pebbled}, {dag.index(x) for x in ghosted})


def test_unpebble_without_inputs_only_irreversible(g6):
    top = _cfg(g6, "bcde")
    d = Move.unpebble(g6.index("d"))
    assert apply_move(g6, top, d, "irreversible") == _cfg(g6, "bce")
    for sem in ("reversible", "spooky"):
        with pytest.raises(IllegalMove) as err:
            apply_move(g6, top, d, sem)
        assert err.value.reason == "predecessor-not-pebbled"


def test_ghost_needs_no_inputs_and_unghost_does(g6):
    top = _cfg(g6, "bcde")
    d = g6.index("d")
    ghosted = apply_move(g6, top, Move.ghost(d), "spooky")
    assert ghosted == _cfg(g6, "bce", "d")
    with pytest.raises(IllegalMove, match="predecessor-not-pebbled"):
        apply_move(g6, ghosted, Move.unghost(d), "spooky")
    with_a = apply_move(g6, ghosted, Move.pebble(g6.index("a")), "spooky")
    assert apply_move(g6, with_a, Move.unghost(d), "spooky") == _cfg(g6, "abcde")


@pytest.mark.parametrize(
    "cfg,move,reason",
    [
        (("a", ""), Move.pebble(0), "already-pebbled"),
        (("", "a"), Move.pebble(0), "vertex-ghosted"),
        (("", ""), Move.unpebble(0), "vertex-not-pebbled"),
        (("", ""), Move.ghost(0), "vertex-not-pebbled"),
        (("", ""), Move.unghost(0), "vertex-not-ghosted"),
        (("", ""), Move.pebble(4), "predecessor-not-pebbled"),
        (("", ""), Move.pebble(9), "unknown-vertex"),
    ],
)
def test_illegal_move_reasons(g5, cfg, move, reason):
    with pytest.raises(IllegalMove) as err:
        apply_move(g5, _cfg(g5, *cfg), move, "spooky")
    assert err.value.reason == reason


@pytest.mark.parametrize("sem", ["irreversible", "reversible"])
def test_ghost_moves_rejected_outside_spooky(g5, sem):
    with pytest.raises(IllegalMove, match="ghost-in-wrong-semantics"):
        apply_move(g5, _cfg(g5, "a"), Move.ghost(0), sem)


def test_configuration_disjoint():
    with pytest.raises(ValueError):
        Configuration({1}, {1})


def test_fig6_golden(g5, spooky_strategy):
    cost = validate(g5, spooky_strategy, "spooky")
    assert (cost.time, cost.pebbles, cost.ghosts) == (15, 3, 1)
    with pytest.raises(IllegalMove):
        validate(g5, spooky_strategy, "reversible")


def test_fig5_golden(g5, reversible_strategy):
    for sem in ("reversible", "spooky"):
        assert validate(g5, reversible_strategy, sem).triple == (11, 4, 0)


def test_fig5_with_move_deleted_names_index(g5, reversible_strategy):
    broken = reversible_strategy[:5] + reversible_strategy[6:]  # drop "pebble e"
    with pytest.raises((IllegalMove, IncompleteStrategy)) as err:
        validate(g5, broken, "reversible")
    assert "index" in str(err.value) or "final configuration" in str(err.value)


def test_incomplete_strategy_and_sub_strategy(g5, spooky_strategy):
    with pytest.raises(IncompleteStrategy):
        validate(g5, spooky_strategy[:-1])
    cost = validate(g5, spooky_strategy[:-1], complete=False)
    assert cost.time == 14
    # a sub-strategy may start from a non-empty configuration
    assert validate(g5, spooky_strategy[8:], complete=False, start=replay(g5, spooky_strategy[:8])[-1]).time == 7
    with pytest.raises(ValueError):
        validate(g5, [], complete=True, start=_cfg(g5, "a"))


def test_replay_reports_index(g5):
    with pytest.raises(IllegalMove) as err:
        replay(g5, [Move.pebble(0), Move.pebble(4)])
    assert err.value.index == 1


def test_costs_include_start_configuration(g5):
    start = _cfg(g5, "abcd")
    cost = validate(g5, [], complete=False, start=start)
    assert cost == type(cost)(pebbles=4, ghosts=0, time=0)


def test_strategy_text_roundtrip(g5, spooky_strategy):
    text = format_strategy(spooky_strategy, g5)
    assert parse_strategy(text, g5) == spooky_strategy
    assert parse_strategy("# c\nPEBBLE a  # x\n\n", g5) == [Move.pebble(g5.index("a"))]
    with pytest.raises(ValueError, match="line 1"):
        parse_strategy("hop a\n", g5)
    with pytest.raises(ValueError, match="line 2"):
        parse_strategy("pebble a\npebble zz\n", g5)


def test_single_vertex():
    dag = line_graph(1)
    assert metrics_triple(dag, [Move.pebble(0)]) == (1, 1, 0)


# ---- parallel traces ------------------------------------------------------


def test_fig7_parallel_step(g6):
    before = _cfg(g6, "bcde")
    after = _cfg(g6, "def")
    check_step(g6, before, after)


def test_validate_parallel_sequential_trace(g5, spooky_strategy):
    trace = to_parallel(g5, spooky_strategy)
    assert validate_parallel(g5, trace, 3, 1).triple == (15, 3, 1)
    with pytest.raises(ClauseViolation) as err:
        validate_parallel(g5, trace, 2, 1)
    assert err.value.family == "C"
    with pytest.raises(ClauseViolation) as err:
        validate_parallel(g5, trace, 3, 0)
    assert err.value.family == "C"


@pytest.mark.parametrize(
    "before,after,family,vertex",
    [
        # pebbling c although its input a is unpebbled
        (("", ""), ("c", ""), "M1", "c"),
        # pebbling a vertex that keeps a ghost
        ((set(), set()), ({"a"}, {"a"}), "M1", "a"),
        # removing c's pebble while a is absent and no ghost appears
        (("c", ""), ("", ""), "M2", "c"),
        # a ghost appearing out of nowhere
        (("", ""), ("", "a"), "M3", "a"),
        # a ghost vanishing instead of turning into a pebble
        (("", "a"), ("", ""), "M4", "a"),
        # unghosting c while its input a is unpebbled: the pebble appearing
        # already breaks the introduction clause, which is checked first
        (("", "c"), ("c", ""), "M1", "c"),
        # unghosting c while its input a is removed in the same step
        (("a", "c"), ("c", ""), "M1", "c"),
    ],
)
def test_check_step_families(g5, before, after, family, vertex):
    def pair(x):
        p, s = x
        return ({g5.index(c) for c in p}, {g5.index(c) for c in s})

    with pytest.raises(ClauseViolation) as err:
        check_step(g5, pair(before), pair(after), 3)
    assert (err.value.family, err.value.vertex, err.value.step) == (family, g5.index(vertex), 3)


def test_validate_parallel_boundaries(g5):
    with pytest.raises(ClauseViolation) as err:
        validate_parallel(g5, [_cfg(g5, "a")], 5, 5)
    assert err.value.family == "I"
    with pytest.raises(ClauseViolation) as err:
        validate_parallel(g5, [EMPTY, _cfg(g5, "a")], 5, 5)
    assert err.value.family == "F"


def test_validate_parallel_accepts_multi_change_steps(g5):
    a, b, c, d, e = (g5.index(x) for x in "abcde")
    trace = [
        EMPTY,
        Configuration({a, b}),
        Configuration({a, b, c, d}),
        Configuration({a, b, c, d, e}),
        Configuration({e}, {a, b, c, d}),
        Configuration({a, b, c, d, e}),
        Configuration({e}),
    ]
    with pytest.raises(ClauseViolation):
        validate_parallel(g5, trace, 5, 4)  # unghosting c and a together: c needs a stable
    trace[5:] = [
        Configuration({a, b, e}, {c, d}),
        Configuration({a, b, c, d, e}),
        Configuration({a, b, e}),
        Configuration({e}),
    ]
    assert validate_parallel(g5, trace, 5, 4).time == 8


# ---- rule inclusion, checked against exhaustive search -------------------

corpus = st.builds(random_dag, st.integers(1, 6), st.floats(0.1, 0.8), st.integers(0, 10_000))


@given(corpus)
def test_reversible_strategies_are_spooky(dag):
    strat = min_strategy(dag, "reversible", dag.n)
    rev = validate(dag, strat, "reversible")
    assert validate(dag, strat, "spooky") == rev
    # and every reversible strategy is irreversible-valid
    assert validate(dag, strat, "irreversible") == rev


@given(corpus)
def test_oracle_strategies_validate_at_their_cost(dag):
    for sem in Semantics:
        P = min_pebbles(dag, sem, S=dag.n)
        strat = min_strategy(dag, sem, P, dag.n)
        assert validate(dag, strat, sem).pebbles == P


@given(corpus, st.integers(0, 2**32 - 1))
def test_parallel_view_of_sequential_strategy(dag, _seed):
    strat = min_strategy(dag, "spooky", dag.n, 1)
    trace = to_parallel(dag, strat)
    assert validate_parallel(dag, trace, dag.n, 1) == validate(dag, strat)


def test_move_str_and_kind():
    assert str(Move.ghost(3)) == "ghost(3)"
    assert Move.unghost(1).kind is MoveKind.UNGHOST
