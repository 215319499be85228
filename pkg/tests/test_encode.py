import itertools

import pytest
from hypothesis import given, strategies as st
from pysat.solvers import Solver

from conftest import seeded_corpus
from spooky_pebble.dag import line_graph, parse_dag, random_dag
from spooky_pebble.encode import (
    Encoding,
    VarMap,
    encode_cardinality,
    encode_final,
    encode_initial,
    encode_monolithic,
    encode_moves,
    unroll,
)
from spooky_pebble.game import ClauseViolation, check_step, validate_parallel
from spooky_pebble.solve import decode_model


def _configs(n):
    """All disjoint (pebbled, ghosted) pairs over n vertices."""
    for states in itertools.product(range(3), repeat=n):
        yield (
            frozenset(v for v, s in enumerate(states) if s == 1),
            frozenset(v for v, s in enumerate(states) if s == 2),
        )


def _satisfied(clauses, true_vars):
    return all(any((lit > 0) == (abs(lit) in true_vars) for lit in c) for c in clauses)


def _assign(vm, t, cfg):
    P, S = cfg
    return {vm.p(v, t) for v in P} | {vm.s(v, t) for v in S}


def test_varmap_injective_and_counts():
    vm = VarMap(4)
    vm.ensure(3)
    ids = [vm.p(v, t) for v in range(4) for t in range(4)] + [vm.s(v, t) for v in range(4) for t in range(4)]
    assert len(set(ids)) == len(ids) == vm.game_var_count() == 2 * 4 * 4
    assert min(ids) == 1
    aux = vm.fresh()
    assert aux not in ids and vm.decode_var(aux) is None
    assert vm.decode_var(vm.s(2, 3)) == (2, 3, "s")
    vm.ensure(4)  # layers after auxiliaries stay disjoint
    assert vm.p(0, 4) > aux


def test_initial_and_final_groups(g5):
    vm = VarMap(g5.n)
    init = encode_initial(g5, vm)
    assert len(init) == 10 and all(len(c) == 1 and c[0] < 0 for c in init)
    final = encode_final(g5, vm, 3)
    assert len(final) == 10
    e = g5.index("e")
    assert [vm.p(e, 3)] in final.clauses
    assert final.activation is None
    guarded = encode_final(g5, vm, 3, activation=99)
    assert all(c[0] == -99 for c in guarded)


def test_initial_group_for_single_vertex_and_empty():
    dag = line_graph(1)
    vm = VarMap(1)
    assert encode_initial(dag, vm).clauses == [[-vm.p(0, 0)], [-vm.s(0, 0)]]
    assert len(encode_initial(parse_dag(""), VarMap(0))) == 0


def test_line_graph_final_polarity():
    dag = line_graph(3)
    vm = VarMap(3)
    final = encode_final(dag, vm, 5)
    assert [vm.p(2, 5)] in final.clauses
    assert [-vm.p(0, 5)] in final.clauses and [-vm.p(1, 5)] in final.clauses
    assert all([-vm.s(v, 5)] in final.clauses for v in range(3))


def test_zero_horizon_single_vertex_unsat():
    enc = encode_monolithic(line_graph(1), 1, 0, 0)
    with Solver(name="glucose4", bootstrap_with=enc.clauses()) as s:
        assert not s.solve()


small_dags = st.builds(random_dag, st.integers(1, 3), st.floats(0, 1), st.integers(0, 10_000))


@given(small_dags)
def test_move_clauses_match_step_rules(dag):
    """Brute force over every pair of configurations."""
    vm = VarMap(dag.n)
    clauses = encode_moves(dag, vm, 0).clauses
    for before in _configs(dag.n):
        for after in _configs(dag.n):
            true_vars = _assign(vm, 0, before) | _assign(vm, 1, after)
            try:
                check_step(dag, before, after)
                legal = True
            except ClauseViolation:
                legal = False
            assert _satisfied(clauses, true_vars) == legal, (before, after)


def test_move_clauses_match_step_rules_fig4(g5):
    vm = VarMap(g5.n)
    clauses = encode_moves(g5, vm, 0).clauses
    configs = list(_configs(g5.n))
    for before in configs:
        base = _assign(vm, 0, before)
        for after in configs:
            try:
                check_step(g5, before, after)
                legal = True
            except ClauseViolation:
                legal = False
            assert _satisfied(clauses, base | _assign(vm, 1, after)) == legal


def test_vanishing_ghost_on_leaf_is_forbidden():
    # a ghost with no inputs still has to turn into a pebble when it leaves
    dag = line_graph(1)
    vm = VarMap(1)
    clauses = encode_moves(dag, vm, 0).clauses
    assert not _satisfied(clauses, {vm.s(0, 0)})


@pytest.mark.parametrize("n", range(0, 6))
@pytest.mark.parametrize("bound", range(0, 6))
def test_cardinality_exact(n, bound):
    dag = parse_dag("\n".join(str(v) for v in range(n)))
    vm = VarMap(n)
    group = encode_cardinality(dag, vm, 0, bound, n)
    with Solver(name="glucose4", bootstrap_with=group.clauses) as s:
        for bits in itertools.product([False, True], repeat=n):
            assumptions = [vm.p(v, 0) if b else -vm.p(v, 0) for v, b in enumerate(bits)]
            assert s.solve(assumptions=assumptions) == (sum(bits) <= bound)


def test_cardinality_rejects_negative():
    with pytest.raises(ValueError):
        encode_cardinality(line_graph(2), VarMap(2), 0, -1, 0)


def test_auxiliary_variables_do_not_collide(g5):
    enc = encode_monolithic(g5, 2, 1, 4)
    game = {enc.vm.p(v, t) for v in g5.vertices for t in range(5)} | {
        enc.vm.s(v, t) for v in g5.vertices for t in range(5)
    }
    assert not game & set(enc.vm.aux)
    used = {abs(l) for c in enc.clauses() for l in c}
    assert max(used) <= enc.vm.top


def test_unroll_bookkeeping(g5):
    enc = Encoding(g5, 3, 1)
    first = enc.final.activation
    assert enc.assumptions == [first]
    unroll(enc, 4)
    assert enc.T == 4 and enc.retracted == [first]
    assert [-first] in enc.take_pending()
    assert enc.take_pending() == []
    with pytest.raises(ValueError):
        enc.unroll(4)
    tags = [(g.tag, g.step) for g in enc.groups]
    assert tags[:2] == [("init", 0), ("card", 0)]
    assert ("move", 3) in tags and ("card", 4) in tags


def test_dimacs_header(g5):
    enc = encode_monolithic(g5, 3, 1, 2)
    text = enc.to_dimacs()
    header = next(l for l in text.splitlines() if l.startswith("p cnf"))
    _, _, nv, nc = header.split()
    assert int(nv) == enc.vm.top and int(nc) == len(enc.clauses())
    assert "c 1 p a 0" in text


def _incremental_verdicts(dag, P, S, Tmax):
    enc = Encoding(dag, P, S)
    out = []
    with Solver(name="glucose4") as s:
        for T in range(Tmax + 1):
            if T:
                enc.unroll(T)
            s.append_formula(enc.take_pending())
            sat = s.solve(assumptions=enc.assumptions)
            if sat:
                validate_parallel(dag, decode_model(enc.vm, s.get_model(), T), P, S)
            out.append(sat)
    return out


def _monolithic_verdict(dag, P, S, T):
    enc = encode_monolithic(dag, P, S, T)
    with Solver(name="glucose4", bootstrap_with=enc.clauses()) as s:
        sat = s.solve()
        if sat:
            validate_parallel(dag, decode_model(enc.vm, s.get_model(), T), P, S)
        return sat


@pytest.mark.parametrize("idx", range(12))
def test_incremental_agrees_with_monolithic(idx):
    dag = seeded_corpus(12, 6, base_seed=500)[idx]
    for P, S in [(dag.n, dag.n), (max(1, dag.n // 2), 1), (2, 0)]:
        assert _incremental_verdicts(dag, P, S, 6) == [_monolithic_verdict(dag, P, S, T) for T in range(7)]


def test_fig4_budgets(g5):
    assert _monolithic_verdict(g5, 3, 1, 9)
    assert not _monolithic_verdict(g5, 3, 1, 8)
    assert not any(_monolithic_verdict(g5, 2, 5, T) for T in range(12))
