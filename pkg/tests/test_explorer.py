import hypothesis.strategies as st
import jsonschema
import pytest
from hypothesis import given, settings

from src.configs.output_schema import TRACE_SCHEMA, VERDICT_SCHEMA
from src.core.domains import DomainDecl, State
from src.core.evaluator import eval_rel, holds
from src.core.expressions import FALSE, ID, TRUE
from src.explorer.computations import (
    Computation,
    EnvModel,
    Stepper,
    computations,
    in_assumption,
    in_commitment,
    replay,
    sample_computation,
)
from src.explorer.export import (
    computation_table,
    computation_to_dict,
    computation_to_dot,
    graph_to_dot,
    verdict_to_dict,
)
from src.explorer.reachability import check_invariant_direct, explore, reachable
from src.explorer.validity import check_validity
from src.explorer.verdicts import Counterexample, Holds
from src.parser.picore_parser import parse_expression, parse_program
from src.prover.annotations import derived_condition
from src.semantics.labels import EMPTY_CONTEXT, ENV, EnvStep, ProgAct


def program(text):
    return parse_program(text, variables=('x', 'y'))


def relation(text):
    return parse_expression(text, variables=('x', 'y'))


def test_validity_holds_for_a_correct_assignment(xy_domains, xy_rg):
    verdict = check_validity(program('x := 1'), xy_rg('true', 'Id', "x' = 1", 'x = 1'), xy_domains, 6)
    assert isinstance(verdict, Holds)
    assert verdict.depth == 6
    assert verdict.explored > 0


def test_guarantee_violation_is_reported_with_its_step(xy_domains, xy_rg):
    verdict = check_validity(program('x := 1'), xy_rg('true', 'Id', "x' = 2", 'x = 1'), xy_domains, 6)
    assert isinstance(verdict, Counterexample)
    assert verdict.clause == 'guarantee'
    assert len(verdict.computation.edges) == 1
    assert isinstance(verdict.computation.edges[-1], ProgAct)
    assert 'outside the guarantee' in verdict.detail


def test_post_violation_is_reported_on_termination(xy_domains, xy_rg):
    verdict = check_validity(program('x := x + 1'), xy_rg('x < 2', 'Id', "x' = x + 1", 'x = 2'), xy_domains, 6)
    assert verdict.clause == 'post'
    last = verdict.computation.last
    assert last.state['x'] == 1


def test_interference_breaks_a_sequential_proof(xy_domains, xy_rg):
    rg = xy_rg('true', "(FRAME(x) AND x' = 0) OR Id", "x' = 1", 'x = 1')
    verdict = check_validity(program('x := 1'), rg, xy_domains, 6)
    assert verdict.clause == 'post'
    assert any(isinstance(label, EnvStep) for label in verdict.computation.edges)


@pytest.mark.parametrize(
    'text, rg',
    [
        ('x := 1', ('true', 'Id', "x' = 1", 'x = 1')),
        ('x := 1', ('true', "(FRAME(x) AND x' = 0) OR Id", "x' = 1", 'x = 1')),
        ('SKIP', ('x = 2', "(FRAME(y) AND y' = 0) OR Id", 'Id', 'x = 2')),
        ('IF x = 0 THEN x := 1 ELSE SKIP FI', ('true', 'Id', "x' = 1", 'x >= 1')),
    ],
)
def test_exhaustive_enumeration_agrees_with_graph_search(xy_domains, xy_rg, text, rg):
    cond = xy_rg(*rg)
    fast = check_validity(program(text), cond, xy_domains, 4)
    slow = check_validity(program(text), cond, xy_domains, 4, exhaustive=True)
    assert fast.holds == slow.holds
    if not fast.holds:
        assert fast.clause == slow.clause


def test_validity_rejects_negative_depth(xy_domains, xy_rg):
    with pytest.raises(ValueError):
        check_validity(program('SKIP'), xy_rg('true', 'Id', 'Id', 'true'), xy_domains, -1)


def test_computations_are_all_prefixes(xy_domains):
    start = State({'x': 0, 'y': 0})
    closed = list(computations(program('x := 1 ;; y := 1'), start, EMPTY_CONTEXT, 5, None, xy_domains))
    assert [len(comp) for comp in closed] == [1, 2, 3]
    stuttering = EnvModel.from_rely(ID)
    with_env = list(computations(program('x := 1 ;; y := 1'), start, EMPTY_CONTEXT, 2, stuttering, xy_domains))
    assert len(with_env) == 7
    with pytest.raises(ValueError):
        next(computations(program('SKIP'), start, EMPTY_CONTEXT, -1, None, xy_domains))


def test_assumption_and_commitment_membership(xy_domains):
    rely = relation("(FRAME(y) AND y' = 0) OR Id")
    start = State({'x': 0, 'y': 1})
    found = list(computations(program('SKIP'), start, EMPTY_CONTEXT, 1, EnvModel.from_rely(rely), xy_domains))
    reset = next(c for c in found if c.edges == (ENV,) and c.last.state['y'] == 0)
    assert in_assumption(reset, TRUE, rely)
    assert not in_assumption(reset, TRUE, ID)
    assert not in_assumption(reset, relation('y = 0'), rely)
    ran = next(c for c in found if c.edges and isinstance(c.edges[0], ProgAct))
    assert in_commitment(ran, ID, TRUE)
    assert not in_commitment(ran, FALSE, TRUE)
    assert not in_commitment(ran, ID, relation('y = 0'))
    assert in_commitment(reset, FALSE, FALSE)


def test_computation_requires_one_label_per_transition(toy_par):
    first = sample_computation(toy_par.parallel_system, State({'x': 0}), EMPTY_CONTEXT, 1, None, toy_par.domains)
    with pytest.raises(ValueError):
        Computation(first.configs, ())
    with pytest.raises(ValueError):
        Computation((), ())
    assert first.prefix(1) == Computation(first.configs[:1])


def test_sampling_is_deterministic_and_replayable(toy_par):
    args = (toy_par.parallel_system, State({'x': 0}), EMPTY_CONTEXT, 10, EnvModel.closed_system(), toy_par.domains)
    comp = sample_computation(*args, seed=3)
    assert comp == sample_computation(*args, seed=3)
    assert len(comp.edges) == 10
    stepper = Stepper(toy_par.domains)
    assert replay(comp, stepper)
    tampered = Computation(comp.configs, (ENV,) + comp.edges[1:])
    assert not replay(tampered, stepper)


def test_reachable_states_of_the_counter(toy_par):
    states = reachable(toy_par.parallel_system, toy_par.initial, toy_par.domains, 6)
    assert states == frozenset(State({'x': v}) for v in (0, 1, 2))


def test_direct_invariant_check(toy_par):
    ps, domains = toy_par.parallel_system, toy_par.domains
    assert check_invariant_direct(ps, toy_par.initial, toy_par.invariant('in_range'), domains, 8).holds
    verdict = check_invariant_direct(ps, toy_par.initial, relation('x <= 1'), domains, 8)
    assert verdict.clause == 'invariant'
    assert verdict.computation.last.state == State({'x': 2})
    assert verdict.computation.first.state == State({'x': 0})
    assert replay(verdict.computation, Stepper(domains))


def test_exports_match_their_schemas(toy_par):
    ps, domains = toy_par.parallel_system, toy_par.domains
    verdict = check_invariant_direct(ps, toy_par.initial, relation('x <= 1'), domains, 8)
    jsonschema.validate(computation_to_dict(verdict.computation), TRACE_SCHEMA)
    jsonschema.validate(verdict_to_dict(verdict, 'invariant'), VERDICT_SCHEMA)
    jsonschema.validate(verdict_to_dict(Holds(3, 10), 'invariant'), VERDICT_SCHEMA)

    trace_dot = computation_to_dot(verdict.computation)
    assert trace_dot.startswith('digraph trace {')
    assert 'peripheries=2' in trace_dot

    graph = explore(ps, toy_par.initial, domains, 4)
    graph_dot = graph_to_dot(graph)
    assert graph_dot.startswith('digraph exploration {')
    assert graph_dot.count(' -> ') == len(graph.edges)

    table = computation_table(verdict.computation)
    assert list(table.columns) == ['step', 'label', 'x']
    assert len(table) == len(verdict.computation)
    assert table.iloc[-1]['x'] == '2'


def test_one_thread_pool_serves_a_whole_exploration(toy_par, monkeypatch):
    from src.explorer import computations as computations_module

    created = []
    real_pool = computations_module.ThreadPoolExecutor

    def counting_pool(*args, **kwargs):
        pool = real_pool(*args, **kwargs)
        created.append(pool)
        return pool

    monkeypatch.setattr(computations_module, 'ThreadPoolExecutor', counting_pool)
    ps, domains = toy_par.parallel_system, toy_par.domains
    parallel = explore(ps, toy_par.initial, domains, 6, jobs=3)
    assert len(created) == 1
    sequential = explore(ps, toy_par.initial, domains, 6, jobs=1)
    assert len(created) == 1
    assert parallel.states == sequential.states
    assert list(parallel.parents) == list(sequential.parents)


def test_parallel_validity_matches_sequential(toy_evtset):
    subject = toy_evtset.parallel_system.system('K')
    rg = derived_condition(toy_evtset, subject)
    domains = toy_evtset.domains
    sequential = check_validity(subject, rg, domains, 6, unit='K')
    parallel = check_validity(subject, rg, domains, 6, unit='K', jobs=4)
    assert parallel == sequential


def test_stepper_caches_agree_under_concurrent_use(toy_par):
    from concurrent.futures import ThreadPoolExecutor

    ps, domains = toy_par.parallel_system, toy_par.domains
    graph = explore(ps, toy_par.initial, domains, 6)
    confs = list(graph.parents) * 8
    shared = Stepper(domains)
    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(shared.actions, confs))
    fresh = Stepper(domains)
    for conf, steps in zip(confs, results):
        assert steps == fresh.actions(conf)
        assert shared.actions(conf) is shared.actions(conf)


# --- assumption boundaries and depth ------------------------------------------

XY = DomainDecl({'x': (0, 1, 2), 'y': (0, 1, 2)})
ENV_RELIES = ['Id', "(FRAME(y) AND y' = 0) OR Id", "(FRAME(x) AND x' >= x) OR Id", "(FRAME(x, y) AND x' = y') OR Id"]
CHECK_RELATIONS = ['Id', "x' >= x", "y' = y", "y' = 0", 'true', 'false']
PREDICATES = ['true', 'false', 'x = 0', 'y <= 1', 'x = y']
PROGRAMS = ['x := 1', 'WHILE x < 2 DO x := x + 1 OD', 'AWAIT y = 0 THEN y := 1 END', 'x, y := y, x']


@settings(deadline=None, max_examples=50)
@given(
    text=st.sampled_from(PROGRAMS),
    env_rely=st.sampled_from(ENV_RELIES),
    pre=st.sampled_from(PREDICATES),
    rely=st.sampled_from(CHECK_RELATIONS),
    x=st.integers(min_value=0, max_value=2),
    y=st.integers(min_value=0, max_value=2),
    seed=st.integers(min_value=0, max_value=1000),
)
def test_assumption_boundaries(text, env_rely, pre, rely, x, y, seed):
    env = EnvModel.from_rely(relation(env_rely))
    comp = sample_computation(program(text), State({'x': x, 'y': y}), EMPTY_CONTEXT, 8, env, XY, seed)
    env_edges = [(b, a) for b, label, a in comp.transitions() if isinstance(label, EnvStep)]
    assert in_assumption(comp, relation(pre), TRUE) == holds(relation(pre), comp.first.state)
    expected = all(eval_rel(relation(rely), b.state, a.state) for b, a in env_edges)
    assert in_assumption(comp, TRUE, relation(rely)) == expected
    assert in_assumption(comp, TRUE, relation(env_rely))
    assert in_assumption(comp, TRUE, TRUE)
    assert in_commitment(comp, TRUE, TRUE)


@settings(deadline=None, max_examples=30)
@given(
    op=st.sampled_from(['<=', '>=', '/=', '<']),
    k=st.integers(min_value=0, max_value=2),
    shallow=st.integers(min_value=0, max_value=6),
    extra=st.integers(min_value=0, max_value=4),
)
def test_direct_invariant_check_is_monotone_in_depth(toy_par, op, k, shallow, extra):
    invariant = parse_expression(f'x {op} {k}', variables=('x',))
    ps, domains = toy_par.parallel_system, toy_par.domains
    near = check_invariant_direct(ps, toy_par.initial, invariant, domains, shallow)
    far = check_invariant_direct(ps, toy_par.initial, invariant, domains, shallow + extra)
    if far.holds:
        assert near.holds
    if not near.holds:
        assert not far.holds
        assert len(near.computation.edges) <= shallow
        assert len(far.computation.edges) == len(near.computation.edges)
