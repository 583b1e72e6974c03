import pytest

from src.core.domains import State
from src.core.syntax import DONE, AnonEvent, EvtSeq, EvtSet, Seq, While
from src.parser.picore_parser import parse_program
from src.semantics.labels import EMPTY_CONTEXT, ENV, EvtOcc, ProgAct, is_action
from src.semantics.steps import atomic_runs, step_esys, step_event, step_par, step_program, successors
from src.utils.errors import AtomBoundExceeded, DomainEscape


def program(text):
    return parse_program(text, variables=('x', 'y'))


def test_assignment_updates_only_its_targets(xy_domains):
    start = State({'x': 0, 'y': 2})
    assert step_program(program('x := x + 1'), start, xy_domains) == [(DONE, State({'x': 1, 'y': 2}))]
    assert step_program(program('x, y := y, x'), start, xy_domains) == [(DONE, State({'x': 2, 'y': 0}))]


def test_out_of_domain_assignment(xy_domains):
    start = State({'x': 2, 'y': 0})
    with pytest.raises(DomainEscape) as info:
        step_program(program('x := x + 1'), start, xy_domains)
    assert info.value.name == 'x'
    assert info.value.value == 3
    assert step_program(program('x := x + 1'), start, xy_domains, strict=False) == []


def test_sequence_steps_its_first_component(xy_domains):
    start = State({'x': 0, 'y': 0})
    [(rest, after)] = step_program(program('x := 1 ;; y := x'), start, xy_domains)
    assert rest == program('y := x')
    assert after == State({'x': 1, 'y': 0})


def test_conditionals_and_loops_do_not_change_the_state(xy_domains):
    start = State({'x': 0, 'y': 1})
    [(branch, after)] = step_program(program('IF x = 0 THEN y := 2 ELSE SKIP FI'), start, xy_domains)
    assert branch == program('y := 2')
    assert after == start
    loop = program('WHILE x < 1 DO x := x + 1 OD')
    [(unrolled, after)] = step_program(loop, start, xy_domains)
    assert unrolled == Seq(loop.body, loop)
    assert after == start
    done = State({'x': 1, 'y': 1})
    assert step_program(loop, done, xy_domains) == [(DONE, done)]
    assert isinstance(loop, While)


def test_await_blocks_until_its_condition_holds(xy_domains):
    body = program('AWAIT x > 0 THEN x := x - 1 ;; y := x END')
    assert step_program(body, State({'x': 0, 'y': 0}), xy_domains) == []
    assert step_program(body, State({'x': 2, 'y': 0}), xy_domains) == [(DONE, State({'x': 1, 'y': 1}))]


def test_nondeterministic_statement_follows_canonical_order(xy_domains):
    start = State({'x': 1, 'y': 0})
    steps = step_program(program("NONDT FRAME(x) AND x' >= x"), start, xy_domains)
    assert steps == [(DONE, State({'x': 1, 'y': 0})), (DONE, State({'x': 2, 'y': 0}))]


def test_atomic_runs_collects_every_final_state(xy_domains):
    body = program("NONDT FRAME(x) AND x' /= x ;; y := x")
    finals = atomic_runs(body, State({'x': 0, 'y': 0}), xy_domains)
    assert finals == [State({'x': 1, 'y': 1}), State({'x': 2, 'y': 2})]


def test_atomic_runs_bound(xy_domains):
    spin = program('WHILE true DO SKIP OD')
    with pytest.raises(AtomBoundExceeded) as info:
        atomic_runs(spin, State({'x': 0, 'y': 0}), xy_domains, bound=5)
    assert info.value.bound == 5
    with pytest.raises(ValueError):
        atomic_runs(spin, State({'x': 0, 'y': 0}), xy_domains, bound=0)


def test_basic_event_occurrence_records_context(toy_par):
    inc = toy_par.find_event('inc@A')
    domains = toy_par.domains
    assert step_event(inc, State({'x': 2}), EMPTY_CONTEXT, 'A', domains) == []
    [(anon, after, ctx, label)] = step_event(inc, State({'x': 0}), EMPTY_CONTEXT, 'A', domains)
    assert anon == AnonEvent(inc.body)
    assert after == State({'x': 0})
    assert ctx['A'] == inc
    assert label == EvtOcc(inc, 'A')
    [(_, moved, same_ctx, act)] = step_event(anon, after, ctx, 'A', domains)
    assert moved == State({'x': 1})
    assert same_ctx == ctx
    assert act == ProgAct('A')


def test_event_set_picks_enabled_events(toy_evtset):
    system = toy_evtset.parallel_system.system('K')
    domains = toy_evtset.domains
    only_up = step_esys(system, State({'x': 0, 'y': 0}), EMPTY_CONTEXT, 'K', domains)
    assert [str(label) for _, _, _, label in only_up] == ['occ up@K']
    both = step_esys(system, State({'x': 1, 'y': 0}), EMPTY_CONTEXT, 'K', domains)
    assert [str(label) for _, _, _, label in both] == ['occ down@K', 'occ up@K']


def test_event_set_returns_after_the_event_finishes(toy_evtset):
    system = toy_evtset.parallel_system.system('K')
    domains = toy_evtset.domains
    current, state, ctx = system, State({'x': 0, 'y': 0}), EMPTY_CONTEXT
    labels = []
    for _ in range(3):
        [(current, state, ctx, label)] = step_esys(current, state, ctx, 'K', domains)
        labels.append(str(label))
        assert isinstance(current, EvtSeq) or current == system
    assert labels == ['occ up@K', 'act@K', 'act@K']
    assert current == system
    assert isinstance(current, EvtSet)
    assert state == State({'x': 1, 'y': 1})


def test_parallel_composition_interleaves_units(toy_par):
    steps = step_par(toy_par.parallel_system, State({'x': 0}), EMPTY_CONTEXT, toy_par.domains)
    assert [str(label) for _, _, _, label in steps] == ['occ inc@A', 'occ reset@B']
    after_ps = steps[0][0]
    assert isinstance(after_ps.system('A'), EvtSeq)
    assert after_ps.system('B') == toy_par.parallel_system.system('B')


def test_successors_labels_program_steps(xy_domains):
    [(_, _, ctx, label)] = successors(program('SKIP'), State({'x': 0, 'y': 0}), EMPTY_CONTEXT, xy_domains, unit='A')
    assert label == ProgAct('A')
    assert ctx == EMPTY_CONTEXT
    assert is_action(label)
    assert not is_action(ENV)
    assert str(label) == 'act@A'
    assert str(ENV) == 'env'
