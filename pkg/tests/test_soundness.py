"""Proof checker against bounded validity.

Every accepted derivation must hold on all runs of up to ``DEPTH``
transitions (``DEEP_DEPTH`` in the slow suite), and each broken variant
must be rejected by the checker and refuted by a concrete computation.
Programs run over x, y in {0..2}; events, event systems and parallel
systems come from the small bundled specs plus a sequential one below.
"""

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from src.core.syntax import AnonEvent, EvtSeq
from src.explorer.validity import check_validity
from src.explorer.verdicts import Counterexample, Holds
from src.parser.picore_parser import parse_program, parse_spec
from src.prover.annotations import (
    annotate_anon,
    annotate_event,
    annotate_parallel,
    annotate_program,
    annotate_unit,
    closed_condition,
    conseq,
    empty_pre,
    int_post,
    un_pre,
    univ_pre,
)
from src.prover.rules import check_derivation

DEPTH = 6
DEEP_DEPTH = 8

FRAMED_Y_UP = "(FRAME(y) AND y' = y + 1) OR Id"
X_GROWS = "(FRAME(x) AND x' > x) OR Id"

ACCEPTED = {
    'assign': ('x := 1', 'true', 'Id', "x' = 1", 'x = 1'),
    'increment': ('x := x + 1', 'x < 2', 'Id', "x' = x + 1", 'x >= 1'),
    'swap': ('x, y := y, x', 'x = 0 AND y = 1', 'Id', "x' = y AND y' = x", 'x = 1 AND y = 0'),
    'skip-under-interference': ('SKIP', 'x = 2', "(FRAME(y) AND y' = 0) OR Id", 'Id', 'x = 2'),
    'cond': ('IF x = 0 THEN x := 1 ELSE SKIP FI', 'true', 'Id', "x' = 1 OR Id", 'x >= 1'),
    'while': ('WHILE x < 2 DO x := x + 1 OD', 'true', 'Id', "x' = x + 1 OR Id", 'x = 2'),
    'await': ('AWAIT x > 0 THEN x := x - 1 END', 'true', FRAMED_Y_UP, "(FRAME(x) AND x' = x - 1) OR Id", 'true'),
    'seq': (
        'x := 1 ;; {| x = 1 |} y := x', 'true', 'Id',
        "(x' = 1 AND y' = y) OR (x' = x AND y' = x)", 'x = 1 AND y = 1',
    ),
    'nondt': ("NONDT x' >= x", 'true', 'Id', "x' >= x", 'true'),
    'reset-against-growth': ('x := 0', 'true', X_GROWS, "x' = 0", 'true'),
    'frame-keeps-x': ('y := 2', 'x = 1', "(FRAME(y) AND y' < y) OR Id", "y' = 2", 'x = 1'),
    'catch-up': ('IF x < y THEN x := y FI', 'true', 'Id', "x' = y OR Id", 'x >= y'),
    'countdown': ('WHILE y > 0 DO y := y - 1 OD', 'true', 'Id', "y' = y - 1 OR Id", 'y = 0'),
    'atomic-round-trip': ('ATOM x := x + 1 ;; x := x - 1 END', 'x < 2', 'Id', 'Id', 'true'),
    'seq-under-interference': (
        'x := 2 ;; {| x = 2 |} SKIP', 'true', "(FRAME(y) AND y' = 1) OR Id", "x' = 2 OR Id", 'x = 2',
    ),
    'await-reset': (
        'AWAIT x = y THEN x, y := 0, 0 END', 'true', 'Id', "(x' = 0 AND y' = 0) OR Id", 'x = 0 AND y = 0',
    ),
    'wrap-around': (
        'IF x = 2 THEN x := 0 ELSE x := x + 1 FI', 'true', 'Id', "x' = 0 OR x' = x + 1 OR Id", 'true',
    ),
    'copy-then-clear': (
        'y := x ;; {| y = x |} x := 0', 'true', 'Id',
        "(y' = x AND x' = x) OR (x' = 0 AND y' = y)", 'x = 0',
    ),
    'framed-choice': ("NONDT FRAME(x, y) AND x' = y' AND x' <= 1", 'true', 'Id', "x' = y' AND x' <= 1", 'x = y'),
    'converge': (
        'WHILE x /= y DO IF x < y THEN x := x + 1 ELSE x := x - 1 FI OD', 'true', 'Id',
        "x' = x + 1 OR x' = x - 1 OR Id", 'x = y',
    ),
}

REJECTED = {
    'wrong-guarantee': ('x := 1', 'true', 'Id', "x' = 2", 'x = 1'),
    'wrong-post': ('x := x + 1', 'x < 2', 'Id', "x' = x + 1", 'x = 2'),
    'unstable-post': ('x := 1', 'true', "(FRAME(x) AND x' = 0) OR Id", "x' = 1", 'x = 1'),
    'irreflexive-cond': ('IF x = 0 THEN x := 1 ELSE SKIP FI', 'true', 'Id', "x' = 1", 'x >= 1'),
    'loop-exit': ('WHILE x < 2 DO x := x + 1 OD', 'true', 'Id', "x' = x + 1 OR Id", 'x = 1'),
    'await-direction': ('AWAIT x > 0 THEN x := x - 1 END', 'true', 'Id', "(FRAME(x) AND x' = x + 1) OR Id", 'true'),
    'swap-post': ('x, y := y, x', 'x = 0 AND y = 1', 'Id', "x' = y AND y' = x", 'x = 0'),
    'strict-growth': ("NONDT x' >= x", 'true', 'Id', "x' > x", 'true'),
    'reset-overwritten': ('x := 0', 'true', X_GROWS, "x' = 0", 'x = 0'),
    'copy-post': (
        'y := x ;; {| y = x |} x := 0', 'true', 'Id',
        "(y' = x AND x' = x) OR (x' = 0 AND y' = y)", 'y = 0',
    ),
    'atomic-guarantee': ('ATOM x := x + 1 ;; x := x - 1 END', 'x < 2', 'Id', "x' = x + 1", 'true'),
    'catch-up-strict': ('IF x < y THEN x := y FI', 'true', 'Id', "x' = y OR Id", 'x > y'),
}


def _case(xy_rg, text, pre, rely, guar, post):
    program = parse_program(text, variables=('x', 'y'))
    return program, xy_rg(pre, rely, guar, post)


@pytest.mark.parametrize('case', sorted(ACCEPTED))
def test_accepted_derivations_hold_on_bounded_runs(case, xy_domains, xy_rg):
    program, rg = _case(xy_rg, *ACCEPTED[case])
    report = check_derivation(annotate_program(program, rg), xy_domains)
    assert report.accepted, report.render(failures_only=True)
    assert isinstance(check_validity(program, rg, xy_domains, DEPTH), Holds)


@pytest.mark.parametrize('case', sorted(REJECTED))
def test_rejected_derivations_have_counterexamples(case, xy_domains, xy_rg):
    program, rg = _case(xy_rg, *REJECTED[case])
    report = check_derivation(annotate_program(program, rg), xy_domains)
    assert not report.accepted
    assert report.failures()
    verdict = check_validity(program, rg, xy_domains, DEPTH)
    assert isinstance(verdict, Counterexample)
    assert verdict.clause in ('guarantee', 'post')


@pytest.mark.slow
@pytest.mark.parametrize('case', sorted(ACCEPTED))
def test_accepted_derivations_hold_on_longer_runs(case, xy_domains, xy_rg):
    program, rg = _case(xy_rg, *ACCEPTED[case])
    assert check_derivation(annotate_program(program, rg), xy_domains).accepted
    assert isinstance(check_validity(program, rg, xy_domains, DEEP_DEPTH), Holds)


# --- auxiliary rules --------------------------------------------------------


def _prog(text):
    return parse_program(text, variables=('x', 'y'))


def _weakened(xy_rg, xy_domains):
    inner = annotate_program(_prog('x := 1'), xy_rg('true', 'Id', "x' = 1", 'x = 1'))
    return conseq(inner, xy_rg('x = 0', 'Id', "x' = 1 OR Id", 'x >= 1'))


def _narrowed_rely(xy_rg, xy_domains):
    inner = annotate_program(_prog('SKIP'), xy_rg('x = 2', "(FRAME(y) AND y' = 0) OR Id", 'Id', 'x = 2'))
    return conseq(inner, xy_rg('x = 2 AND y = 0', "(FRAME(y) AND y' = 0 AND y = 1) OR Id", 'Id', 'x = 2'))


def _united(xy_rg, xy_domains):
    left = annotate_program(_prog('x := 1'), xy_rg('x = 0', 'Id', "x' = 1", 'x = 1'))
    right = annotate_program(_prog('x := 1'), xy_rg('x = 2', 'Id', "x' = 1", 'x = 1'))
    return un_pre(left, right)


def _intersected(xy_rg, xy_domains):
    exact = annotate_program(_prog('x := 1'), xy_rg('true', 'Id', "x' = 1", 'x = 1'))
    loose = annotate_program(_prog('x := 1'), xy_rg('true', 'Id', "x' = 1", 'x >= 1'))
    return int_post(exact, loose)


def _per_state(xy_rg, xy_domains):
    return univ_pre(_prog('x := x + 1'), xy_rg('x < 2', 'Id', "x' = x + 1", 'x >= 1'), xy_domains)


def _vacuous(xy_rg, xy_domains):
    return empty_pre(_prog('x := x + 1'), xy_rg('x = 0 AND x = 1', 'Id', "x' = 0", 'x = 2'))


def _anonymous(xy_rg, xy_domains):
    rg = xy_rg('true', 'Id', "(x' = 1 AND y' = y) OR (x' = x AND y' = x) OR Id", 'x = 1 AND y = 1')
    return annotate_anon(AnonEvent(_prog('x := 1 ;; {| x = 1 |} y := x')), rg)


AUXILIARY_ACCEPTED = {
    'Conseq': _weakened,
    'Conseq-rely': _narrowed_rely,
    'UnPre': _united,
    'IntPost': _intersected,
    'UnivPre': _per_state,
    'EmptyPre': _vacuous,
    'Inner': _anonymous,
}


@pytest.mark.parametrize('case', sorted(AUXILIARY_ACCEPTED))
def test_auxiliary_rule_derivations_hold(case, xy_domains, xy_rg):
    node = AUXILIARY_ACCEPTED[case](xy_rg, xy_domains)
    report = check_derivation(node, xy_domains)
    assert report.accepted, report.render(failures_only=True)
    assert report.root.rule == case.split('-')[0]
    assert isinstance(check_validity(node.node, node.rg, xy_domains, DEPTH), Holds)


def test_empty_pre_is_refused_for_a_satisfiable_pre(xy_domains, xy_rg):
    node = empty_pre(_prog('x := 1'), xy_rg('x = 0', 'Id', "x' = 2", 'x = 0'))
    report = check_derivation(node, xy_domains)
    assert not report.accepted
    [(_, premise)] = report.failures()
    assert premise.witness[0]['x'] == 0
    assert isinstance(check_validity(node.node, node.rg, xy_domains, DEPTH), Counterexample)


def test_consequence_cannot_strengthen_the_post(xy_domains, xy_rg):
    inner = annotate_program(_prog('x := 1'), xy_rg('true', 'Id', "x' = 1", 'x = 1'))
    node = conseq(inner, xy_rg('true', 'Id', "x' = 1", 'x = 1 AND y = 2'))
    assert not check_derivation(node, xy_domains).accepted
    verdict = check_validity(node.node, node.rg, xy_domains, DEPTH)
    assert isinstance(verdict, Counterexample)
    assert verdict.clause == 'post'


# --- events, event systems and parallel systems -----------------------------

TOY_SEQ = """\
SPEC toy_seq
SYMBOLS K, L
DOMAINS
  x : {0..2}
  y : {0..2}
INIT
  x = 0 AND y = 0
EVENTS
  EVENT start @ K THEN x := 1 END
  EVENT bump @ K WHEN x >= 1 THEN x := 2 END
  EVENT mark @ L THEN y := 1 END
SYSTEM
  K : start ; {bump}
  L : {mark}
RGSPECS
  start :
    PRE x = 0
    RELY (FRAME(y) AND y' = 1) OR Id
    GUAR (FRAME(x) AND x' = 1) OR Id
    POST x = 1
  bump :
    PRE x >= 1
    RELY (FRAME(y) AND y' = 1) OR Id
    GUAR (FRAME(x) AND x' = 2) OR Id
    POST x >= 1
    FROM
    PRE x >= 1
    RELY (FRAME(y) AND y' = 1) OR Id
    GUAR (FRAME(x) AND x' = 2) OR Id
    POST x = 2
  mark :
    PRE true
    RELY (FRAME(x) AND x' >= 1) OR Id
    GUAR (FRAME(y) AND y' = 1) OR Id
    POST y = 1
"""

SYSTEMS = ['toy_par', 'toy_evtset', 'toy_seq']
UNITS = [('toy_par', 'A'), ('toy_par', 'B'), ('toy_evtset', 'K'), ('toy_seq', 'K'), ('toy_seq', 'L')]


@pytest.fixture(scope='module')
def toy_seq():
    return parse_spec(TOY_SEQ, 'toy_seq.picore')


@pytest.mark.parametrize('name', SYSTEMS)
def test_accepted_event_derivations_hold(request, name):
    spec = request.getfixturevalue(name)
    for event in spec.basic_events():
        node = annotate_event(spec, event)
        report = check_derivation(node, spec.domains)
        assert report.accepted, report.render(failures_only=True)
        assert report.nodes('BasicEvt')
        verdict = check_validity(event, node.rg, spec.domains, DEPTH, unit=event.label.unit)
        assert isinstance(verdict, Holds), str(event.label)


def test_event_with_an_inner_condition_goes_through_conseq(toy_seq):
    node = annotate_event(toy_seq, toy_seq.find_event('bump@K'))
    report = check_derivation(node, toy_seq.domains)
    assert report.accepted
    assert report.root.rule == 'Conseq'
    assert [child.rule for child in report.root.children] == ['BasicEvt']


@pytest.mark.parametrize('name, unit', UNITS)
def test_accepted_unit_derivations_hold(request, name, unit):
    spec = request.getfixturevalue(name)
    node = annotate_unit(spec, unit)
    report = check_derivation(node, spec.domains)
    assert report.accepted, report.render(failures_only=True)
    assert report.root.rule == ('EvtSeq' if isinstance(node.node, EvtSeq) else 'EvtSet')
    assert isinstance(check_validity(node.node, node.rg, spec.domains, DEPTH, unit=unit), Holds)


@pytest.mark.parametrize('name', SYSTEMS)
def test_accepted_parallel_derivations_hold(request, name):
    spec = request.getfixturevalue(name)
    rg = closed_condition(spec)
    report = check_derivation(annotate_parallel(spec, rg), spec.domains)
    assert report.accepted, report.render(failures_only=True)
    assert report.root.rule == 'Par'
    assert isinstance(check_validity(spec.parallel_system, rg, spec.domains, DEPTH), Holds)


def test_sequential_system_uses_every_event_rule(toy_seq):
    report = check_derivation(annotate_parallel(toy_seq, closed_condition(toy_seq)), toy_seq.domains)
    for rule in ('Par', 'EvtSeq', 'EvtSet', 'Conseq', 'BasicEvt', 'Basic'):
        assert report.nodes(rule), rule


def test_mutated_sequential_system_is_rejected_and_refuted(toy_seq):
    broken = parse_spec(TOY_SEQ.replace("GUAR (FRAME(x) AND x' = 1) OR Id", "GUAR (FRAME(x) AND x' = 2) OR Id"),
                        'broken_seq.picore')
    event = broken.find_event('start@K')
    node = annotate_event(broken, event)
    assert not check_derivation(node, broken.domains).accepted
    verdict = check_validity(event, node.rg, broken.domains, DEPTH, unit='K')
    assert isinstance(verdict, Counterexample)
    assert verdict.clause == 'guarantee'


@pytest.mark.slow
@pytest.mark.parametrize('name', SYSTEMS)
def test_accepted_system_derivations_hold_on_longer_runs(request, name):
    spec = request.getfixturevalue(name)
    for unit in spec.parallel_system.units:
        node = annotate_unit(spec, unit)
        assert check_derivation(node, spec.domains).accepted
        assert isinstance(check_validity(node.node, node.rg, spec.domains, DEEP_DEPTH, unit=unit), Holds)
    rg = closed_condition(spec)
    assert check_derivation(annotate_parallel(spec, rg), spec.domains).accepted
    assert isinstance(check_validity(spec.parallel_system, rg, spec.domains, DEEP_DEPTH), Holds)


# --- randomized single-unit specs -------------------------------------------

GUARDS = ['true', 'x < 2', 'y = 0']
BODIES = [
    'x := 1',
    'x := 0',
    'y := x',
    'IF x < 2 THEN x := x + 1 FI',
    'AWAIT y = 0 THEN y := 1 END',
    'x := 2 ;; {| x = 2 |} y := 0',
]
PRES = ['true', 'x <= 1', 'y = 0']
RELIES = ['Id', "(FRAME(y) AND y' = 0) OR Id", "(FRAME(x) AND x' >= x) OR Id"]
GUARS = ['true', 'Id', "(FRAME(x) AND x' = 1) OR Id", "(FRAME(x, y) AND x' >= x) OR Id"]
POSTS = ['true', 'x = 1', 'y <= 1']

EVENT_PARTS = st.tuples(*(st.sampled_from(pool) for pool in (GUARDS, BODIES, PRES, RELIES, GUARS, POSTS)))


def unit_spec(parts):
    """A single unit K choosing among one event per entry of ``parts``."""
    events, conditions = [], []
    for n, (guard, body, pre, rely, guar, post) in enumerate(parts):
        events.append(f'  EVENT e{n} @ K WHEN {guard} THEN {body} END')
        conditions.append(f'  e{n} :\n    PRE {pre}\n    RELY {rely}\n    GUAR {guar}\n    POST {post}')
    names = ', '.join(f'e{n}' for n in range(len(parts)))
    lines = [
        'SPEC random_unit', 'SYMBOLS K', 'DOMAINS', '  x : {0..2}', '  y : {0..2}', 'INIT', '  x = 0 AND y = 0',
        'EVENTS', *events, 'SYSTEM', f'  K : {{{names}}}', 'RGSPECS', *conditions,
    ]
    return '\n'.join(lines) + '\n'


@settings(deadline=None, max_examples=30)
@given(st.lists(EVENT_PARTS, min_size=1, max_size=2))
def test_random_unit_specs_are_sound(parts):
    spec = parse_spec(unit_spec(parts), 'random_unit.picore')
    for event in spec.basic_events():
        node = annotate_event(spec, event)
        if check_derivation(node, spec.domains).accepted:
            verdict = check_validity(event, node.rg, spec.domains, DEPTH, unit='K')
            assert isinstance(verdict, Holds), str(event.label)
    node = annotate_unit(spec, 'K')
    if check_derivation(node, spec.domains).accepted:
        assert isinstance(check_validity(node.node, node.rg, spec.domains, DEPTH, unit='K'), Holds)
