import hypothesis.strategies as st
import jsonschema
import pytest
from hypothesis import given, settings

from src.configs.output_schema import PROOF_REPORT_SCHEMA
from src.core.domains import DomainDecl
from src.core.expressions import ID, TRUE, conj, disj
from src.core.spec import RGCond
from src.explorer.reachability import check_invariant_direct
from src.explorer.validity import check_validity
from src.explorer.verdicts import Holds
from src.parser.picore_parser import parse_expression, parse_program, parse_spec
from src.prover.annotations import (
    AnnotatedNode,
    annotate_parallel,
    annotate_program,
    annotate_unit,
    closed_condition,
    conseq,
    derived_condition,
    empty_pre,
    int_post,
    un_pre,
    univ_pre,
)
from src.prover.invariants import check_invariant_via_theorem
from src.prover.obligations import Obligations, check_reflexive, check_stable, check_subset
from src.prover.rules import check_derivation
from src.utils.errors import MissingAnnotation


def program(text):
    return parse_program(text, variables=('x', 'y'))


def failed(report):
    return [(node.rule, premise.group) for node, premise in report.failures()]


def test_parallel_counter_is_accepted(toy_par):
    report = check_derivation(annotate_parallel(toy_par, closed_condition(toy_par)), toy_par.domains)
    assert report.accepted
    assert report.root.rule == 'Par'
    assert report.root.groups == [1, 2, 3, 4, 5, 6]
    assert {p.key for p in report.root.premise_group(6)} == {'A,B', 'B,A'}
    assert report.obligations > 0
    assert [n.rule for n in report.nodes('EvtSet')] == ['EvtSet', 'EvtSet']


def test_missing_rely_breaks_only_the_guarantee_rely_check(toy_par):
    text = open(toy_par.source, encoding='utf-8').read()
    mutated = parse_spec(text.replace("RELY x' = 0 OR Id", 'RELY Id'), 'mutated.picore')
    report = check_derivation(annotate_parallel(mutated, closed_condition(mutated)), mutated.domains)
    assert not report.accepted
    assert [(node.rule, p.group, p.key) for node, p in report.failures()] == [('Par', 6, 'B,A')]
    assert report.failures()[0][1].witness is not None


def test_event_set_reports_eight_premise_groups(toy_evtset):
    report = check_derivation(annotate_parallel(toy_evtset, closed_condition(toy_evtset)), toy_evtset.domains)
    assert report.accepted
    [evt_set] = report.nodes('EvtSet')
    assert evt_set.groups == list(range(1, 9))
    [no_pair] = report.root.premise_group(6)
    assert no_pair.passed
    assert 'no instance' in no_pair.text
    assert len(report.nodes('BasicEvt')) == 2
    assert report.nodes('Seq')


def test_unit_condition_is_derived_from_its_events(toy_evtset):
    cond = derived_condition(toy_evtset, toy_evtset.parallel_system.system('K'))
    assert cond.pre == TRUE
    assert cond.rely == ID
    node = annotate_unit(toy_evtset, 'K')
    assert node.rg == cond
    assert node.name == 'K'


def test_unsatisfiable_pre_uses_empty_pre(xy_domains, xy_rg):
    report = check_derivation(annotate_program(program('x := 1'), xy_rg('false', 'Id', "x' = 2", 'x = 0')), xy_domains)
    assert report.accepted
    assert report.root.rule == 'EmptyPre'
    assert report.root.groups == [0]


def test_basic_rejects_a_wrong_guarantee(xy_domains, xy_rg):
    report = check_derivation(annotate_program(program('x := 1'), xy_rg('true', 'Id', "x' = 2", 'x = 1')), xy_domains)
    assert not report.accepted
    assert failed(report) == [('Basic', 2)]
    assert report.root.premise_group(2)[0].witness is not None


def test_basic_rejects_an_unstable_post(xy_domains, xy_rg):
    rg = xy_rg('true', "(FRAME(x) AND x' = 0) OR Id", "x' = 1", 'x = 1')
    report = check_derivation(annotate_program(program('x := 1'), rg), xy_domains)
    assert failed(report) == [('Basic', 4)]


def test_sequence_needs_an_intermediate_assertion(xy_rg):
    with pytest.raises(MissingAnnotation):
        annotate_program(program('x := 1 ;; y := 1'), xy_rg('true', 'Id', 'true', 'true'))


def test_sequence_splits_at_its_annotation(xy_domains, xy_rg):
    rg = xy_rg('true', 'Id', "(x' = 1 AND y' = y) OR (x' = x AND y' = x)", 'x = 1 AND y = 1')
    node = annotate_program(program('x := 1 ;; {| x = 1 |} y := x'), rg)
    report = check_derivation(node, xy_domains)
    assert report.accepted
    assert report.root.rule == 'Seq'
    assert [c.rule for c in report.root.children] == ['Basic', 'Basic']


def test_consequence_weakens_the_condition(xy_domains, xy_rg):
    inner = annotate_program(program('x := 1'), xy_rg('true', 'Id', "x' = 1", 'x = 1'))
    outer = conseq(inner, xy_rg('x = 0', 'Id', "x' = 1 OR Id", 'x >= 1'))
    report = check_derivation(outer, xy_domains)
    assert report.accepted
    assert report.root.groups == [1, 2, 3, 4, 5]
    too_strong = conseq(inner, xy_rg('x = 0', 'Id', "x' = 1 OR Id", 'x = 0'))
    assert failed(check_derivation(too_strong, xy_domains)) == [('Conseq', 4)]


def test_union_of_pres_and_intersection_of_posts(xy_domains, xy_rg):
    left = annotate_program(program('x := 1'), xy_rg('x = 0', 'Id', "x' = 1", 'x = 1'))
    right = annotate_program(program('x := 1'), xy_rg('x = 2', 'Id', "x' = 1", 'x = 1'))
    union = check_derivation(un_pre(left, right), xy_domains)
    assert union.accepted
    assert union.root.rule == 'UnPre'
    assert union.root.groups == [0, 1, 2]

    exact = annotate_program(program('x := 1'), xy_rg('true', 'Id', "x' = 1", 'x = 1'))
    loose = annotate_program(program('x := 1'), xy_rg('true', 'Id', "x' = 1", 'x >= 1'))
    both = int_post(exact, loose)
    report = check_derivation(both, xy_domains)
    assert report.accepted
    assert report.root.rule == 'IntPost'
    assert both.rg.post == parse_expression('x = 1 AND x >= 1', variables=('x', 'y'))


def test_universal_pre_splits_per_state(xy_domains, xy_rg):
    node = univ_pre(program('x := x + 1'), xy_rg('x < 2', 'Id', "x' = x + 1", 'x >= 1'), xy_domains)
    report = check_derivation(node, xy_domains)
    assert report.accepted
    assert report.root.rule == 'UnivPre'
    assert len(report.root.premise_group(1)) == 6
    assert len(report.root.children) == 6


def test_loop_and_conditional_rules(xy_domains, xy_rg):
    loop = check_derivation(
        annotate_program(program('WHILE x < 2 DO x := x + 1 OD'), xy_rg('true', 'Id', "x' = x + 1 OR Id", 'x = 2')),
        xy_domains,
    )
    assert loop.accepted
    assert loop.root.groups == [1, 2, 3, 4, 5]
    branch = check_derivation(
        annotate_program(
            program('IF x = 0 THEN x := 1 ELSE SKIP FI'), xy_rg('true', 'Id', "x' = 1", 'x >= 1')
        ),
        xy_domains,
    )
    assert ('Cond', 4) in failed(branch)


def test_await_checks_each_start_state(xy_domains, xy_rg):
    rg = xy_rg('true', "(FRAME(y) AND y' = y + 1) OR Id", "(FRAME(x) AND x' = x - 1) OR Id", 'true')
    report = check_derivation(annotate_program(program('AWAIT x > 0 THEN x := x - 1 END'), rg), xy_domains)
    assert report.accepted
    assert report.root.rule == 'Await'
    wrong = xy_rg('true', 'Id', "(FRAME(x) AND x' = x + 1) OR Id", 'true')
    rejected = check_derivation(annotate_program(program('AWAIT x > 0 THEN x := x - 1 END'), wrong), xy_domains)
    assert failed(rejected) == [('Await', 1)]


def test_nondeterministic_statement_must_be_enabled(xy_domains, xy_rg):
    report = check_derivation(annotate_program(program("NONDT x' > x"), xy_rg('true', 'Id', "x' > x", 'true')), xy_domains)
    assert failed(report) == [('Nondt', 2)]


def test_unknown_rule_name_is_refused(xy_rg):
    with pytest.raises(ValueError):
        AnnotatedNode(program('SKIP'), xy_rg('true', 'Id', 'Id', 'true'), rule='Magic')


def test_report_output_forms(toy_par):
    report = check_derivation(annotate_parallel(toy_par, closed_condition(toy_par)), toy_par.domains)
    jsonschema.validate(report.to_dict(), PROOF_REPORT_SCHEMA)
    assert report.render().startswith('ACCEPT: Par on toy_par')
    table = report.table()
    assert list(table.columns) == ['node', 'rule', 'subject', 'premise', 'text', 'pass', 'witness']
    assert table['pass'].all()


def test_invariant_theorem(toy_par):
    report = check_invariant_via_theorem(toy_par, toy_par.invariant('in_range'), name='in_range')
    assert report.accepted
    assert report.root.rule == 'Invariant'
    assert report.root.groups == [1, 2, 3]
    assert {p.key for p in report.root.premise_group(2)} == {'inc@A', 'reset@B'}


def test_invariant_theorem_rejects_an_unstable_invariant(toy_par):
    too_small = parse_expression('x <= 1', variables=('x',))
    report = check_invariant_via_theorem(toy_par, too_small, toy_par.domains, name='small')
    assert not report.accepted
    assert failed(report) == [('Invariant', 2)]
    [(node, premise)] = report.failures()
    assert premise.key == 'inc@A'


# --- obligations --------------------------------------------------------------

X_ONLY = DomainDecl({'x': (0, 1, 2)})


def x_expr(text):
    return parse_expression(text, variables=('x',))


def test_subset_obligation_reports_the_first_escaping_state():
    result = check_subset(x_expr('x <= 1'), x_expr('x < 1'), X_ONLY)
    assert not result.holds
    assert result.witness == ({'x': 1}, {})
    assert check_subset(x_expr('x < 1'), x_expr('x <= 1'), X_ONLY).holds


def test_stable_obligation_reports_the_breaking_step():
    step_up = x_expr("(FRAME(x) AND x' = x + 1) OR Id")
    result = check_stable(x_expr('x = 0'), step_up, X_ONLY)
    assert result.witness == ({'x': 0}, {'x': 1})
    assert not check_stable(x_expr('x <= 1'), step_up, X_ONLY).holds
    assert check_stable(x_expr('true'), step_up, X_ONLY).holds


def test_reflexive_obligation_reports_an_identity_pair():
    result = check_reflexive(x_expr("x' = x + 1"), X_ONLY)
    assert result.witness == ({'x': 0}, {'x': 0})
    assert check_reflexive(x_expr("x' = x + 1 OR Id"), X_ONLY).holds


def test_memoised_obligations_agree_with_the_direct_checks():
    ob = Obligations(X_ONLY)
    pred, rel = x_expr('x = 0'), x_expr("(FRAME(x) AND x' = x + 1) OR Id")
    assert ob.stable(pred, rel).witness == check_stable(pred, rel, X_ONLY).witness
    assert ob.subset(pred, x_expr('x < 2')).holds
    assert ob.reflexive(rel).holds
    assert ob.checked == 3
    ob.stable(pred, rel)
    ob.subset(pred, x_expr('x < 2'))
    assert ob.checked == 3


# --- properties over x, y in {0..2} -------------------------------------------

XY = DomainDecl({'x': (0, 1, 2), 'y': (0, 1, 2)})


def xy(text):
    return parse_expression(text, variables=('x', 'y'))


def xy_cond(pre, rely, guar, post):
    return RGCond(xy(pre), xy(rely), xy(guar), xy(post))


ACCEPTED_BASES = [
    ('x := 1', 'true', 'Id', "x' = 1", 'x = 1'),
    ('WHILE x < 2 DO x := x + 1 OD', 'true', 'Id', "x' = x + 1 OR Id", 'x = 2'),
    ('SKIP', 'x = 2', "(FRAME(y) AND y' = 0) OR Id", 'Id', 'x = 2'),
    ('AWAIT x > 0 THEN x := x - 1 END', 'true', "(FRAME(y) AND y' = y + 1) OR Id",
     "(FRAME(x) AND x' = x - 1) OR Id", 'true'),
    ('IF x < y THEN x := y FI', 'true', 'Id', "x' = y OR Id", 'x >= y'),
]
PROGRAMS = [
    'x := 1',
    'SKIP',
    'x, y := y, x',
    'IF x = 0 THEN x := 1 ELSE SKIP FI',
    'WHILE x < 2 DO x := x + 1 OD',
    'AWAIT y = 0 THEN y := 1 END',
    "NONDT FRAME(x) AND x' >= x",
    'x := 2 ;; {| x = 2 |} y := 0',
]
PREDICATES = ['true', 'false', 'x = 0', 'y <= 1', 'x = y']
RELATIONS = ['Id', 'false', 'true', "x' = 0", "(FRAME(y) AND y' = 0) OR Id", "x' >= x"]
FRAMED_RELIES = ['Id', "(FRAME(y) AND y' = 0) OR Id", "(FRAME(x) AND x' >= x) OR Id"]
EMPTY_PRES = ['false', 'x = 0 AND x = 1', 'x < 0', 'x > y AND y >= 2']


@settings(deadline=None, max_examples=60)
@given(
    base=st.sampled_from(ACCEPTED_BASES),
    stronger_pre=st.sampled_from(PREDICATES),
    stronger_rely=st.sampled_from(RELATIONS),
    weaker_guar=st.sampled_from(RELATIONS),
    weaker_post=st.sampled_from(PREDICATES),
)
def test_consequence_accepts_every_weakening(base, stronger_pre, stronger_rely, weaker_guar, weaker_post):
    text, *cond = base
    inner = annotate_program(program(text), xy_cond(*cond))
    assert check_derivation(inner, XY).accepted
    outer = RGCond(
        conj(inner.rg.pre, xy(stronger_pre)),
        conj(inner.rg.rely, xy(stronger_rely)),
        disj(inner.rg.guar, xy(weaker_guar)),
        disj(inner.rg.post, xy(weaker_post)),
    )
    report = check_derivation(conseq(inner, outer), XY)
    assert report.accepted, report.render(failures_only=True)


@settings(deadline=None, max_examples=60)
@given(
    text=st.sampled_from(PROGRAMS),
    pre=st.sampled_from(EMPTY_PRES),
    rely=st.sampled_from(RELATIONS),
    guar=st.sampled_from(RELATIONS),
    post=st.sampled_from(PREDICATES),
)
def test_empty_pre_accepts_any_program(text, pre, rely, guar, post):
    rg = xy_cond(pre, rely, guar, post)
    explicit = check_derivation(empty_pre(program(text), rg), XY)
    assert explicit.accepted
    assert explicit.root.rule == 'EmptyPre'
    automatic = check_derivation(annotate_program(program(text), rg), XY)
    assert automatic.accepted
    assert automatic.root.rule == 'EmptyPre'


@settings(deadline=None, max_examples=40)
@given(
    text=st.sampled_from(PROGRAMS),
    pre=st.sampled_from(PREDICATES),
    rely=st.sampled_from(FRAMED_RELIES),
    relation=st.sampled_from(RELATIONS),
)
def test_universal_guarantee_and_post_always_hold(text, pre, rely, relation):
    ob = Obligations(XY)
    assert ob.subset(xy(relation), TRUE).holds
    assert ob.subset(xy(pre), TRUE).holds
    rg = RGCond(xy(pre), xy(rely), TRUE, TRUE)
    assert isinstance(check_validity(program(text), rg, XY, 5), Holds)


X_INVARIANTS = st.builds(
    lambda op, k: f'x {op} {k}',
    st.sampled_from(['<=', '>=', '/=', '=', '<']),
    st.integers(min_value=0, max_value=2),
)


@settings(deadline=None, max_examples=30)
@given(first=X_INVARIANTS, second=X_INVARIANTS, joiner=st.sampled_from(['OR', 'AND']))
def test_invariant_theorem_agrees_with_the_direct_check(toy_par, first, second, joiner):
    invariant = parse_expression(f'{first} {joiner} {second}', variables=('x',))
    report = check_invariant_via_theorem(toy_par, invariant, name='candidate')
    direct = check_invariant_direct(
        toy_par.parallel_system, toy_par.initial, invariant, toy_par.domains, 8
    )
    if report.accepted:
        assert direct.holds
    if not direct.holds:
        assert not report.accepted
