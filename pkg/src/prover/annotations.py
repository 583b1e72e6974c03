"""Annotated proof trees and their syntax-directed construction from a spec.

An :class:`AnnotatedNode` pairs a subject with the rely-guarantee condition
it is claimed to satisfy. Children carry the conditions the rule needs for
the sub-derivations: the branches of a Cond, the two halves of a Seq split
at its ``mid`` assertion, one condition per event of an EvtSet and one per
unit of a parallel system.
"""

from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

from src.core.domains import DomainDecl, State
from src.core.expressions import FALSE, ID, TRUE, Binary, Expr, Lit, Var, and_all, conj, distinct, negate, or_all
from src.core.solver import states_satisfying
from src.core.spec import RGCond, SpecFile
from src.core.syntax import (
    AnonEvent,
    Await,
    Basic,
    BasicEvent,
    Cond,
    EventSystem,
    EvtSeq,
    EvtSet,
    Nondt,
    ParallelEventSystem,
    Program,
    Seq,
    Subject,
    While,
    iter_basic_events,
)
from src.utils.errors import MissingAnnotation

SYNTAX = 'syntax'
AUX_RULES = ('Conseq', 'UnPre', 'IntPost', 'UnivPre', 'EmptyPre')


@dataclass(frozen=True)
class AnnotatedNode:
    node: Subject
    rg: RGCond
    rule: str = SYNTAX
    children: Tuple['AnnotatedNode', ...] = ()
    mid: Optional[Expr] = None
    name: str = ''

    def __post_init__(self) -> None:
        if self.rule != SYNTAX and self.rule not in AUX_RULES:
            raise ValueError(f'Unknown proof rule {self.rule}')


def with_pre(rg: RGCond, pre: Expr) -> RGCond:
    return RGCond(pre, rg.rely, rg.guar, rg.post)


def with_post(rg: RGCond, post: Expr) -> RGCond:
    return RGCond(rg.pre, rg.rely, rg.guar, post)


def state_predicate(state: State) -> Expr:
    """The singleton set {state} as a predicate."""
    return and_all(Binary('=', Var(name), Lit(value)) for name, value in sorted(state.items()))


# --- programs ---------------------------------------------------------------

def annotate_program(program: Program, rg: RGCond, where: str = 'program') -> AnnotatedNode:
    """Syntax-directed annotation; Seq nodes take their ``mid`` from the source."""
    if isinstance(program, Seq):
        if program.mid is None:
            raise MissingAnnotation(where)
        return AnnotatedNode(
            program,
            rg,
            children=(
                annotate_program(program.first, with_post(rg, program.mid), where),
                annotate_program(program.second, with_pre(rg, program.mid), where),
            ),
            mid=program.mid,
        )
    if isinstance(program, Cond):
        return AnnotatedNode(
            program,
            rg,
            children=(
                annotate_program(program.then, with_pre(rg, conj(rg.pre, program.cond)), where),
                annotate_program(program.orelse, with_pre(rg, conj(rg.pre, negate(program.cond))), where),
            ),
        )
    if isinstance(program, While):
        body_rg = RGCond(conj(rg.pre, program.cond), rg.rely, rg.guar, rg.pre)
        return AnnotatedNode(program, rg, children=(annotate_program(program.body, body_rg, where),))
    if isinstance(program, (Basic, Await, Nondt)):
        return AnnotatedNode(program, rg)
    raise TypeError(f'Not a program: {program!r}')


def conseq(node: AnnotatedNode, outer: RGCond) -> AnnotatedNode:
    return AnnotatedNode(node.node, outer, 'Conseq', (node,), name=node.name)


def univ_pre(program: Program, rg: RGCond, domains: DomainDecl, cap: Optional[int] = None) -> AnnotatedNode:
    """Split ``rg.pre`` into one derivation per state."""
    children = tuple(
        annotate_program(program, with_pre(rg, state_predicate(state)))
        for state in states_satisfying(rg.pre, domains, cap=cap)
    )
    return AnnotatedNode(program, rg, 'UnivPre', children)


def un_pre(first: AnnotatedNode, second: AnnotatedNode) -> AnnotatedNode:
    rg = with_pre(first.rg, or_all([first.rg.pre, second.rg.pre]))
    return AnnotatedNode(first.node, rg, 'UnPre', (first, second))


def int_post(first: AnnotatedNode, second: AnnotatedNode) -> AnnotatedNode:
    rg = with_post(first.rg, and_all([first.rg.post, second.rg.post]))
    return AnnotatedNode(first.node, rg, 'IntPost', (first, second))


def empty_pre(program: Program, rg: RGCond) -> AnnotatedNode:
    return AnnotatedNode(program, rg, 'EmptyPre')


# --- events and event systems -----------------------------------------------

def annotate_event(spec: SpecFile, event: BasicEvent) -> AnnotatedNode:
    """The event against Γ, through its inner condition when the spec gives one."""
    outer = spec.gamma(event.label)
    inner = spec.gamma_inner(event.label)
    cond = inner if inner is not None else outer
    where = str(event.label)
    body_rg = with_pre(cond, conj(cond.pre, event.guard))
    node = AnnotatedNode(event, cond, children=(annotate_program(event.body, body_rg, where),), name=where)
    return conseq(node, outer) if inner is not None else node


def annotate_anon(event: AnonEvent, rg: RGCond) -> AnnotatedNode:
    return AnnotatedNode(event, rg, children=(annotate_program(event.body, rg),))


def _conditions(spec: SpecFile, events: Iterable[BasicEvent]) -> Tuple[RGCond, ...]:
    return tuple(spec.gamma(event.label) for event in events)


def derived_condition(spec: SpecFile, system: EventSystem) -> RGCond:
    """Unit condition assembled from the conditions of its events.

    pre is the first event's pre (sequence) or the conjunction of the
    events' pres (set); the rely is the conjunction of the distinct relies,
    the guarantee the disjunction of the distinct guarantees (Id for no
    events), the post the disjunction of the posts of the final set.
    """
    conds = _conditions(spec, iter_basic_events(system))
    rely = and_all(distinct(c.rely for c in conds))
    guar = or_all(distinct(c.guar for c in conds)) if conds else ID
    tail = system
    while isinstance(tail, EvtSeq):
        tail = tail.rest
    tail_conds = _conditions(spec, iter_basic_events(tail))
    post = or_all(distinct(c.post for c in tail_conds))
    if isinstance(system, EvtSeq):
        pre = spec.gamma(system.first.label).pre
    else:
        pre = and_all(distinct(c.pre for c in tail_conds)) if tail_conds else TRUE
    return RGCond(pre, rely, guar, post)


def unit_condition(spec: SpecFile, unit: str) -> RGCond:
    given = spec.unit_condition(unit)
    if given is not None:
        return given
    return derived_condition(spec, spec.parallel_system.system(unit))


def annotate_system(spec: SpecFile, system: EventSystem, rg: RGCond, name: str = '') -> AnnotatedNode:
    if isinstance(system, EvtSet):
        children = tuple(annotate_event(spec, event) for event in system.events)
        return AnnotatedNode(system, rg, children=children, name=name)
    if isinstance(system, EvtSeq):
        head = system.first
        mid = spec.gamma(head.label).post
        head_node = conseq(annotate_event(spec, head), with_post(rg, mid))
        rest = annotate_system(spec, system.rest, with_pre(rg, mid), name)
        return AnnotatedNode(system, rg, children=(head_node, rest), mid=mid, name=name)
    raise TypeError(f'Not an event system: {system!r}')


def annotate_unit(spec: SpecFile, unit: str) -> AnnotatedNode:
    system = spec.parallel_system.system(unit)
    return annotate_system(spec, system, unit_condition(spec, unit), unit)


def annotate_parallel(spec: SpecFile, rg: RGCond) -> AnnotatedNode:
    ps: ParallelEventSystem = spec.parallel_system
    children = tuple(annotate_unit(spec, unit) for unit in ps.units)
    return AnnotatedNode(ps, rg, children=children, name=spec.name)


def closed_condition(spec: SpecFile) -> RGCond:
    """⟨Init, EMPTY, UNIV, UNIV⟩."""
    return RGCond(spec.initial, FALSE, TRUE, TRUE)


def describe(node: AnnotatedNode) -> str:
    if node.name:
        return node.name
    text = str(node.node)
    return text if len(text) <= 60 else text[:57] + '...'
