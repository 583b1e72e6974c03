"""Small-step transition rules for programs, events and event systems.

Every function returns the complete list of successors of one
configuration, in a deterministic order: Nondt and Await successors follow
the canonical state order, event sets follow their (sorted) event order
and parallel systems their (sorted) unit order.
"""

import logging
from typing import Dict, List, Optional, Tuple

from src.core.domains import DomainDecl, State
from src.core.evaluator import evaluate, holds
from src.core.solver import rel_successors
from src.core.syntax import (
    DONE,
    AnonEvent,
    Await,
    Basic,
    BasicEvent,
    Cond,
    Done,
    Event,
    EventSystem,
    EvtSeq,
    EvtSet,
    Nondt,
    ParallelEventSystem,
    Program,
    Seq,
    Subject,
    While,
)
from src.core.values import value_key
from src.semantics.labels import EventContext, EvtOcc, Label, ProgAct
from src.utils.errors import AtomBoundExceeded, DomainEscape

log = logging.getLogger(__name__)

ATOM_BOUND = 10000

ProgramStep = Tuple[Program, State]
EventStep = Tuple[Event, State, EventContext, Label]
SystemStep = Tuple[EventSystem, State, EventContext, Label]
ParStep = Tuple[ParallelEventSystem, State, EventContext, Label]


def _assign(program: Basic, state: State, domains: DomainDecl, strict: bool) -> Optional[State]:
    changes = {name: evaluate(expr, state) for name, expr in program.assigns}
    for name, value in changes.items():
        if not domains.contains(name, value):
            if strict:
                raise DomainEscape(name, value)
            return None
    return state.update(changes)


def step_program(
    program: Program,
    state: State,
    domains: DomainDecl,
    atom_bound: int = ATOM_BOUND,
    strict: bool = True,
) -> List[ProgramStep]:
    """All c-transitions of ``(program, state)``.

    With ``strict`` off, assignments leaving the declared domains are dropped
    instead of raising :class:`DomainEscape`.
    """
    if isinstance(program, Done):
        return []
    if isinstance(program, Basic):
        after = _assign(program, state, domains, strict)
        return [] if after is None else [(DONE, after)]
    if isinstance(program, Seq):
        result = []
        for first, after in step_program(program.first, state, domains, atom_bound, strict):
            if isinstance(first, Done):
                result.append((program.second, after))
            else:
                result.append((Seq(first, program.second, program.mid), after))
        return result
    if isinstance(program, Cond):
        branch = program.then if holds(program.cond, state) else program.orelse
        return [(branch, state)]
    if isinstance(program, While):
        if holds(program.cond, state):
            return [(Seq(program.body, program), state)]
        return [(DONE, state)]
    if isinstance(program, Await):
        if not holds(program.cond, state):
            return []
        return [(DONE, after) for after in atomic_runs(program.body, state, domains, atom_bound, strict)]
    if isinstance(program, Nondt):
        return [(DONE, after) for after in rel_successors(program.rel, state, domains)]
    raise TypeError(f'Not a program: {program!r}')


def atomic_runs(
    program: Program,
    state: State,
    domains: DomainDecl,
    bound: int = ATOM_BOUND,
    strict: bool = True,
) -> List[State]:
    """Final states of every terminating run of ``program`` without interference."""
    if bound < 1:
        raise ValueError('bound must be at least 1')
    if isinstance(program, Done):
        return [state]
    finals: Dict[State, None] = {}
    frontier: Dict[Tuple[Program, State], None] = {(program, state): None}
    for _ in range(bound):
        following: Dict[Tuple[Program, State], None] = {}
        for current, now in frontier:
            for after_prog, after in step_program(current, now, domains, bound, strict):
                if isinstance(after_prog, Done):
                    finals[after] = None
                else:
                    following[(after_prog, after)] = None
        frontier = following
        if not frontier:
            break
    if frontier:
        log.debug('Atomic body still running after %d steps from %r', bound, state)
        raise AtomBoundExceeded(bound, (program, state))
    return sorted(finals, key=value_key)


def step_event(
    event: Event,
    state: State,
    ctx: EventContext,
    unit: str,
    domains: DomainDecl,
    atom_bound: int = ATOM_BOUND,
    strict: bool = True,
) -> List[EventStep]:
    if isinstance(event, AnonEvent):
        return [
            (AnonEvent(body), after, ctx, ProgAct(unit))
            for body, after in step_program(event.body, state, domains, atom_bound, strict)
        ]
    if isinstance(event, BasicEvent):
        if not holds(event.guard, state):
            return []
        return [(AnonEvent(event.body), state, ctx.set(unit, event), EvtOcc(event, unit))]
    raise TypeError(f'Not an event: {event!r}')


def _finished(event: Event) -> bool:
    return isinstance(event, AnonEvent) and isinstance(event.body, Done)


def step_esys(
    system: EventSystem,
    state: State,
    ctx: EventContext,
    unit: str,
    domains: DomainDecl,
    atom_bound: int = ATOM_BOUND,
    strict: bool = True,
) -> List[SystemStep]:
    if isinstance(system, EvtSet):
        result = []
        for event in system.events:
            for after_evt, after, after_ctx, label in step_event(
                event, state, ctx, unit, domains, atom_bound, strict
            ):
                if isinstance(label, EvtOcc):
                    result.append((EvtSeq(after_evt, system), after, after_ctx, label))
        return result
    if isinstance(system, EvtSeq):
        result = []
        for after_evt, after, after_ctx, label in step_event(
            system.first, state, ctx, unit, domains, atom_bound, strict
        ):
            rest = system.rest if _finished(after_evt) else EvtSeq(after_evt, system.rest)
            result.append((rest, after, after_ctx, label))
        return result
    raise TypeError(f'Not an event system: {system!r}')


def step_par(
    ps: ParallelEventSystem,
    state: State,
    ctx: EventContext,
    domains: DomainDecl,
    atom_bound: int = ATOM_BOUND,
    strict: bool = True,
) -> List[ParStep]:
    result = []
    for unit, system in ps.systems:
        for after_sys, after, after_ctx, label in step_esys(
            system, state, ctx, unit, domains, atom_bound, strict
        ):
            result.append((ps.replace(unit, after_sys), after, after_ctx, label))
    return result


def successors(
    subject: Subject,
    state: State,
    ctx: EventContext,
    domains: DomainDecl,
    atom_bound: int = ATOM_BOUND,
    unit: str = '',
) -> List[Tuple[Subject, State, EventContext, Label]]:
    """Action successors of any configuration, whatever its syntactic layer."""
    if isinstance(subject, Program):
        return [
            (after_prog, after, ctx, ProgAct(unit))
            for after_prog, after in step_program(subject, state, domains, atom_bound)
        ]
    if isinstance(subject, Event):
        return step_event(subject, state, ctx, unit, domains, atom_bound)
    if isinstance(subject, EventSystem):
        return step_esys(subject, state, ctx, unit, domains, atom_bound)
    if isinstance(subject, ParallelEventSystem):
        return step_par(subject, state, ctx, domains, atom_bound)
    raise TypeError(f'Not a PiCore subject: {subject!r}')
