"""Abstract syntax of programs, events and (parallel) event systems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, FrozenSet, Iterator, Optional, Set, Tuple, Union

from src.core.expressions import Expr, Term, frame_atoms, primed_vars, rebuild, variables
from src.core.values import Value, render_value


class Program(Term):
    pass


@dataclass(frozen=True, eq=False)
class Done(Program):
    """The terminated program."""


@dataclass(frozen=True, eq=False)
class Basic(Program):
    """Simultaneous assignment; no targets means SKIP."""

    assigns: Tuple[Tuple[str, Expr], ...] = ()

    @property
    def targets(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.assigns)


@dataclass(frozen=True, eq=False)
class Seq(Program):
    first: Program
    second: Program
    mid: Optional[Expr] = None


@dataclass(frozen=True, eq=False)
class Cond(Program):
    cond: Expr
    then: Program
    orelse: Program


@dataclass(frozen=True, eq=False)
class While(Program):
    cond: Expr
    body: Program


@dataclass(frozen=True, eq=False)
class Await(Program):
    cond: Expr
    body: Program


@dataclass(frozen=True, eq=False)
class Nondt(Program):
    rel: Expr


DONE = Done()
SKIP = Basic(())


@dataclass(frozen=True)
class EventLabel:
    name: str
    params: Tuple[Value, ...] = ()
    unit: str = ''

    def __str__(self) -> str:
        text = self.name
        if self.params:
            text += '[' + ', '.join(render_value(v) for v in self.params) + ']'
        if self.unit:
            text += '@' + self.unit
        return text


class Event(Term):
    pass


@dataclass(frozen=True, eq=False)
class BasicEvent(Event):
    label: EventLabel
    guard: Expr
    body: Program


@dataclass(frozen=True, eq=False)
class AnonEvent(Event):
    body: Program


class EventSystem(Term):
    pass


@dataclass(frozen=True, eq=False)
class EvtSet(EventSystem):
    events: Tuple[Event, ...]


@dataclass(frozen=True, eq=False)
class EvtSeq(EventSystem):
    first: Event
    rest: EventSystem


@dataclass(frozen=True, eq=False)
class ParallelEventSystem(Term):
    systems: Tuple[Tuple[str, EventSystem], ...]

    @property
    def units(self) -> Tuple[str, ...]:
        return tuple(unit for unit, _ in self.systems)

    def system(self, unit: str) -> EventSystem:
        for name, system in self.systems:
            if name == unit:
                return system
        raise KeyError(unit)

    def replace(self, unit: str, system: EventSystem) -> 'ParallelEventSystem':
        return ParallelEventSystem(
            tuple((name, system if name == unit else old) for name, old in self.systems)
        )


Subject = Union[Program, Event, EventSystem, ParallelEventSystem]


def is_terminated(subject: Subject) -> bool:
    if isinstance(subject, Program):
        return isinstance(subject, Done)
    if isinstance(subject, AnonEvent):
        return isinstance(subject.body, Done)
    if isinstance(subject, EvtSet):
        return not subject.events
    if isinstance(subject, ParallelEventSystem):
        return all(is_terminated(system) for _, system in subject.systems)
    return False


def map_exprs(node: Term, fn: Callable[[Expr], Expr]) -> Term:
    """Rewrite every expression inside a program, event or system."""
    if isinstance(node, Expr):
        return fn(node)
    if isinstance(node, BasicEvent):
        return BasicEvent(node.label, fn(node.guard), map_exprs(node.body, fn))
    return rebuild(node, lambda child: map_exprs(child, fn))


def iter_basic_events(system: Union[EventSystem, Event]) -> Iterator[BasicEvent]:
    if isinstance(system, BasicEvent):
        yield system
    elif isinstance(system, EvtSet):
        for event in system.events:
            yield from iter_basic_events(event)
    elif isinstance(system, EvtSeq):
        yield from iter_basic_events(system.first)
        yield from iter_basic_events(system.rest)


def reads_writes(program: Program) -> Tuple[FrozenSet[str], FrozenSet[str]]:
    """Variables a program may read and may write."""
    reads: Set[str] = set()
    writes: Set[str] = set()

    def visit(node: Program) -> None:
        if isinstance(node, Basic):
            writes.update(node.targets)
            for _, expr in node.assigns:
                reads.update(variables(expr))
        elif isinstance(node, Nondt):
            reads.update(variables(node.rel))
            writes.update(primed_vars(node.rel))
            for atom in frame_atoms(node.rel):
                writes.update(atom.changed)
        elif isinstance(node, Seq):
            visit(node.first)
            visit(node.second)
        elif isinstance(node, Cond):
            reads.update(variables(node.cond))
            visit(node.then)
            visit(node.orelse)
        elif isinstance(node, (While, Await)):
            reads.update(variables(node.cond))
            visit(node.body)

    visit(program)
    return frozenset(reads), frozenset(writes)
