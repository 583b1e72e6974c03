"""Parsed PiCore specifications and their instantiation.

A :class:`SpecFile` keeps the source-level structure (event templates with
parameters, system declarations, rely-guarantee entries) so that it can be
pretty-printed back. Everything the semantics and the prover consume
(the parallel event system, Γ, invariants) is produced on demand with all
parameters and constants bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Tuple

from src.core.domains import DomainDecl, DomainSpec, evaluate_domain
from src.core.evaluator import bind, compile_expr, set_values
from src.core.expressions import Expr, Term
from src.core.syntax import (
    BasicEvent,
    EventLabel,
    EventSystem,
    EvtSeq,
    EvtSet,
    ParallelEventSystem,
    Program,
    iter_basic_events,
    map_exprs,
)
from src.core.values import FinMap, Value, value_key
from src.utils.errors import (
    DuplicateEventLabel,
    MissingGamma,
    SourceSpan,
    SpecError,
    UnitMismatch,
)


@dataclass(frozen=True, eq=False)
class RGCond(Term):
    pre: Expr
    rely: Expr
    guar: Expr
    post: Expr

    def bind(self, env: Mapping[str, Value]) -> 'RGCond':
        return RGCond(
            bind(self.pre, env), bind(self.rely, env), bind(self.guar, env), bind(self.post, env)
        )


@dataclass(frozen=True, eq=False)
class EventDef(Term):
    name: str
    params: Tuple[str, ...]
    unit: str
    guard: Expr
    body: Program
    span: Optional[SourceSpan] = field(default=None, compare=False)


@dataclass(frozen=True, eq=False)
class EventRef(Term):
    name: str
    param_domains: Tuple[Tuple[str, Expr], ...] = ()
    span: Optional[SourceSpan] = field(default=None, compare=False)


class EsysDecl(Term):
    pass


@dataclass(frozen=True, eq=False)
class SetDecl(EsysDecl):
    refs: Tuple[EventRef, ...]


@dataclass(frozen=True, eq=False)
class SeqDecl(EsysDecl):
    head: EventRef
    rest: EsysDecl


@dataclass(frozen=True, eq=False)
class RGEntry(Term):
    event: str
    cond: RGCond
    inner: Optional[RGCond] = None


_EMPTY_STATE = FinMap()


@dataclass(frozen=True)
class SpecFile:
    name: str
    symbols: Tuple[str, ...]
    constants: Tuple[Tuple[str, Expr], ...]
    variables: Tuple[Tuple[str, DomainSpec], ...]
    init: Expr
    events: Tuple[EventDef, ...]
    system: Tuple[Tuple[str, EsysDecl], ...]
    rgspecs: Tuple[RGEntry, ...] = ()
    unit_specs: Tuple[Tuple[str, RGCond], ...] = ()
    invariants: Tuple[Tuple[str, Expr], ...] = ()
    source: str = field(default='<string>', compare=False)

    # --- constants and domains ------------------------------------------

    @cached_property
    def constant_values(self) -> Dict[str, Value]:
        env: Dict[str, Value] = {}
        for name, expr in self.constants:
            env[name] = compile_expr(bind(expr, env))(_EMPTY_STATE, _EMPTY_STATE)
        return env

    @cached_property
    def domains(self) -> DomainDecl:
        env = self.constant_values
        variables = {name: evaluate_domain(spec, env) for name, spec in self.variables}
        params: Dict[str, Dict[str, Tuple[Value, ...]]] = {}
        for _, decl in self.system:
            for ref in _refs(decl):
                table = params.setdefault(ref.name, {})
                for param, dom in ref.param_domains:
                    table.setdefault(param, set_values(dom, env))
        return DomainDecl(variables, units=self.units, params=params)

    @property
    def units(self) -> Tuple[str, ...]:
        return tuple(sorted(unit for unit, _ in self.system))

    @property
    def variable_names(self) -> Tuple[str, ...]:
        return tuple(sorted(name for name, _ in self.variables))

    # --- events ----------------------------------------------------------

    def event_def(self, name: str) -> EventDef:
        for event in self.events:
            if event.name == name:
                return event
        raise SpecError(f'Unknown event {name}')

    def binder_of(self, event: EventDef) -> Optional[str]:
        return None if event.unit in self.symbols else event.unit

    def event_env(self, label: EventLabel) -> Dict[str, Value]:
        event = self.event_def(label.name)
        env = dict(self.constant_values)
        env.update(zip(event.params, label.params))
        binder = self.binder_of(event)
        if binder is not None:
            env[binder] = label.unit
        return env

    def instantiate_ref(self, ref: EventRef, unit: str) -> List[BasicEvent]:
        event = self.event_def(ref.name)
        if self.binder_of(event) is None and event.unit != unit:
            raise UnitMismatch(f'Event {event.name} is fixed to unit {event.unit}, used in {unit}')
        given = dict(ref.param_domains)
        missing = [p for p in event.params if p not in given]
        extra = [p for p in given if p not in event.params]
        if missing or extra:
            raise SpecError(
                f'Event {event.name} in unit {unit}: parameters {list(event.params)} '
                f'do not match {list(given)}'
            )
        pools = [set_values(given[p], self.constant_values) for p in event.params]
        instances = []
        for combo in itertools.product(*pools):
            label = EventLabel(event.name, tuple(combo), unit)
            env = self.event_env(label)
            instances.append(
                BasicEvent(label, bind(event.guard, env), map_exprs(event.body, lambda e: bind(e, env)))
            )
        return instances

    def _build(self, decl: EsysDecl, unit: str) -> EventSystem:
        if isinstance(decl, SetDecl):
            events = [e for ref in decl.refs for e in self.instantiate_ref(ref, unit)]
            seen = set()
            for event in events:
                if event.label in seen:
                    raise DuplicateEventLabel(str(event.label))
                seen.add(event.label)
            return EvtSet(tuple(sorted(events, key=lambda e: _label_key(e.label))))
        head = self.instantiate_ref(decl.head, unit)
        if len(head) != 1:
            raise SpecError(
                f'Sequenced event {decl.head.name} in unit {unit} must expand to exactly one event'
            )
        return EvtSeq(head[0], self._build(decl.rest, unit))

    @cached_property
    def parallel_system(self) -> ParallelEventSystem:
        systems = []
        for unit, decl in sorted(self.system, key=lambda item: item[0]):
            if unit not in self.symbols:
                raise SpecError(f'Unit {unit} is not a declared symbol')
            systems.append((unit, self._build(decl, unit)))
        return ParallelEventSystem(tuple(systems))

    def basic_events(self, unit: Optional[str] = None) -> List[BasicEvent]:
        found = []
        for name, system in self.parallel_system.systems:
            if unit is None or name == unit:
                found.extend(iter_basic_events(system))
        return found

    def find_event(self, text: str) -> BasicEvent:
        for event in self.basic_events():
            if str(event.label).replace(' ', '') == text.replace(' ', ''):
                return event
        raise SpecError(f'No event instance labelled {text}')

    # --- rely-guarantee conditions ------------------------------------------

    def _entry(self, name: str) -> Optional[RGEntry]:
        for entry in self.rgspecs:
            if entry.event == name:
                return entry
        return None

    def gamma(self, label: EventLabel) -> RGCond:
        entry = self._entry(label.name)
        if entry is None:
            raise MissingGamma(str(label))
        return entry.cond.bind(self.event_env(label))

    def gamma_inner(self, label: EventLabel) -> Optional[RGCond]:
        entry = self._entry(label.name)
        if entry is None or entry.inner is None:
            return None
        return entry.inner.bind(self.event_env(label))

    def unit_condition(self, unit: str) -> Optional[RGCond]:
        for name, cond in self.unit_specs:
            if name == unit:
                return cond.bind(self.constant_values)
        return None

    # --- initial states and invariants -------------------------------------

    @property
    def initial(self) -> Expr:
        return bind(self.init, self.constant_values)

    def invariant(self, name: str) -> Expr:
        for inv_name, expr in self.invariants:
            if inv_name == name:
                return bind(expr, self.constant_values)
        raise SpecError(f'Unknown invariant {name}')

    def bind_expr(self, expr: Expr) -> Expr:
        return bind(expr, self.constant_values)


def _refs(decl: EsysDecl) -> List[EventRef]:
    if isinstance(decl, SetDecl):
        return list(decl.refs)
    return [decl.head] + _refs(decl.rest)


def _label_key(label: EventLabel):
    return (label.name, value_key(label.params), label.unit)
