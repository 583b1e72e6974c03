"""Computations, environment models and the assumption/commitment sets."""

import logging
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, TypeVar, Union

from src.core.domains import DomainDecl, State
from src.core.evaluator import eval_rel, holds
from src.core.expressions import Expr
from src.core.solver import rel_successors
from src.core.syntax import (
    BasicEvent,
    ParallelEventSystem,
    Subject,
    is_terminated,
    iter_basic_events,
)
from src.semantics.labels import (
    EMPTY_CONTEXT,
    ENV,
    Configuration,
    EnvStep,
    EventContext,
    Label,
    is_action,
)
from src.semantics.steps import ATOM_BOUND, successors
from src.utils.errors import DomainEscape

log = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

Step = Tuple[Configuration, Label]


@dataclass(frozen=True)
class Computation:
    configs: Tuple[Configuration, ...]
    edges: Tuple[Label, ...] = ()

    def __post_init__(self) -> None:
        if not self.configs:
            raise ValueError('A computation has at least one configuration')
        if len(self.edges) != len(self.configs) - 1:
            raise ValueError('A computation has exactly one label per transition')

    def __len__(self) -> int:
        return len(self.configs)

    @property
    def first(self) -> Configuration:
        return self.configs[0]

    @property
    def last(self) -> Configuration:
        return self.configs[-1]

    @property
    def states(self) -> Tuple[State, ...]:
        return tuple(conf.state for conf in self.configs)

    @property
    def contexts(self) -> Tuple[EventContext, ...]:
        return tuple(conf.ctx for conf in self.configs)

    def transitions(self) -> Iterator[Tuple[Configuration, Label, Configuration]]:
        for index, label in enumerate(self.edges):
            yield self.configs[index], label, self.configs[index + 1]

    def extend(self, conf: Configuration, label: Label) -> 'Computation':
        return Computation(self.configs + (conf,), self.edges + (label,))

    def prefix(self, length: int) -> 'Computation':
        return Computation(self.configs[:length], self.edges[: length - 1])


def singleton(subject: Subject, state: State, ctx: EventContext = EMPTY_CONTEXT) -> Computation:
    return Computation((Configuration(subject, state, ctx),))


@dataclass(frozen=True)
class EnvModel:
    """Closed (no environment) or environment steps drawn from a rely relation.

    ``frame`` lists the variables the environment may touch (default: all).
    With ``vary_ctx`` an environment step may also record any of
    ``ctx_choices`` in the event context.
    """

    rely: Optional[Expr] = None
    frame: Optional[Tuple[str, ...]] = None
    vary_ctx: bool = False
    ctx_choices: Tuple[Tuple[str, BasicEvent], ...] = field(default=(), compare=False)

    @property
    def closed(self) -> bool:
        return self.rely is None

    @classmethod
    def closed_system(cls) -> 'EnvModel':
        return cls()

    @classmethod
    def from_rely(
        cls,
        rely: Expr,
        subject: Optional[Subject] = None,
        vary_ctx: bool = False,
        frame: Optional[Sequence[str]] = None,
    ) -> 'EnvModel':
        choices: Tuple[Tuple[str, BasicEvent], ...] = ()
        if vary_ctx and subject is not None:
            choices = _ctx_choices(subject)
        return cls(rely, tuple(frame) if frame is not None else None, vary_ctx, choices)


def _ctx_choices(subject: Subject) -> Tuple[Tuple[str, BasicEvent], ...]:
    if isinstance(subject, ParallelEventSystem):
        return tuple(
            (unit, event)
            for unit, system in subject.systems
            for event in iter_basic_events(system)
        )
    return tuple((event.label.unit, event) for event in iter_basic_events(subject))


class Stepper:
    """Memoised action and environment successors of configurations."""

    def __init__(
        self,
        domains: DomainDecl,
        env: Optional[EnvModel] = None,
        atom_bound: int = ATOM_BOUND,
        unit: str = '',
    ):
        self.domains = domains
        self.env = env or EnvModel()
        self.atom_bound = atom_bound
        self.unit = unit
        self._actions: Dict[Configuration, List[Step]] = {}
        self._env: Dict[Tuple[State, EventContext], List[Tuple[State, EventContext]]] = {}
        self._lock = threading.Lock()

    def actions(self, conf: Configuration) -> List[Step]:
        cached = self._actions.get(conf)
        if cached is None:
            try:
                found = successors(
                    conf.spec, conf.state, conf.ctx, self.domains, self.atom_bound, self.unit
                )
            except DomainEscape as exc:
                exc.configuration = conf
                raise
            cached = [
                (Configuration(spec, state, ctx), label) for spec, state, ctx, label in found
            ]
            with self._lock:
                cached = self._actions.setdefault(conf, cached)
        return cached

    def env_targets(self, state: State, ctx: EventContext) -> List[Tuple[State, EventContext]]:
        if self.env.closed:
            return []
        key = (state, ctx)
        cached = self._env.get(key)
        if cached is None:
            frame = self.env.frame if self.env.frame is not None else self.domains.names
            targets = rel_successors(self.env.rely, state, self.domains, frame)
            contexts = [ctx]
            if self.env.vary_ctx:
                contexts += [ctx.set(unit, event) for unit, event in self.env.ctx_choices]
                contexts = list(dict.fromkeys(contexts))
            cached = [(target, context) for target in targets for context in contexts]
            with self._lock:
                cached = self._env.setdefault(key, cached)
        return cached

    def steps(self, conf: Configuration) -> List[Step]:
        """Actions first, then environment steps."""
        env_steps = [
            (Configuration(conf.spec, state, ctx), ENV)
            for state, ctx in self.env_targets(conf.state, conf.ctx)
        ]
        return self.actions(conf) + env_steps


class FrontierPool:
    """One thread pool per exploration; :meth:`map` keeps frontier order."""

    def __init__(self, jobs: int = 1):
        self.jobs = jobs
        self._executor: Optional[ThreadPoolExecutor] = None

    def __enter__(self) -> 'FrontierPool':
        if self.jobs > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.jobs)
        return self

    def __exit__(self, *exc_info) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def map(self, fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
        if self._executor is None or len(items) < 2:
            return [fn(item) for item in items]
        return list(self._executor.map(fn, items))


def computations(
    subject: Subject,
    state: State,
    ctx: EventContext,
    depth: int,
    env: Optional[EnvModel],
    domains: DomainDecl,
    atom_bound: int = ATOM_BOUND,
    unit: str = '',
) -> Iterator[Computation]:
    """Every computation with at most ``depth`` transitions, depth-first and lazily.

    Each computation is yielded before its extensions; extensions follow the
    order of :meth:`Stepper.steps`.
    """
    if depth < 0:
        raise ValueError('depth must be non-negative')
    stepper = Stepper(domains, env, atom_bound, unit)
    stack: List[Computation] = [singleton(subject, state, ctx)]
    while stack:
        comp = stack.pop()
        yield comp
        if len(comp.edges) < depth:
            for conf, label in reversed(stepper.steps(comp.last)):
                stack.append(comp.extend(conf, label))


def in_assumption(comp: Computation, pre: Expr, rely: Expr) -> bool:
    """Membership in A(pre, R)."""
    if not holds(pre, comp.first.state):
        return False
    return all(
        eval_rel(rely, before.state, after.state)
        for before, label, after in comp.transitions()
        if isinstance(label, EnvStep)
    )


def in_commitment(comp: Computation, guar: Expr, post: Expr) -> bool:
    """Membership in C(G, pst); the post-condition binds only terminated computations."""
    for before, label, after in comp.transitions():
        if is_action(label) and not eval_rel(guar, before.state, after.state):
            return False
    if is_terminated(comp.last.spec):
        return holds(post, comp.last.state)
    return True


def replay(comp: Computation, stepper: Stepper) -> bool:
    """Whether every action edge is a semantics step and env edges keep the spec."""
    for before, label, after in comp.transitions():
        if isinstance(label, EnvStep):
            if after.spec != before.spec:
                return False
            if not stepper.env.closed and not eval_rel(stepper.env.rely, before.state, after.state):
                return False
            continue
        if (after, label) not in stepper.actions(before):
            return False
    return True


def sample_computation(
    subject: Subject,
    state: State,
    ctx: EventContext,
    steps: int,
    env: Optional[EnvModel],
    domains: DomainDecl,
    seed: Union[int, random.Random] = 0,
    atom_bound: int = ATOM_BOUND,
    unit: str = '',
) -> Computation:
    """Random walk of at most ``steps`` transitions; stops early when stuck."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    stepper = Stepper(domains, env, atom_bound, unit)
    comp = singleton(subject, state, ctx)
    for _ in range(steps):
        options = stepper.steps(comp.last)
        if not options:
            break
        conf, label = options[rng.randrange(len(options))]
        comp = comp.extend(conf, label)
    log.debug('Sampled computation of %d transitions', len(comp.edges))
    return comp
