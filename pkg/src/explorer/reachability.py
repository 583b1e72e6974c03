"""Closed-system reachability and direct invariant checking."""

import logging
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, List, Optional, Tuple

from src.core.domains import DomainDecl, State
from src.core.evaluator import holds
from src.core.expressions import Expr
from src.core.solver import states_satisfying
from src.core.syntax import ParallelEventSystem
from src.core.values import render_value
from src.explorer.computations import Computation, EnvModel, FrontierPool, Stepper
from src.explorer.validity import CAP, Parents, path_to
from src.explorer.verdicts import Counterexample, Holds, Verdict
from src.semantics.labels import EMPTY_CONTEXT, Configuration, Label
from src.semantics.steps import ATOM_BOUND
from src.utils.errors import StateSpaceTooLarge

log = logging.getLogger(__name__)


@dataclass
class ExplorationGraph:
    """Configurations discovered breadth-first, with the edge that found each."""

    initial: List[Configuration] = field(default_factory=list)
    parents: Parents = field(default_factory=dict)
    edges: List[Tuple[Configuration, Label, Configuration]] = field(default_factory=list)
    hit: Optional[Configuration] = None

    @property
    def configurations(self) -> List[Configuration]:
        return list(self.parents)

    @property
    def states(self) -> FrozenSet[State]:
        return frozenset(conf.state for conf in self.parents)

    def trace_to(self, conf: Configuration) -> Computation:
        return path_to(self.parents, conf)


def explore(
    ps: ParallelEventSystem,
    init: Expr,
    domains: DomainDecl,
    depth: int,
    atom_bound: int = ATOM_BOUND,
    cap: int = CAP,
    jobs: int = 1,
    stop: Optional[Callable[[Configuration], bool]] = None,
) -> ExplorationGraph:
    """Breadth-first closed exploration, duplicate configurations pruned.

    ``stop`` is called on every newly discovered configuration; the search
    ends at the first one it accepts, recorded as ``hit``.
    """
    if depth < 0:
        raise ValueError('depth must be non-negative')
    stepper = Stepper(domains, EnvModel.closed_system(), atom_bound)
    graph = ExplorationGraph()
    for state in states_satisfying(init, domains, cap=cap):
        conf = Configuration(ps, state, EMPTY_CONTEXT)
        graph.parents[conf] = None
        graph.initial.append(conf)
        if stop is not None and stop(conf):
            graph.hit = conf
            return graph

    frontier = list(graph.initial)
    with FrontierPool(jobs) as pool:
        for level in range(depth):
            following: List[Configuration] = []
            for conf, steps in zip(frontier, pool.map(stepper.actions, frontier)):
                for succ, label in steps:
                    graph.edges.append((conf, label, succ))
                    if succ in graph.parents:
                        continue
                    graph.parents[succ] = (conf, label)
                    following.append(succ)
                    if len(graph.parents) > cap:
                        raise StateSpaceTooLarge(cap, 'configurations')
                    if stop is not None and stop(succ):
                        graph.hit = succ
                        return graph
            log.debug('Level %d: %d new configurations', level + 1, len(following))
            if not following:
                break
            frontier = following
    return graph


def reachable(
    ps: ParallelEventSystem,
    init: Expr,
    domains: DomainDecl,
    depth: int,
    atom_bound: int = ATOM_BOUND,
    cap: int = CAP,
    jobs: int = 1,
) -> FrozenSet[State]:
    """States of closed computations with at most ``depth`` transitions from ``init``."""
    return explore(ps, init, domains, depth, atom_bound, cap, jobs).states


def check_invariant_direct(
    ps: ParallelEventSystem,
    init: Expr,
    invariant: Expr,
    domains: DomainDecl,
    depth: int,
    atom_bound: int = ATOM_BOUND,
    cap: int = CAP,
    jobs: int = 1,
) -> Verdict:
    graph = explore(
        ps, init, domains, depth, atom_bound, cap, jobs,
        stop=lambda conf: not holds(invariant, conf.state),
    )
    if graph.hit is not None:
        detail = f'{render_value(graph.hit.state)} violates the invariant'
        return Counterexample(graph.trace_to(graph.hit), 'invariant', detail)
    return Holds(depth, len(graph.parents))
