"""Bounded rely-guarantee validity: every computation in A(pre, R) lies in C(G, pst)."""

import logging
from typing import Dict, Iterable, List, Optional, Tuple

from src.core.domains import DomainDecl, State
from src.core.evaluator import eval_rel, holds
from src.core.solver import states_satisfying
from src.core.spec import RGCond
from src.core.syntax import Subject, is_terminated
from src.core.values import render_value
from src.explorer.computations import (
    Computation,
    EnvModel,
    FrontierPool,
    Stepper,
    computations,
    in_assumption,
    in_commitment,
)
from src.explorer.verdicts import Counterexample, Holds, Verdict
from src.semantics.labels import EMPTY_CONTEXT, Configuration, Label, is_action
from src.semantics.steps import ATOM_BOUND
from src.utils.errors import StateSpaceTooLarge

log = logging.getLogger(__name__)

CAP = 1000000

Parents = Dict[Configuration, Optional[Tuple[Configuration, Label]]]


def path_to(parents: Parents, conf: Configuration) -> Computation:
    """The breadth-first path that discovered ``conf``."""
    configs: List[Configuration] = [conf]
    labels: List[Label] = []
    link = parents[conf]
    while link is not None:
        previous, label = link
        configs.append(previous)
        labels.append(label)
        link = parents[previous]
    return Computation(tuple(reversed(configs)), tuple(reversed(labels)))


def _guarantee_detail(label: Label, before: State, after: State) -> str:
    return f'{label} from {render_value(before)} to {render_value(after)} is outside the guarantee'


def _post_detail(state: State) -> str:
    return f'terminated in {render_value(state)}, outside the post-condition'


def check_validity(
    subject: Subject,
    rg: RGCond,
    domains: DomainDecl,
    depth: int,
    atom_bound: int = ATOM_BOUND,
    cap: int = CAP,
    unit: str = '',
    vary_ctx: bool = False,
    exhaustive: bool = False,
    jobs: int = 1,
    initial: Optional[Iterable[State]] = None,
) -> Verdict:
    """Check ``subject sat rg`` on all computations of at most ``depth`` transitions.

    The default search walks configurations breadth-first with a visited
    set; ``exhaustive`` enumerates computations one by one instead. Both
    decide the same question because A only constrains the first state and
    the environment edges, and C only the action edges and the last state.
    """
    if depth < 0:
        raise ValueError('depth must be non-negative')
    env = EnvModel.from_rely(rg.rely, subject, vary_ctx)
    starts = list(initial) if initial is not None else states_satisfying(rg.pre, domains, cap=cap)
    log.debug('Validity of %s from %d initial states, depth %d', unit or 'subject', len(starts), depth)
    if exhaustive:
        return _check_exhaustive(subject, rg, domains, depth, atom_bound, cap, unit, env, starts)

    stepper = Stepper(domains, env, atom_bound, unit)
    parents: Parents = {}
    frontier: List[Configuration] = []
    for state in starts:
        conf = Configuration(subject, state, EMPTY_CONTEXT)
        if conf not in parents:
            parents[conf] = None
            frontier.append(conf)

    with FrontierPool(jobs) as pool:
        for level in range(depth + 1):
            for conf in frontier:
                if is_terminated(conf.spec) and not holds(rg.post, conf.state):
                    return Counterexample(path_to(parents, conf), 'post', _post_detail(conf.state))
            if level == depth or not frontier:
                break
            following: List[Configuration] = []
            for conf, steps in zip(frontier, pool.map(stepper.steps, frontier)):
                for succ, label in steps:
                    if is_action(label) and not eval_rel(rg.guar, conf.state, succ.state):
                        trace = path_to(parents, conf).extend(succ, label)
                        detail = _guarantee_detail(label, conf.state, succ.state)
                        return Counterexample(trace, 'guarantee', detail)
                    if succ not in parents:
                        parents[succ] = (conf, label)
                        following.append(succ)
                        if len(parents) > cap:
                            raise StateSpaceTooLarge(cap, 'configurations')
            frontier = following
    return Holds(depth, len(parents))


def _violated_clause(comp: Computation, rg: RGCond) -> Tuple[str, str]:
    for before, label, after in comp.transitions():
        if is_action(label) and not eval_rel(rg.guar, before.state, after.state):
            return 'guarantee', _guarantee_detail(label, before.state, after.state)
    return 'post', _post_detail(comp.last.state)


def _check_exhaustive(
    subject: Subject,
    rg: RGCond,
    domains: DomainDecl,
    depth: int,
    atom_bound: int,
    cap: int,
    unit: str,
    env: EnvModel,
    starts: List[State],
) -> Verdict:
    count = 0
    for state in starts:
        for comp in computations(subject, state, EMPTY_CONTEXT, depth, env, domains, atom_bound, unit):
            count += 1
            if count > cap:
                raise StateSpaceTooLarge(cap, 'computations')
            if not in_assumption(comp, rg.pre, rg.rely):
                continue
            if not in_commitment(comp, rg.guar, rg.post):
                clause, detail = _violated_clause(comp, rg)
                return Counterexample(comp, clause, detail)
    return Holds(depth, count)
