"""Executable forms of simulation, serialization and conjoin of computations.

They are used as property checks: every event-system computation must be
serializable into event computations, and the computations of a parallel
event system must be exactly the conjoins of its units' computations.
"""

import logging
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple

from src.core.domains import DomainDecl, State
from src.core.syntax import AnonEvent, Done, Event, ParallelEventSystem
from src.explorer.computations import Computation, EnvModel, Stepper, computations
from src.explorer.validity import CAP
from src.explorer.verdicts import Counterexample, Holds, Verdict
from src.semantics.labels import ENV, Configuration, EnvStep, EventContext, Label
from src.semantics.steps import ATOM_BOUND, step_esys, step_event
from src.utils.errors import StateSpaceTooLarge

log = logging.getLogger(__name__)


def simulation_eq(first: Computation, second: Computation) -> bool:
    """Same length, states, contexts and transition labels; specs are ignored."""
    if len(first) != len(second):
        return False
    for a, b in zip(first.configs, second.configs):
        if a.state != b.state or a.ctx != b.ctx:
            return False
    return first.edges == second.edges


# --- serialization ----------------------------------------------------------

def _acting_unit(comp: Computation) -> str:
    for label in comp.edges:
        if not isinstance(label, EnvStep):
            return label.unit
    return ''


def _finished(event: Event) -> bool:
    return isinstance(event, AnonEvent) and isinstance(event.body, Done)


def _segments(
    comp: Computation,
    event: Event,
    start: int,
    unit: str,
    domains: DomainDecl,
    atom_bound: int,
) -> List[Tuple[int, Computation]]:
    """Event computations matching ``comp`` from index ``start``.

    A segment may stop where the event finishes (the finishing step is the
    junction to the next segment) or run to the end of ``comp``.
    """
    last = len(comp) - 1
    found: List[Tuple[int, Computation]] = []
    begin = comp.configs[start]
    stack = [(start, event, (Configuration(event, begin.state, begin.ctx),), ())]
    while stack:
        index, spec, configs, labels = stack.pop()
        if index == last:
            found.append((index, Computation(configs, labels)))
            continue
        label = comp.edges[index]
        before, after = comp.configs[index], comp.configs[index + 1]
        if isinstance(label, EnvStep):
            conf = Configuration(spec, after.state, after.ctx)
            stack.append((index + 1, spec, configs + (conf,), labels + (label,)))
            continue
        for spec_after, state, ctx, step_label in step_event(
            spec, before.state, before.ctx, unit, domains, atom_bound
        ):
            if step_label != label or state != after.state or ctx != after.ctx:
                continue
            if _finished(spec_after):
                found.append((index, Computation(configs, labels)))
            conf = Configuration(spec_after, state, ctx)
            stack.append((index + 1, spec_after, configs + (conf,), labels + (label,)))
    return found


def serialization_witness(
    comp: Computation,
    events: Iterable[Event],
    seg_bound: int,
    domains: DomainDecl,
    atom_bound: int = ATOM_BOUND,
    unit: Optional[str] = None,
) -> Optional[List[Computation]]:
    """Event computations whose concatenation simulates ``comp``, or None.

    At most ``seg_bound`` segments are tried.
    """
    pool = list(events)
    acting = _acting_unit(comp) if unit is None else unit
    last = len(comp) - 1
    failed: Set[Tuple[int, int]] = set()

    def search(start: int, remaining: int) -> Optional[List[Computation]]:
        if remaining <= 0 or (start, remaining) in failed:
            return None
        for event in pool:
            for end, segment in _segments(comp, event, start, acting, domains, atom_bound):
                if end == last:
                    return [segment]
                rest = search(end + 1, remaining - 1)
                if rest is not None:
                    return [segment] + rest
        failed.add((start, remaining))
        return None

    witness = search(0, seg_bound)
    if witness is not None:
        joined = Computation(
            tuple(conf for segment in witness for conf in segment.configs),
            tuple(comp.edges),
        )
        if not simulation_eq(comp, joined):
            return None
    return witness


# --- conjoin ----------------------------------------------------------------

def conjoin_check(comp: Computation, family: Mapping[str, Computation]) -> bool:
    """Whether ``comp`` of a parallel system and the per-unit ``family`` conjoin."""
    head = comp.first.spec
    if not isinstance(head, ParallelEventSystem) or set(family) != set(head.units):
        return False
    for unit, part in family.items():
        if len(part) != len(comp):
            return False
        for whole, local in zip(comp.configs, part.configs):
            if whole.state != local.state or whole.ctx != local.ctx:
                return False
            if not isinstance(whole.spec, ParallelEventSystem) or whole.spec.system(unit) != local.spec:
                return False
    for index, label in enumerate(comp.edges):
        if isinstance(label, EnvStep):
            if any(not isinstance(part.edges[index], EnvStep) for part in family.values()):
                return False
            continue
        for unit, part in family.items():
            expected = label if unit == label.unit else ENV
            if part.edges[index] != expected:
                return False
    return True


def decompose(comp: Computation) -> Dict[str, Computation]:
    """Per-unit projection of a parallel computation."""
    units = comp.first.spec.units
    family = {}
    for unit in units:
        configs = tuple(
            Configuration(conf.spec.system(unit), conf.state, conf.ctx) for conf in comp.configs
        )
        edges = tuple(
            label if not isinstance(label, EnvStep) and label.unit == unit else ENV
            for label in comp.edges
        )
        family[unit] = Computation(configs, edges)
    return family


def _component_env_step(conf: Configuration, state: State, ctx: EventContext) -> Configuration:
    """A unit observing another unit's action as an environment step."""
    return Configuration(conf.spec, state, ctx)


def _is_component_computation(
    part: Computation, unit: str, domains: DomainDecl, atom_bound: int
) -> bool:
    for before, label, after in part.transitions():
        if isinstance(label, EnvStep):
            if after.spec != before.spec:
                return False
            continue
        options = step_esys(before.spec, before.state, before.ctx, unit, domains, atom_bound)
        if (after.spec, after.state, after.ctx, label) not in options:
            return False
    return True


def _compose(units: Tuple[str, ...], family: Tuple[Computation, ...], edges: Tuple[Label, ...]) -> Computation:
    configs = []
    for index, anchor in enumerate(family[0].configs):
        systems = tuple((unit, part.configs[index].spec) for unit, part in zip(units, family))
        configs.append(Configuration(ParallelEventSystem(systems), anchor.state, anchor.ctx))
    return Computation(tuple(configs), edges)


def _conjoined(
    ps: ParallelEventSystem,
    state: State,
    ctx: EventContext,
    depth: int,
    env: EnvModel,
    domains: DomainDecl,
    atom_bound: int,
    cap: int,
) -> List[Tuple[Computation, Dict[str, Computation]]]:
    """Every family of unit computations that can conjoin, with its composition."""
    units = ps.units
    env_stepper = Stepper(domains, env, atom_bound)
    start = tuple(
        Computation((Configuration(system, state, ctx),)) for _, system in ps.systems
    )
    results = []
    stack: List[Tuple[Tuple[Computation, ...], Tuple[Label, ...]]] = [(start, ())]
    while stack:
        family, edges = stack.pop()
        results.append((_compose(units, family, edges), dict(zip(units, family))))
        if len(results) > cap:
            raise StateSpaceTooLarge(cap, 'computations')
        if len(edges) >= depth:
            continue
        extensions = []
        now = family[0].last
        for actor, part in zip(units, family):
            local = part.last
            for spec, after, after_ctx, label in step_esys(
                local.spec, local.state, local.ctx, actor, domains, atom_bound
            ):
                grown = tuple(
                    other.extend(Configuration(spec, after, after_ctx), label)
                    if unit == actor
                    else other.extend(_component_env_step(other.last, after, after_ctx), ENV)
                    for unit, other in zip(units, family)
                )
                extensions.append((grown, edges + (label,)))
        for after, after_ctx in env_stepper.env_targets(now.state, now.ctx):
            grown = tuple(
                other.extend(Configuration(other.last.spec, after, after_ctx), ENV) for other in family
            )
            extensions.append((grown, edges + (ENV,)))
        stack.extend(reversed(extensions))
    return results


def check_compositional(
    ps: ParallelEventSystem,
    state: State,
    ctx: EventContext,
    depth: int,
    domains: DomainDecl,
    atom_bound: int = ATOM_BOUND,
    env: Optional[EnvModel] = None,
    cap: int = CAP,
) -> Verdict:
    """Compare the computations of ``ps`` with the conjoins of its units' computations.

    Both sides are built explicitly up to ``depth`` transitions: every
    computation of ``ps`` must project to unit computations that conjoin
    with it, and every conjoinable family must compose to a computation of
    ``ps``.
    """
    env = env or EnvModel.closed_system()
    whole: Dict[Computation, None] = {}
    for comp in computations(ps, state, ctx, depth, env, domains, atom_bound):
        whole[comp] = None
        if len(whole) > cap:
            raise StateSpaceTooLarge(cap, 'computations')

    for comp in whole:
        family = decompose(comp)
        for unit, part in family.items():
            if not _is_component_computation(part, unit, domains, atom_bound):
                return Counterexample(comp, 'decomposition', f'projection on {unit} is not a computation')
        if not conjoin_check(comp, family):
            return Counterexample(comp, 'conjoin', 'projection does not conjoin')

    composed = _conjoined(ps, state, ctx, depth, env, domains, atom_bound, cap)
    for comp, family in composed:
        if not conjoin_check(comp, family):
            return Counterexample(comp, 'conjoin', 'unit computations do not conjoin')
        if comp not in whole:
            return Counterexample(comp, 'composition', 'conjoin is not a computation of the system')
    if len(composed) != len(whole):
        detail = f'{len(whole)} computations against {len(composed)} conjoins'
        return Counterexample(next(iter(whole)), 'count', detail)
    log.debug('Compositionality holds with %d computations', len(whole))
    return Holds(depth, len(whole))
