"""Backtracking search over finite domains.

Every question the prover and the explorer ask about sets of states or
pairs of states ends up here: "which states satisfy p", "which successors
does r allow from s", and "is there a pair in D violating T".

Variables are searched as slots ``(name, primed)``. Slots are bound one at
a time; a conjunct is checked as soon as all of its slots are bound, and an
equation ``v = e`` binds ``v`` directly once ``e`` is computable. Variables
that only occur in ``v' = v`` atoms or frame atoms are not enumerated at
all: whether they change is decided by the hypothesis, and targets are
evaluated under the worst case.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from src.core.domains import DomainDecl, State
from src.core.evaluator import (
    UNKNOWN,
    Reader,
    compile_expr,
    compile_partial,
    full_frame,
    unroll,
)
from src.core.expressions import (
    FALSE,
    TRUE,
    Binary,
    Expr,
    Frame,
    Lit,
    Quant,
    Unary,
    Var,
    frame_atoms,
    keep_var,
    primed_vars,
    var_occurrences,
)
from src.core.values import Value, value_key, values_equal
from src.utils.errors import EvalError, MissingFrame, StateSpaceTooLarge

log = logging.getLogger(__name__)

Slot = Tuple[str, bool]

DNF_LIMIT = 256

_FLIP = {'=': '/=', '/=': '=', '<': '>=', '<=': '>', '>': '<=', '>=': '<'}


# --- normal forms ------------------------------------------------------------

def to_nnf(expr: Expr, positive: bool = True) -> Expr:
    """Push negations down to atoms; implications become disjunctions."""
    if isinstance(expr, Unary) and expr.op == 'not':
        return to_nnf(expr.arg, not positive)
    if isinstance(expr, Binary) and expr.op in ('and', 'or'):
        op = expr.op if positive else ('or' if expr.op == 'and' else 'and')
        return Binary(op, to_nnf(expr.left, positive), to_nnf(expr.right, positive))
    if isinstance(expr, Binary) and expr.op == 'implies':
        if positive:
            return Binary('or', to_nnf(expr.left, False), to_nnf(expr.right, True))
        return Binary('and', to_nnf(expr.left, True), to_nnf(expr.right, False))
    if isinstance(expr, Quant):
        return to_nnf(unroll(expr), positive)
    if positive:
        return expr
    if expr == TRUE:
        return FALSE
    if expr == FALSE:
        return TRUE
    if isinstance(expr, Binary) and expr.op in _FLIP:
        return Binary(_FLIP[expr.op], expr.left, expr.right)
    return Unary('not', expr)


def dnf(expr: Expr, limit: int = DNF_LIMIT) -> List[Tuple[Expr, ...]]:
    """Disjuncts of ``expr`` as conjunct tuples; oversized products stay atoms."""
    result: List[Tuple[Expr, ...]] = []
    for disjunct in _dnf(to_nnf(expr), limit):
        unique = tuple(dict.fromkeys(disjunct))
        if unique not in result:
            result.append(unique)
    return result


def _dnf(expr: Expr, limit: int) -> List[Tuple[Expr, ...]]:
    if expr == TRUE:
        return [()]
    if expr == FALSE:
        return []
    if isinstance(expr, Binary) and expr.op == 'or':
        return _dnf(expr.left, limit) + _dnf(expr.right, limit)
    if isinstance(expr, Binary) and expr.op == 'and':
        left = _dnf(expr.left, limit)
        right = _dnf(expr.right, limit)
        if len(left) * len(right) > limit:
            return [(expr,)]
        return [a + b for a in left for b in right]
    return [(expr,)]


# --- search plans ------------------------------------------------------------

@dataclass
class _Plan:
    order: List[Slot]
    equations: List[Optional[Reader]]
    checks: List[List[Reader]]
    initial: List[Reader]
    pools: List[Tuple[Value, ...]]


def _plan(
    slots: Iterable[Slot],
    conjuncts: Sequence[Tuple[Reader, FrozenSet[Slot]]],
    equations: Mapping[Slot, Sequence[Tuple[Reader, FrozenSet[Slot]]]],
    domains: DomainDecl,
    placed: Iterable[Slot] = (),
) -> _Plan:
    bound: Set[Slot] = set(placed)
    remaining = sorted(set(slots), key=lambda s: (s[1], domains.size(s[0]), s[0]))
    order: List[Slot] = []
    chosen_equations: List[Optional[Reader]] = []
    while remaining:
        choice: Tuple[Slot, Optional[Reader]] = (remaining[0], None)
        for slot in remaining:
            ready = next((r for r, deps in equations.get(slot, ()) if deps <= bound), None)
            if ready is not None:
                choice = (slot, ready)
                break
        slot, reader = choice
        remaining.remove(slot)
        bound.add(slot)
        order.append(slot)
        chosen_equations.append(reader)

    index = {slot: i for i, slot in enumerate(order)}
    checks: List[List[Reader]] = [[] for _ in order]
    initial: List[Reader] = []
    for reader, needed in conjuncts:
        levels = [index[s] for s in needed if s in index]
        if levels:
            checks[max(levels)].append(reader)
        else:
            initial.append(reader)
    pools = [domains.values(name) for name, _ in order]
    return _Plan(order, chosen_equations, checks, initial, pools)


def _passes(check: Reader, pre: Mapping, post: Mapping) -> bool:
    try:
        return check(pre, post) is True
    except EvalError:
        return False


def _run(plan: _Plan, domains: DomainDecl, pre: Dict, post: Dict, on_leaf: Callable[[], bool]) -> bool:
    """Depth-first over the plan; returns True when ``on_leaf`` asked to stop."""
    for check in plan.initial:
        if not _passes(check, pre, post):
            return False
    names = [name for name, _ in plan.order]
    sides = [post if primed else pre for _, primed in plan.order]
    depth = len(plan.order)
    contains = domains.contains

    def descend(level: int) -> bool:
        if level == depth:
            return on_leaf()
        name = names[level]
        target = sides[level]
        equation = plan.equations[level]
        if equation is not None:
            try:
                value = equation(pre, post)
            except EvalError:
                return False
            if not contains(name, value):
                return False
            pool: Sequence[Value] = (value,)
        else:
            pool = plan.pools[level]
        checks = plan.checks[level]
        for value in pool:
            target[name] = value
            for check in checks:
                if not _passes(check, pre, post):
                    break
            else:
                if descend(level + 1):
                    return True
        target.pop(name, None)
        return False

    return descend(0)


# --- problem analysis --------------------------------------------------------

@dataclass
class _TargetScan:
    mentions: Set[Slot] = field(default_factory=set)
    keep_pos: Set[str] = field(default_factory=set)
    keep_neg: Set[str] = field(default_factory=set)
    frames_pos: List[FrozenSet[str]] = field(default_factory=list)
    frames_neg: List[FrozenSet[str]] = field(default_factory=list)

    def scan(self, expr: Expr, positive: bool = True) -> None:
        if isinstance(expr, Unary) and expr.op == 'not':
            self.scan(expr.arg, not positive)
        elif isinstance(expr, Binary) and expr.op in ('and', 'or'):
            self.scan(expr.left, positive)
            self.scan(expr.right, positive)
        elif isinstance(expr, Binary) and expr.op == 'implies':
            self.scan(expr.left, not positive)
            self.scan(expr.right, positive)
        elif isinstance(expr, Quant):
            self.scan(unroll(expr), positive)
        elif keep_var(expr) is not None:
            (self.keep_pos if positive else self.keep_neg).add(keep_var(expr))
        elif isinstance(expr, Frame):
            (self.frames_pos if positive else self.frames_neg).append(frozenset(expr.changed))
        else:
            self.mentions |= var_occurrences(expr)
            self.frames_neg.extend(frozenset(a.changed) for a in frame_atoms(expr))


def _specialise(expr: Expr, hidden: Set[str], changed: Set[str]) -> Expr:
    """Decide ``v' = v`` atoms on untracked variables."""
    if isinstance(expr, Unary) and expr.op == 'not':
        return Unary('not', _specialise(expr.arg, hidden, changed))
    if isinstance(expr, Binary) and expr.op in ('and', 'or', 'implies'):
        return Binary(
            expr.op,
            _specialise(expr.left, hidden, changed),
            _specialise(expr.right, hidden, changed),
        )
    if isinstance(expr, Quant):
        return _specialise(unroll(expr), hidden, changed)
    name = keep_var(expr)
    if name is not None and name in hidden:
        return Lit(name not in changed)
    return expr


def _make_frame_check(both: Set[str], changed: Set[str]):
    ordered = sorted(both)

    def frame_check(kept_out: FrozenSet[str], pre: Mapping, post: Mapping):
        if changed and not changed <= kept_out:
            return False
        result = True
        for name in ordered:
            if name in kept_out:
                continue
            before = pre.get(name, UNKNOWN)
            after = post.get(name, UNKNOWN)
            if before is UNKNOWN or after is UNKNOWN:
                result = UNKNOWN
            elif not values_equal(before, after):
                return False
        return result

    return frame_check


@dataclass
class SearchResult:
    """Outcome of a counterexample search; ``witness`` is ``(pre, post)`` when found."""

    witness: Optional[Tuple[Dict[str, Value], Dict[str, Value]]] = None
    failed: Optional[Expr] = None
    examined: int = 0
    error: Optional[str] = None

    @property
    def holds(self) -> bool:
        return self.witness is None


class _Union:
    def __init__(self) -> None:
        self.parent: Dict[Slot, Slot] = {}

    def find(self, slot: Slot) -> Slot:
        self.parent.setdefault(slot, slot)
        while self.parent[slot] != slot:
            self.parent[slot] = self.parent[self.parent[slot]]
            slot = self.parent[slot]
        return slot

    def join(self, slots: Iterable[Slot]) -> None:
        items = list(slots)
        for other in items[1:]:
            self.parent[self.find(other)] = self.find(items[0])
        if items:
            self.find(items[0])


class _Problem:
    """One hypothesis disjunct against a list of targets."""

    def __init__(self, domains: DomainDecl, hypotheses: Sequence[Expr], targets: Sequence[Expr]):
        self.domains = domains
        all_vars = set(domains.names)

        mentions: Set[Slot] = set()
        keeps: Set[str] = set()
        frames: List[FrozenSet[str]] = []
        nested_frames: List[FrozenSet[str]] = []
        for hyp in hypotheses:
            if keep_var(hyp) is not None:
                keeps.add(keep_var(hyp))
            elif isinstance(hyp, Frame):
                frames.append(frozenset(hyp.changed))
            else:
                mentions |= var_occurrences(hyp)
                nested_frames.extend(frozenset(a.changed) for a in frame_atoms(hyp))

        scan = _TargetScan()
        for target in targets:
            scan.scan(target)
        mentions |= scan.mentions

        forced: Set[str] = set(scan.keep_neg)
        for kept_out in nested_frames + scan.frames_neg:
            forced |= all_vars - kept_out
        tracked = {name for name, _ in mentions} | forced

        hidden = all_vars - tracked
        unchanged = {v for v in hidden if v in keeps or any(v not in w for w in frames)}
        self.changed = {v for v in hidden - unchanged if domains.size(v) >= 2}

        every_frame = frames + nested_frames + scan.frames_pos + scan.frames_neg
        keep_names = keeps | scan.keep_pos | scan.keep_neg
        both = {
            v for v in tracked
            if v in keep_names or any(v not in w for w in every_frame)
        }
        self.slots: Set[Slot] = {s for s in mentions if s[0] in tracked}
        self.slots |= {(v, side) for v in both for side in (False, True)}
        self.both = both

        frame_check = _make_frame_check(both, self.changed)
        self.frame_check = frame_check

        self.conjuncts: List[Tuple[Reader, FrozenSet[Slot]]] = []
        self.equations: Dict[Slot, List[Tuple[Reader, FrozenSet[Slot]]]] = {}
        for hyp in hypotheses:
            name = keep_var(hyp)
            if name is not None and name in hidden:
                continue
            needed = self._slots_of(hyp)
            self.conjuncts.append((compile_expr(hyp, frame_check), needed))
            if isinstance(hyp, Frame):
                for v in both - set(hyp.changed):
                    self._equation((v, True), Var(v, False))
                    self._equation((v, False), Var(v, True))
            elif isinstance(hyp, Binary) and hyp.op == '=':
                for lhs, rhs in ((hyp.left, hyp.right), (hyp.right, hyp.left)):
                    if isinstance(lhs, Var):
                        self._equation((lhs.name, lhs.primed), rhs)

        self.targets = [_specialise(t, hidden, self.changed) for t in targets]
        self.target_slots = [self._slots_of(t) for t in self.targets]

    def _slots_of(self, expr: Expr) -> FrozenSet[Slot]:
        found = set(var_occurrences(expr))
        for atom in frame_atoms(expr):
            for v in self.both - set(atom.changed):
                found.add((v, False))
                found.add((v, True))
        return frozenset(found)

    def _equation(self, slot: Slot, rhs: Expr) -> None:
        deps = self._slots_of(rhs)
        if slot in deps or slot not in self.slots:
            return
        reader = compile_expr(rhs, self.frame_check)
        self.equations.setdefault(slot, []).append((reader, deps))

    def solve(self, cap: Optional[int]) -> SearchResult:
        result = SearchResult()
        union = _Union()
        for slot in self.slots:
            union.find(slot)
        for _, needed in self.conjuncts:
            union.join(needed)
        for needed in self.target_slots:
            union.join(needed)

        main_roots = {union.find(s) for needed in self.target_slots for s in needed}
        components: Dict[Slot, Set[Slot]] = {}
        for slot in self.slots:
            components.setdefault(union.find(slot), set()).add(slot)

        side_pre: Dict[str, Value] = {}
        side_post: Dict[str, Value] = {}
        for root, members in sorted(components.items()):
            if root in main_roots:
                continue
            found = self._first_solution(members)
            if found is None:
                return result
            side_pre.update(found[0])
            side_post.update(found[1])

        main = {s for root in main_roots for s in components[root]}
        main_conjuncts = [(r, n) for r, n in self.conjuncts if n <= main]
        constrained = set().union(*[n for _, n in main_conjuncts]) if main_conjuncts else set()
        constrained |= {s for s in main if s in self.equations}
        free = main - constrained
        plan = _plan(constrained, main_conjuncts, self.equations, self.domains)
        free_plan = _plan(free, [], {}, self.domains, placed=constrained)

        strict = [compile_expr(t, self.frame_check) for t in self.targets]
        partial = [compile_partial(t, self.frame_check) for t in self.targets]
        pre: Dict[str, Value] = {}
        post: Dict[str, Value] = {}

        def check_targets() -> bool:
            result.examined += 1
            if cap is not None and result.examined > cap:
                raise StateSpaceTooLarge(cap, 'pairs')
            for target, reader in zip(self.targets, strict):
                try:
                    ok = reader(pre, post) is True
                except EvalError as exc:
                    ok = False
                    result.error = str(exc)
                if not ok:
                    witness_pre = dict(side_pre)
                    witness_pre.update(pre)
                    witness_post = dict(side_post)
                    witness_post.update(post)
                    result.witness = (witness_pre, witness_post)
                    result.failed = target
                    return True
            return False

        def on_constrained_leaf() -> bool:
            if not free:
                return check_targets()
            if all(reader(pre, post) is True for reader in partial):
                result.examined += 1
                return False
            return _run(free_plan, self.domains, pre, post, check_targets)

        _run(plan, self.domains, pre, post, on_constrained_leaf)
        return result

    def _first_solution(self, members: Set[Slot]) -> Optional[Tuple[Dict, Dict]]:
        conjuncts = [(r, n) for r, n in self.conjuncts if n and n <= members]
        plan = _plan(members, conjuncts, self.equations, self.domains)
        pre: Dict[str, Value] = {}
        post: Dict[str, Value] = {}
        found: List[Tuple[Dict, Dict]] = []

        def stop() -> bool:
            found.append((dict(pre), dict(post)))
            return True

        _run(plan, self.domains, pre, post, stop)
        return found[0] if found else None


def find_counterexample(
    hypotheses: Sequence[Expr],
    targets: Sequence[Expr],
    domains: DomainDecl,
    cap: Optional[int] = None,
) -> SearchResult:
    """Search a pair satisfying every hypothesis conjunct but violating a target."""
    problem = _Problem(domains, hypotheses, targets)
    for reader, needed in problem.conjuncts:
        if not needed and not _passes(reader, {}, {}):
            return SearchResult()
    outcome = problem.solve(cap)
    if not outcome.holds:
        log.debug("counterexample for %s: %s", outcome.failed, outcome.witness)
    return outcome


def check_implication(
    hypothesis: Expr,
    targets: Sequence[Expr],
    domains: DomainDecl,
    cap: Optional[int] = None,
    extra: Sequence[Expr] = (),
    skip: Optional[Callable[[Tuple[Expr, ...]], bool]] = None,
) -> SearchResult:
    """Every pair (or state) in ``extra AND hypothesis`` satisfies all targets."""
    total = 0
    for disjunct in dnf(hypothesis):
        if skip is not None and skip(disjunct):
            continue
        outcome = find_counterexample(tuple(extra) + disjunct, targets, domains, cap)
        total += outcome.examined
        if not outcome.holds:
            outcome.examined = total
            return outcome
    return SearchResult(examined=total)


# --- state enumeration -------------------------------------------------------

def _pre_conjuncts(disjunct: Sequence[Expr]):
    conjuncts = []
    equations: Dict[Slot, List[Tuple[Reader, FrozenSet[Slot]]]] = {}
    for atom in disjunct:
        conjuncts.append((compile_expr(atom), var_occurrences(atom)))
        if isinstance(atom, Binary) and atom.op == '=':
            for lhs, rhs in ((atom.left, atom.right), (atom.right, atom.left)):
                if isinstance(lhs, Var):
                    slot = (lhs.name, lhs.primed)
                    deps = var_occurrences(rhs)
                    if slot not in deps:
                        equations.setdefault(slot, []).append((compile_expr(rhs), deps))
    return conjuncts, equations


def states_satisfying(
    predicate: Expr,
    domains: DomainDecl,
    names: Optional[Iterable[str]] = None,
    cap: Optional[int] = None,
    first_only: bool = False,
) -> List[State]:
    """States over ``names`` (default: all variables) satisfying ``predicate``, canonical order."""
    chosen = sorted(domains.names if names is None else set(names))
    chosen_set = set(chosen)
    found: Dict[State, None] = {}
    for disjunct in dnf(predicate):
        conjuncts, equations = _pre_conjuncts(disjunct)
        extra = {s for _, n in conjuncts for s in n if s[0] not in chosen_set}
        slots = [(name, False) for name in chosen] + sorted(extra)
        plan = _plan(slots, conjuncts, equations, domains)
        pre: Dict[str, Value] = {}
        post: Dict[str, Value] = {}

        def record() -> bool:
            found[State((k, v) for k, v in pre.items() if k in chosen_set)] = None
            if cap is not None and len(found) > cap:
                raise StateSpaceTooLarge(cap, 'states')
            return first_only

        if _run(plan, domains, pre, post, record):
            break
    return sorted(found, key=value_key)


def satisfiable(predicate: Expr, domains: DomainDecl, names: Optional[Iterable[str]] = None) -> Optional[State]:
    states = states_satisfying(predicate, domains, names, first_only=True)
    return states[0] if states else None


def rel_successors(
    relation: Expr,
    state: Mapping[str, Value],
    domains: DomainDecl,
    frame: Optional[Iterable[str]] = None,
) -> List[State]:
    """Post-states ``t`` with ``(state, t)`` in ``relation``, canonical order.

    Without an explicit frame only the variables the relation mentions primed
    (or releases through a frame atom) may change.
    """
    atoms = frame_atoms(relation)
    if frame is None:
        changing = set(primed_vars(relation))
        for atom in atoms:
            changing |= set(atom.changed)
        if not changing and not atoms:
            if not dnf(relation):
                return []
            raise MissingFrame(relation)
    else:
        changing = set(frame)
    changing &= set(state)

    pre = dict(state)
    results: Dict[State, None] = {}
    for disjunct in dnf(relation):
        fixed_post = {k: v for k, v in state.items() if k not in changing}
        conjuncts = []
        equations: Dict[Slot, List[Tuple[Reader, FrozenSet[Slot]]]] = {}
        for atom in disjunct:
            needed = {s for s in var_occurrences(atom) if s[1] and s[0] in changing}
            if frame_atoms(atom):
                needed |= {(v, True) for v in changing}
            conjuncts.append((compile_expr(atom, full_frame), frozenset(needed)))
            if isinstance(atom, Binary) and atom.op == '=':
                for lhs, rhs in ((atom.left, atom.right), (atom.right, atom.left)):
                    if isinstance(lhs, Var) and lhs.primed and lhs.name in changing:
                        deps = frozenset(s for s in var_occurrences(rhs) if s[1] and s[0] in changing)
                        if (lhs.name, True) not in deps:
                            equations.setdefault((lhs.name, True), []).append(
                                (compile_expr(rhs, full_frame), deps)
                            )
        slots = [(name, True) for name in sorted(changing)]
        plan = _plan(slots, conjuncts, equations, domains)
        post = dict(fixed_post)

        def record() -> bool:
            results[State(post)] = None
            return False

        _run(plan, domains, pre, post, record)
    return sorted(results, key=value_key)
