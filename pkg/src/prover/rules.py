"""Premise checking for every rely-guarantee proof rule.

Each rule reports its premises under the numbering used in the rule
statements: for example EvtSet always reports eight premise groups and Par
six, even when a group has no instance (a single unit has no pair of
distinct units to compare). Sub-derivation premises pass when the child
node carries exactly the condition the rule prescribes and is itself
accepted.
"""

import logging
from typing import Iterable, List, Optional, Sequence, Tuple

from src.core.domains import DomainDecl
from src.core.evaluator import eval_rel, holds
from src.core.expressions import (
    Expr,
    Frame,
    and_all,
    assignment_relation,
    conj,
    frame_atoms,
    negate,
    or_all,
    prime,
    variables,
)
from src.core.solver import SearchResult, check_implication, rel_successors, satisfiable, states_satisfying
from src.core.spec import RGCond
from src.core.values import render_value
from src.core.syntax import (
    AnonEvent,
    Await,
    Basic,
    BasicEvent,
    Cond,
    EvtSeq,
    EvtSet,
    Nondt,
    ParallelEventSystem,
    Program,
    Seq,
    While,
    reads_writes,
)
from src.prover.annotations import AnnotatedNode, describe, state_predicate, with_pre
from src.prover.obligations import PAIR_CAP, Obligations, framed
from src.prover.report import Premise, ProofNode, ProofReport
from src.semantics.steps import ATOM_BOUND, atomic_runs
from src.utils.errors import EvalError, MissingAnnotation

log = logging.getLogger(__name__)


def _same(a: RGCond, b: RGCond) -> bool:
    return a.pre == b.pre and a.rely == b.rely and a.guar == b.guar and a.post == b.post


class DerivationChecker:
    """Checks annotated derivations over one finite universe."""

    def __init__(self, domains: DomainDecl, atom_bound: int = ATOM_BOUND, cap: Optional[int] = PAIR_CAP):
        self.domains = domains
        self.atom_bound = atom_bound
        self.cap = cap
        self.obligations = Obligations(domains, cap)

    # --- premise helpers -----------------------------------------------------

    @staticmethod
    def _from(group: int, text: str, result: SearchResult, key: str = '') -> Premise:
        return Premise(group, text, result.holds, result.witness, key)

    def _stable(self, group: int, name: str, pred: Expr, rely: Expr) -> Premise:
        return self._from(group, f'stable({name}, R)', self.obligations.stable(pred, rely))

    def _reflexive(self, group: int, guar: Expr) -> Premise:
        return self._from(group, 'Id <= G', self.obligations.reflexive(guar))

    def _derivation(
        self,
        group: int,
        child: AnnotatedNode,
        checked: ProofNode,
        node: object,
        expected: Optional[RGCond],
        key: str = '',
    ) -> Premise:
        shaped = child.node == node and (expected is None or _same(child.rg, expected))
        text = f'derivation of {checked.subject}'
        if not shaped:
            text += ' (condition differs from the rule)'
        return Premise(group, text, shaped and checked.accepted, key=key)

    @staticmethod
    def _group(group: int, text: str, premises: List[Premise]) -> List[Premise]:
        return premises or [Premise(group, f'{text} (no instance)', True)]

    def _children(self, a: AnnotatedNode, node_id: str, count: int) -> List[ProofNode]:
        if len(a.children) != count:
            raise MissingAnnotation(f'{describe(a)}: {a.rule} needs {count} sub-derivations')
        return [self.check(child, f'{node_id}.{i}') for i, child in enumerate(a.children)]

    # --- dispatch --------------------------------------------------------------

    def check(self, a: AnnotatedNode, node_id: str = '0') -> ProofNode:
        if a.rule == 'Conseq':
            result = self._conseq(a, node_id)
        elif a.rule == 'UnPre':
            result = self._un_pre(a, node_id)
        elif a.rule == 'IntPost':
            result = self._int_post(a, node_id)
        elif a.rule == 'UnivPre':
            result = self._univ_pre(a, node_id)
        elif a.rule == 'EmptyPre':
            result = self._empty_pre(a, node_id)
        elif isinstance(a.node, Program):
            if satisfiable(a.rg.pre, self.domains) is None:
                result = self._empty_pre(a, node_id)
            else:
                result = self._program(a, node_id)
        elif isinstance(a.node, BasicEvent):
            result = self._basic_event(a, node_id)
        elif isinstance(a.node, AnonEvent):
            result = self._inner(a, node_id)
        elif isinstance(a.node, EvtSeq):
            result = self._evt_seq(a, node_id)
        elif isinstance(a.node, EvtSet):
            result = self._evt_set(a, node_id)
        elif isinstance(a.node, ParallelEventSystem):
            result = self._par(a, node_id)
        else:
            raise TypeError(f'No proof rule for {a.node!r}')
        log.debug('%s %s on %s: %s', node_id, result.rule, result.subject,
                  'accepted' if result.accepted else 'rejected')
        return result

    def _node(self, a: AnnotatedNode, node_id: str, rule: str) -> ProofNode:
        return ProofNode(node_id, rule, describe(a), a.rg)

    # --- programs ------------------------------------------------------------

    def _program(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        program = a.node
        if isinstance(program, Basic):
            return self._basic(a, node_id)
        if isinstance(program, Seq):
            return self._seq(a, node_id)
        if isinstance(program, Cond):
            return self._cond(a, node_id)
        if isinstance(program, While):
            return self._while(a, node_id)
        if isinstance(program, Await):
            return self._await(a, node_id)
        if isinstance(program, Nondt):
            return self._nondt(a, node_id)
        raise TypeError(f'No proof rule for {program!r}')

    def _basic(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        rg = a.rg
        result = self._node(a, node_id, 'Basic')
        steps = conj(rg.pre, assignment_relation(a.node.assigns))
        ob = self.obligations
        result.premises = [
            self._from(1, 'pre <= {s | f(s) in pst}', ob.implies(steps, (_post(rg),))),
            self._from(2, '{(s, f(s)) | s in pre} <= G', ob.implies(steps, (rg.guar,))),
            self._stable(3, 'pre', rg.pre, rg.rely),
            self._stable(4, 'pst', rg.post, rg.rely),
        ]
        return result

    def _seq(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        if a.mid is None:
            raise MissingAnnotation(describe(a))
        rg, mid = a.rg, a.mid
        result = self._node(a, node_id, 'Seq')
        first, second = self._children(a, node_id, 2)
        result.children = [first, second]
        result.premises = [
            self._derivation(1, a.children[0], first, a.node.first, RGCond(rg.pre, rg.rely, rg.guar, mid)),
            self._derivation(2, a.children[1], second, a.node.second, RGCond(mid, rg.rely, rg.guar, rg.post)),
        ]
        return result

    def _cond(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        rg, program = a.rg, a.node
        result = self._node(a, node_id, 'Cond')
        then, orelse = self._children(a, node_id, 2)
        result.children = [then, orelse]
        result.premises = [
            self._derivation(1, a.children[0], then, program.then, with_pre(rg, conj(rg.pre, program.cond))),
            self._derivation(
                2, a.children[1], orelse, program.orelse, with_pre(rg, conj(rg.pre, negate(program.cond)))
            ),
            self._stable(3, 'pre', rg.pre, rg.rely),
            self._reflexive(4, rg.guar),
        ]
        return result

    def _while(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        rg, program = a.rg, a.node
        result = self._node(a, node_id, 'While')
        (body,) = self._children(a, node_id, 1)
        result.children = [body]
        expected = RGCond(conj(rg.pre, program.cond), rg.rely, rg.guar, rg.pre)
        exit_states = conj(rg.pre, negate(program.cond))
        result.premises = [
            self._derivation(1, a.children[0], body, program.body, expected),
            self._from(2, 'pre & -b <= pst', self.obligations.subset(exit_states, rg.post)),
            self._stable(3, 'pre', rg.pre, rg.rely),
            self._stable(4, 'pst', rg.post, rg.rely),
            self._reflexive(5, rg.guar),
        ]
        return result

    def _await(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        """The body obligation is instantiated once per state V of pre & b.

        V ranges over the variables the statement reads or writes. When pre,
        G or pst mention others, those keep their values through the body and
        the rest of the obligation is a pair question for the solver.
        """
        rg, program = a.rg, a.node
        result = self._node(a, node_id, 'Await')
        reads, writes = reads_writes(program)
        touched = sorted(set(reads) | set(writes) | variables(program.cond))
        scope = _scope(program, rg.pre, program.cond, rg.guar, rg.post)
        direct = set(scope) <= set(touched)
        passed, witness, count = True, None, 0
        for start in states_satisfying(
            conj(rg.pre, program.cond), self.domains, scope if direct else touched, cap=self.cap
        ):
            count += 1
            try:
                finals = atomic_runs(program.body, start, self.domains, self.atom_bound, strict=False)
            except EvalError:
                passed, witness = False, (dict(start), {})
                break
            for final in finals:
                if direct:
                    try:
                        ok = eval_rel(rg.guar, start, final) and holds(rg.post, final)
                    except EvalError:
                        ok = False
                    if not ok:
                        witness = (dict(start), dict(final))
                else:
                    written = {name: final[name] for name in writes}
                    step = and_all([
                        rg.pre,
                        program.cond,
                        state_predicate(start),
                        prime(state_predicate(written)),
                        Frame(tuple(sorted(writes))),
                    ])
                    witness = check_implication(step, [rg.guar, _post(rg)], self.domains, self.cap).witness
                if witness is not None:
                    passed = False
                    break
            if not passed:
                break
        text = f'body from each V in pre & b ends in {{s | (V, s) in G}} & pst ({count} states)'
        result.premises = [
            Premise(1, text, passed, witness),
            self._stable(2, 'pre', rg.pre, rg.rely),
            self._stable(3, 'pst', rg.post, rg.rely),
        ]
        return result

    def _nondt(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        rg, rel = a.rg, a.node.rel
        result = self._node(a, node_id, 'Nondt')
        steps = conj(rg.pre, framed(rel))
        blocked = None
        scope = _scope(a.node, rg.pre, rg.post)
        for state in states_satisfying(rg.pre, self.domains, scope, cap=self.cap):
            if not rel_successors(rel, state, self.domains):
                blocked = (dict(state), {})
                break
        ob = self.obligations
        result.premises = [
            self._from(1, "pre <= {s | all s'. (s, s') in r --> s' in pst}", ob.implies(steps, (_post(rg),))),
            Premise(2, "pre <= {s | exists s'. (s, s') in r}", blocked is None, blocked),
            self._from(3, "{(s, s') | s in pre & (s, s') in r} <= G", ob.implies(steps, (rg.guar,))),
            self._stable(4, 'pre', rg.pre, rg.rely),
            self._stable(5, 'pst', rg.post, rg.rely),
        ]
        return result

    # --- auxiliary rules -------------------------------------------------------

    def _conseq(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        rg = a.rg
        result = self._node(a, node_id, 'Conseq')
        (inner,) = self._children(a, node_id, 1)
        result.children = [inner]
        weak = a.children[0].rg
        ob = self.obligations
        result.premises = [
            self._from(1, "pre <= pre'", ob.subset(rg.pre, weak.pre)),
            self._from(2, "R <= R'", ob.subset(rg.rely, weak.rely)),
            self._from(3, "G' <= G", ob.subset(weak.guar, rg.guar)),
            self._from(4, "pst' <= pst", ob.subset(weak.post, rg.post)),
            self._derivation(5, a.children[0], inner, a.node, None),
        ]
        return result

    def _sides_match(self, a: AnnotatedNode, child: AnnotatedNode, pre: bool, post: bool) -> bool:
        rg, other = a.rg, child.rg
        return (
            child.node == a.node
            and other.rely == rg.rely
            and other.guar == rg.guar
            and (not pre or other.pre == rg.pre)
            and (not post or other.post == rg.post)
        )

    def _un_pre(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        result = self._node(a, node_id, 'UnPre')
        checked = self._children(a, node_id, 2)
        result.children = checked
        union = self.obligations.subset(a.rg.pre, or_all(c.rg.pre for c in a.children))
        result.premises = [
            Premise(
                i + 1,
                f'derivation of {node.subject} from pre #{i + 1}',
                self._sides_match(a, child, pre=False, post=True) and node.accepted,
            )
            for i, (child, node) in enumerate(zip(a.children, checked))
        ]
        result.premises.append(self._from(0, "pre <= pre1 | pre2", union))
        return result

    def _int_post(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        result = self._node(a, node_id, 'IntPost')
        checked = self._children(a, node_id, 2)
        result.children = checked
        both = conj(*(c.rg.post for c in a.children))
        result.premises = [
            Premise(
                i + 1,
                f'derivation of {node.subject} to post #{i + 1}',
                self._sides_match(a, child, pre=True, post=False) and node.accepted,
            )
            for i, (child, node) in enumerate(zip(a.children, checked))
        ]
        result.premises.append(self._from(0, 'pst1 & pst2 <= pst', self.obligations.subset(both, a.rg.post)))
        return result

    def _univ_pre(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        result = self._node(a, node_id, 'UnivPre')
        checked = [self.check(child, f'{node_id}.{i}') for i, child in enumerate(a.children)]
        result.children = checked
        by_pre = {
            child.rg.pre: node
            for child, node in zip(a.children, checked)
            if self._sides_match(a, child, pre=False, post=True)
        }
        premises = []
        for state in states_satisfying(a.rg.pre, self.domains, cap=self.cap):
            node = by_pre.get(state_predicate(state))
            passed = node is not None and node.accepted
            premises.append(
                Premise(1, 'derivation from {v}', passed, None if passed else (dict(state), {}), key=_state_key(state))
            )
        result.premises = self._group(1, 'derivation from {v}', premises)
        return result

    def _empty_pre(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        result = self._node(a, node_id, 'EmptyPre')
        witness = satisfiable(a.rg.pre, self.domains)
        result.premises = [
            Premise(0, 'pre = {}', witness is None, None if witness is None else (dict(witness), {}))
        ]
        return result

    # --- events and systems ------------------------------------------------------

    def _basic_event(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        rg, event = a.rg, a.node
        result = self._node(a, node_id, 'BasicEvt')
        (body,) = self._children(a, node_id, 1)
        result.children = [body]
        result.premises = [
            self._derivation(1, a.children[0], body, event.body, with_pre(rg, conj(rg.pre, event.guard))),
            self._stable(2, 'pre', rg.pre, rg.rely),
            self._reflexive(3, rg.guar),
        ]
        return result

    def _inner(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        result = self._node(a, node_id, 'Inner')
        (body,) = self._children(a, node_id, 1)
        result.children = [body]
        result.premises = [self._derivation(1, a.children[0], body, a.node.body, a.rg)]
        return result

    def _evt_seq(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        if a.mid is None:
            raise MissingAnnotation(describe(a))
        rg, mid, system = a.rg, a.mid, a.node
        result = self._node(a, node_id, 'EvtSeq')
        head, rest = self._children(a, node_id, 2)
        result.children = [head, rest]
        result.premises = [
            self._derivation(1, a.children[0], head, system.first, RGCond(rg.pre, rg.rely, rg.guar, mid)),
            self._derivation(2, a.children[1], rest, system.rest, RGCond(mid, rg.rely, rg.guar, rg.post)),
        ]
        return result

    def _components(
        self, a: AnnotatedNode, node_id: str, nodes: Sequence[object]
    ) -> Tuple[List[ProofNode], List[Premise]]:
        checked = self._children(a, node_id, len(nodes))
        derivations = [
            self._derivation(1, child, proof, node, None, key=proof.subject)
            for child, proof, node in zip(a.children, checked, nodes)
        ]
        return checked, self._group(1, 'derivation', derivations)

    def _evt_set(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        rg = a.rg
        result = self._node(a, node_id, 'EvtSet')
        checked, derivations = self._components(a, node_id, a.node.events)
        result.children = checked
        conds = [(proof.subject, child.rg) for child, proof in zip(a.children, checked)]
        ob = self.obligations
        premises = list(derivations)
        premises += self._group(2, 'psts_i <= pres_j', [
            self._from(2, 'psts_i <= pres_j', ob.subset(ci.post, cj.pre), key=f'{ni},{nj}')
            for ni, ci in conds
            for nj, cj in conds
        ])
        premises += self._pointwise(3, 'pre <= pres_i', ((n, rg.pre, c.pre) for n, c in conds))
        premises += self._pointwise(4, 'R <= Rs_i', ((n, rg.rely, c.rely) for n, c in conds))
        premises += self._pointwise(5, 'Gs_i <= G', ((n, c.guar, rg.guar) for n, c in conds))
        premises += self._pointwise(6, 'psts_i <= pst', ((n, c.post, rg.post) for n, c in conds))
        premises.append(self._stable(7, 'pre', rg.pre, rg.rely))
        premises.append(self._reflexive(8, rg.guar))
        result.premises = premises
        return result

    def _par(self, a: AnnotatedNode, node_id: str) -> ProofNode:
        rg, ps = a.rg, a.node
        result = self._node(a, node_id, 'Par')
        checked, derivations = self._components(a, node_id, [system for _, system in ps.systems])
        result.children = checked
        conds = [(unit, child.rg) for unit, child in zip(ps.units, a.children)]
        for (unit, _), proof in zip(conds, checked):
            proof.subject = proof.subject or unit
        ob = self.obligations
        premises = list(derivations)
        premises += self._pointwise(2, 'pre <= pres_k', ((u, rg.pre, c.pre) for u, c in conds))
        premises += self._pointwise(3, 'psts_k <= pst', ((u, c.post, rg.post) for u, c in conds))
        premises += self._pointwise(4, 'Gs_k <= G', ((u, c.guar, rg.guar) for u, c in conds))
        premises += self._pointwise(5, 'R <= Rs_k', ((u, rg.rely, c.rely) for u, c in conds))
        premises += self._group(6, "Gs_k <= Rs_k' for k /= k'", [
            self._from(6, "Gs_k <= Rs_k'", ob.subset(ck.guar, cl.rely), key=f'{uk},{ul}')
            for uk, ck in conds
            for ul, cl in conds
            if uk != ul
        ])
        result.premises = premises
        return result

    def _pointwise(self, group: int, text: str, items: Iterable[Tuple[str, Expr, Expr]]) -> List[Premise]:
        premises = [
            self._from(group, text, self.obligations.subset(small, large), key=name)
            for name, small, large in items
        ]
        return self._group(group, text, premises)


def _post(rg: RGCond) -> Expr:
    return prime(rg.post)


def _scope(program: Program, *exprs: Expr) -> List[str]:
    """Variables an atomic statement can observe; all others stay put."""
    reads, writes = reads_writes(program)
    found = set(reads) | set(writes)
    for expr in exprs:
        found |= variables(expr)
        for atom in frame_atoms(expr):
            found |= set(atom.changed)
    return sorted(found)


def _state_key(state) -> str:
    return ','.join(f"{k}={render_value(v)}" for k, v in sorted(state.items()))


def check_derivation(
    a: AnnotatedNode,
    domains: DomainDecl,
    atom_bound: int = ATOM_BOUND,
    cap: Optional[int] = PAIR_CAP,
) -> ProofReport:
    """Check every premise of the derivation rooted at ``a``."""
    checker = DerivationChecker(domains, atom_bound, cap)
    root = checker.check(a)
    return ProofReport(root, checker.obligations.checked)
