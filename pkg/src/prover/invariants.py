"""Invariant checking through the rely-guarantee proof system.

An invariant I holds for a closed parallel system w.r.t. Init when
Init <= I, every event's guarantee keeps I stable, and the system
satisfies <Init, EMPTY, UNIV, UNIV>.
"""

import logging
from typing import Optional

from src.core.domains import DomainDecl
from src.core.expressions import Expr
from src.core.spec import SpecFile
from src.prover.annotations import annotate_parallel, closed_condition
from src.prover.obligations import PAIR_CAP
from src.prover.report import Premise, ProofNode, ProofReport
from src.prover.rules import DerivationChecker
from src.semantics.steps import ATOM_BOUND

log = logging.getLogger(__name__)


def check_invariant_via_theorem(
    spec: SpecFile,
    invariant: Expr,
    domains: Optional[DomainDecl] = None,
    atom_bound: int = ATOM_BOUND,
    cap: Optional[int] = PAIR_CAP,
    name: str = 'invariant',
) -> ProofReport:
    domains = domains if domains is not None else spec.domains
    checker = DerivationChecker(domains, atom_bound, cap)
    ob = checker.obligations
    root = ProofNode('0', 'Invariant', name)

    initial = ob.subset(spec.initial, invariant)
    root.premises.append(Premise(1, 'Init <= I', initial.holds, initial.witness))

    for event in spec.basic_events():
        guar = spec.gamma(event.label).guar
        result = ob.stable(invariant, guar)
        root.premises.append(
            Premise(2, 'stable(I, guar(Gamma(ev)))', result.holds, result.witness, key=str(event.label))
        )
    if not root.premise_group(2):
        root.premises.append(Premise(2, 'stable(I, guar(Gamma(ev))) (no instance)', True))

    derivation = checker.check(annotate_parallel(spec, closed_condition(spec)), '0.0')
    root.children.append(derivation)
    root.premises.append(
        Premise(3, 'derivation of PS sat <Init, EMPTY, UNIV, UNIV>', derivation.accepted)
    )
    log.info('Invariant %s of %s: %s', name, spec.name, 'accepted' if root.accepted else 'rejected')
    return ProofReport(root, ob.checked)
