"""Set-inclusion, stability and reflexivity obligations over the declared domains."""

import logging
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple

from src.core.domains import DomainDecl
from src.core.expressions import ID, Expr, Frame, conj, frame_atoms, prime, primed_vars
from src.core.solver import SearchResult, check_implication, dnf
from src.core.values import Value, render_value
from src.utils.errors import MissingFrame

log = logging.getLogger(__name__)

PAIR_CAP = 1000000

Witness = Tuple[Dict[str, Value], Dict[str, Value]]


def check_subset(
    hypothesis: Expr,
    target: Expr,
    domains: DomainDecl,
    cap: Optional[int] = PAIR_CAP,
) -> SearchResult:
    """Every state (or pair) of ``hypothesis`` lies in ``target``."""
    return check_implication(hypothesis, [target], domains, cap)


def check_stable(
    pred: Expr,
    rel: Expr,
    domains: DomainDecl,
    cap: Optional[int] = PAIR_CAP,
) -> SearchResult:
    """stable(pred, rel): every ``rel`` step from a ``pred`` state lands in ``pred``."""
    return check_implication(conj(pred, rel), [prime(pred)], domains, cap)


def check_reflexive(rel: Expr, domains: DomainDecl, cap: Optional[int] = PAIR_CAP) -> SearchResult:
    """Id is included in ``rel``."""
    return check_implication(ID, [rel], domains, cap)


def framed(rel: Expr) -> Expr:
    """A Nondt relation with its implicit frame made explicit."""
    changing = set(primed_vars(rel))
    for atom in frame_atoms(rel):
        changing |= set(atom.changed)
    if not changing and not frame_atoms(rel) and dnf(rel):
        raise MissingFrame(rel)
    return conj(rel, Frame(tuple(changing)))


def witness_text(witness: Optional[Witness]) -> Optional[str]:
    if witness is None:
        return None
    pre, post = witness

    def show(side: Mapping[str, Value]) -> str:
        return '{' + ', '.join(f'{k}={render_value(v)}' for k, v in sorted(side.items())) + '}'

    if not post:
        return show(pre)
    return f'{show(pre)} -> {show(post)}'


class Obligations:
    """Memoised obligation checks sharing one domain declaration."""

    def __init__(self, domains: DomainDecl, cap: Optional[int] = PAIR_CAP):
        self.domains = domains
        self.cap = cap
        self._cache: Dict[Tuple, SearchResult] = {}
        self.checked = 0

    def _memo(self, key: Tuple, compute: Callable[[], SearchResult]) -> SearchResult:
        cached = self._cache.get(key)
        if cached is None:
            cached = compute()
            self._cache[key] = cached
            self.checked += 1
        return cached

    def implies(self, hypothesis: Expr, targets: Sequence[Expr]) -> SearchResult:
        targets = tuple(targets)
        return self._memo(
            ('implies', hypothesis, targets),
            lambda: check_implication(hypothesis, list(targets), self.domains, self.cap),
        )

    def subset(self, hypothesis: Expr, target: Expr) -> SearchResult:
        return self._memo(
            ('subset', hypothesis, target),
            lambda: check_subset(hypothesis, target, self.domains, self.cap),
        )

    def stable(self, pred: Expr, rel: Expr) -> SearchResult:
        return self._memo(
            ('stable', pred, rel),
            lambda: check_stable(pred, rel, self.domains, self.cap),
        )

    def reflexive(self, rel: Expr) -> SearchResult:
        return self._memo(('reflexive', rel), lambda: check_reflexive(rel, self.domains, self.cap))
