"""Expression trees for state predicates and transition relations.

A state predicate mentions only unprimed variables. A relation may also
mention primed variables (the post-state) and frame atoms.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from functools import lru_cache
from typing import Callable, FrozenSet, Iterable, Iterator, Optional, Set, Tuple

from src.core.values import Value


class Term:
    """Immutable syntax node with a cached structural hash."""

    def _values(self) -> Tuple:
        return tuple(getattr(self, f.name) for f in fields(self) if f.compare)

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if other.__class__ is not self.__class__:
            return NotImplemented
        return hash(self) == hash(other) and self._values() == other._values()

    def __ne__(self, other: object) -> bool:
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self) -> int:
        cached = self.__dict__.get('_hash')
        if cached is None:
            cached = hash((self.__class__.__name__,) + self._values())
            self.__dict__['_hash'] = cached
        return cached

    def __str__(self) -> str:
        from src.parser.pretty import pretty_node

        return pretty_node(self)


class Expr(Term):
    pass


@dataclass(frozen=True, eq=False)
class Lit(Expr):
    value: Value

    def _values(self) -> Tuple:
        # keep true apart from 1
        return (type(self.value).__name__, self.value)


@dataclass(frozen=True, eq=False)
class Var(Expr):
    name: str
    primed: bool = False


@dataclass(frozen=True, eq=False)
class Name(Expr):
    """Parameter, constant or quantifier-bound name, substituted by binding."""

    name: str


@dataclass(frozen=True, eq=False)
class Unary(Expr):
    op: str
    arg: Expr


@dataclass(frozen=True, eq=False)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=False)
class Update(Expr):
    """Map update ``target[key := value]``."""

    target: Expr
    key: Expr
    value: Expr


@dataclass(frozen=True, eq=False)
class ListExpr(Expr):
    items: Tuple[Expr, ...]


@dataclass(frozen=True, eq=False)
class MapExpr(Expr):
    pairs: Tuple[Tuple[Expr, Expr], ...]


@dataclass(frozen=True, eq=False)
class SetRange(Expr):
    lo: Expr
    hi: Expr


@dataclass(frozen=True, eq=False)
class SetEnum(Expr):
    items: Tuple[Expr, ...]


@dataclass(frozen=True, eq=False)
class Quant(Expr):
    kind: str  # 'forall' | 'exists'
    var: str
    domain: Expr
    body: Expr


@dataclass(frozen=True, eq=False)
class Frame(Expr):
    """Every variable outside ``changed`` keeps its value."""

    changed: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, 'changed', tuple(sorted(set(self.changed))))


TRUE = Lit(True)
FALSE = Lit(False)
ID = Frame(())

UNARY_OPS = ('not', 'neg', 'hd', 'tl', 'len', 'the', 'some', 'is_some')
BINARY_OPS = (
    'and', 'or', 'implies',
    '=', '/=', '<', '<=', '>', '>=', 'in', 'subset',
    '#', '@', '+', '-', '*', 'apply',
)


# --- construction helpers --------------------------------------------------

def conj(*parts: Expr) -> Expr:
    return and_all(parts)


def disj(*parts: Expr) -> Expr:
    return or_all(parts)


def and_all(parts: Iterable[Expr]) -> Expr:
    items = [p for p in parts if p != TRUE]
    if not items:
        return TRUE
    if any(p == FALSE for p in items):
        return FALSE
    result = items[-1]
    for item in reversed(items[:-1]):
        result = Binary('and', item, result)
    return result


def or_all(parts: Iterable[Expr]) -> Expr:
    items = [p for p in parts if p != FALSE]
    if not items:
        return FALSE
    if any(p == TRUE for p in items):
        return TRUE
    result = items[-1]
    for item in reversed(items[:-1]):
        result = Binary('or', item, result)
    return result


def negate(expr: Expr) -> Expr:
    if expr == TRUE:
        return FALSE
    if expr == FALSE:
        return TRUE
    return Unary('not', expr)


def distinct(parts: Iterable[Expr]) -> Tuple[Expr, ...]:
    seen = []
    for part in parts:
        if part not in seen:
            seen.append(part)
    return tuple(seen)


def keep(name: str) -> Expr:
    return Binary('=', Var(name, True), Var(name, False))


def assignment_relation(assigns: Iterable[Tuple[str, Expr]]) -> Expr:
    """Relation of a multiple assignment: targets get their values, the rest is framed."""
    pairs = list(assigns)
    equations = [Binary('=', Var(name, True), expr) for name, expr in pairs]
    return and_all(equations + [Frame(tuple(name for name, _ in pairs))])


# --- traversal -------------------------------------------------------------

def _map_field(value, fn: Callable[[Term], Term]):
    if isinstance(value, Term):
        return fn(value)
    if isinstance(value, tuple):
        return tuple(_map_field(item, fn) for item in value)
    return value


def rebuild(node: Term, fn: Callable[[Term], Term]) -> Term:
    """Apply ``fn`` to every direct child term of ``node``."""
    if isinstance(node, (Lit, Var, Name, Frame)):
        return node
    changes = {f.name: _map_field(getattr(node, f.name), fn) for f in fields(node)}
    return type(node)(**changes)


def _iter_field(value) -> Iterator[Term]:
    if isinstance(value, Term):
        yield value
    elif isinstance(value, tuple):
        for item in value:
            yield from _iter_field(item)


def children(node: Term) -> Iterator[Term]:
    if isinstance(node, (Lit, Var, Name, Frame)):
        return iter(())
    return (child for f in fields(node) for child in _iter_field(getattr(node, f.name)))


def walk(node: Term) -> Iterator[Term]:
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(children(current))


@lru_cache(maxsize=None)
def var_occurrences(expr: Term) -> FrozenSet[Tuple[str, bool]]:
    """All (name, primed) pairs read by ``expr``; frame atoms read nothing."""
    if isinstance(expr, Var):
        return frozenset({(expr.name, expr.primed)})
    found: Set[Tuple[str, bool]] = set()
    for child in children(expr):
        found |= var_occurrences(child)
    return frozenset(found)


def variables(expr: Term) -> FrozenSet[str]:
    return frozenset(name for name, _ in var_occurrences(expr))


def unprimed_vars(expr: Term) -> FrozenSet[str]:
    return frozenset(name for name, primed in var_occurrences(expr) if not primed)


def primed_vars(expr: Term) -> FrozenSet[str]:
    return frozenset(name for name, primed in var_occurrences(expr) if primed)


def frame_atoms(expr: Term) -> Tuple[Frame, ...]:
    return tuple(node for node in walk(expr) if isinstance(node, Frame))


def names(expr: Term) -> FrozenSet[str]:
    return frozenset(node.name for node in walk(expr) if isinstance(node, Name))


def is_relation(expr: Expr) -> bool:
    return bool(primed_vars(expr)) or bool(frame_atoms(expr))


def keep_var(expr: Expr) -> Optional[str]:
    """Name ``v`` when ``expr`` is ``v' = v`` or ``v = v'``."""
    if isinstance(expr, Binary) and expr.op == '=':
        left, right = expr.left, expr.right
        if (
            isinstance(left, Var)
            and isinstance(right, Var)
            and left.name == right.name
            and left.primed != right.primed
        ):
            return left.name
    return None


def prime(expr: Expr) -> Expr:
    """Move a state predicate onto the post-state."""
    if isinstance(expr, Var):
        return Var(expr.name, True)
    return rebuild(expr, prime)


def unprime(expr: Expr) -> Expr:
    if isinstance(expr, Var):
        return Var(expr.name, False)
    return rebuild(expr, unprime)


def conjuncts(expr: Expr) -> Tuple[Expr, ...]:
    if isinstance(expr, Binary) and expr.op == 'and':
        return conjuncts(expr.left) + conjuncts(expr.right)
    if expr == TRUE:
        return ()
    return (expr,)


def disjuncts_of(expr: Expr) -> Tuple[Expr, ...]:
    if isinstance(expr, Binary) and expr.op == 'or':
        return disjuncts_of(expr.left) + disjuncts_of(expr.right)
    if expr == FALSE:
        return ()
    return (expr,)
