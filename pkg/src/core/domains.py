"""Finite domains, states and state enumeration."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from src.core.evaluator import set_values
from src.core.expressions import Expr, Term
from src.core.values import FinMap, Some, Value, value_key
from src.utils.errors import EmptyDomain, MissingDomain


class State(FinMap):
    """Total (or, inside the prover, partial) map from variable names to values."""

    __slots__ = ()


class DomainSpec(Term):
    pass


@dataclass(frozen=True, eq=False)
class ValuesDom(DomainSpec):
    values: Expr


@dataclass(frozen=True, eq=False)
class BoolDom(DomainSpec):
    pass


@dataclass(frozen=True, eq=False)
class ListDom(DomainSpec):
    elem: DomainSpec
    maxlen: int


@dataclass(frozen=True, eq=False)
class OptionDom(DomainSpec):
    elem: DomainSpec


@dataclass(frozen=True, eq=False)
class MapDom(DomainSpec):
    keys: Expr
    elem: DomainSpec


def _canonical(values: Iterable[Value]) -> Tuple[Value, ...]:
    unique = {value_key(v): v for v in values}
    return tuple(unique[key] for key in sorted(unique))


def evaluate_domain(spec: DomainSpec, env: Optional[Mapping[str, Value]] = None) -> Tuple[Value, ...]:
    """All values of a declared domain, in canonical order."""
    if isinstance(spec, ValuesDom):
        return set_values(spec.values, env)
    if isinstance(spec, BoolDom):
        return (False, True)
    if isinstance(spec, OptionDom):
        return (None,) + tuple(Some(v) for v in evaluate_domain(spec.elem, env))
    if isinstance(spec, ListDom):
        elems = evaluate_domain(spec.elem, env)
        lists: List[Value] = []
        for length in range(spec.maxlen + 1):
            lists.extend(itertools.product(elems, repeat=length))
        return _canonical(lists)
    if isinstance(spec, MapDom):
        keys = set_values(spec.keys, env)
        elems = evaluate_domain(spec.elem, env)
        return _canonical(
            FinMap(zip(keys, combo)) for combo in itertools.product(elems, repeat=len(keys))
        )
    raise TypeError(f'Unknown domain form {spec!r}')


class DomainDecl:
    """Finite domains of variables, the unit alphabet and event parameter domains."""

    def __init__(
        self,
        variables: Mapping[str, Sequence[Value]],
        units: Sequence[str] = (),
        params: Optional[Mapping[str, Mapping[str, Sequence[Value]]]] = None,
    ):
        self._values: Dict[str, Tuple[Value, ...]] = {
            name: _canonical(values) for name, values in variables.items()
        }
        self._keys = {
            name: frozenset(value_key(v) for v in values) for name, values in self._values.items()
        }
        self.units = tuple(units)
        self.params = {name: dict(table) for name, table in (params or {}).items()}

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(sorted(self._values))

    def values(self, name: str) -> Tuple[Value, ...]:
        try:
            return self._values[name]
        except KeyError:
            raise MissingDomain(name) from None

    def size(self, name: str) -> int:
        return len(self.values(name))

    def contains(self, name: str, value: Value) -> bool:
        try:
            keys = self._keys[name]
        except KeyError:
            raise MissingDomain(name) from None
        return value_key(value) in keys

    def state_count(self, names: Optional[Iterable[str]] = None) -> int:
        total = 1
        for name in (self.names if names is None else names):
            total *= self.size(name)
        return total

    def __repr__(self) -> str:
        sizes = ', '.join(f'{name}:{len(vals)}' for name, vals in sorted(self._values.items()))
        return f'DomainDecl({sizes})'


def enumerate_states(domains: DomainDecl, names: Optional[Iterable[str]] = None) -> Iterator[State]:
    """Cartesian product of variable domains, in canonical order."""
    chosen = sorted(domains.names if names is None else set(names))
    pools = []
    for name in chosen:
        values = domains.values(name)
        if not values:
            raise EmptyDomain(name)
        pools.append(values)
    for combo in itertools.product(*pools):
        yield State(zip(chosen, combo))
