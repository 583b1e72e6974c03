"""Runtime values of the checker and their canonical ordering.

Int is ``int``, Bool is ``bool``, Sym is ``str``, List is ``tuple``,
Opt is ``None`` or :class:`Some`, and finite maps are :class:`FinMap`.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Tuple, Union

Value = Any


@dataclass(frozen=True)
class Some:
    value: Value

    def __repr__(self) -> str:
        return f'Some({self.value!r})'


def value_key(value: Value) -> Tuple:
    """Total order over values, used for every canonical enumeration."""
    if value is True or value is False:
        return (0, int(value))
    if isinstance(value, int):
        return (1, value)
    if isinstance(value, str):
        return (2, value)
    if isinstance(value, tuple):
        return (3, len(value), tuple(value_key(item) for item in value))
    if value is None:
        return (4,)
    if isinstance(value, Some):
        return (5, value_key(value.value))
    if isinstance(value, FinMap):
        return (6, tuple((value_key(k), value_key(v)) for k, v in value.items()))
    raise TypeError(f'Not a checker value: {value!r}')


def values_equal(left: Value, right: Value) -> bool:
    """Equality that keeps booleans apart from the integers 0 and 1."""
    if (left is True or left is False) != (right is True or right is False):
        return False
    return left == right


def is_int(value: Value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


class FinMap(Mapping):
    """Immutable, hashable finite map with keys kept in canonical order."""

    __slots__ = ('_items', '_index', '_key', '_hash')

    def __init__(self, items: Union[Mapping, Iterable[Tuple[Value, Value]]] = ()):
        pairs = items.items() if isinstance(items, Mapping) else items
        index = dict(pairs)
        self._index = index
        self._items = tuple(sorted(index.items(), key=lambda kv: value_key(kv[0])))
        self._key = None
        self._hash = None

    def __getitem__(self, key: Value) -> Value:
        return self._index[key]

    def __iter__(self) -> Iterator[Value]:
        return (key for key, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, key: object) -> bool:
        return key in self._index

    def items(self):
        return self._items

    def _canonical(self) -> Tuple:
        # bool values stay distinct from the ints 0 and 1
        if self._key is None:
            self._key = tuple((value_key(k), value_key(v)) for k, v in self._items)
        return self._key

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, FinMap):
            return NotImplemented
        return hash(self) == hash(other) and self._canonical() == other._canonical()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._canonical())
        return self._hash

    def set(self, key: Value, value: Value) -> 'FinMap':
        updated = dict(self._index)
        updated[key] = value
        return self.__class__(updated)

    def update(self, changes: Mapping) -> 'FinMap':
        if not changes:
            return self
        updated = dict(self._index)
        updated.update(changes)
        return self.__class__(updated)

    def restrict(self, keys: Iterable[Value]) -> 'FinMap':
        wanted = set(keys)
        return self.__class__((k, v) for k, v in self._items if k in wanted)

    def __repr__(self) -> str:
        body = ', '.join(f'{k!r}: {v!r}' for k, v in self._items)
        return f'{type(self).__name__}({{{body}}})'


def render_value(value: Value) -> str:
    """Concrete PiCore syntax for a value."""
    if value is True:
        return 'true'
    if value is False:
        return 'false'
    if value is None:
        return 'NONE'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    if isinstance(value, tuple):
        return '[' + ', '.join(render_value(item) for item in value) + ']'
    if isinstance(value, Some):
        return 'SOME ' + render_value(value.value)
    if isinstance(value, FinMap):
        body = ', '.join(f'{render_value(k)} |-> {render_value(v)}' for k, v in value.items())
        return '{' + body + '}'
    raise TypeError(f'Not a checker value: {value!r}')
