"""Transition labels, event contexts and configurations."""

from dataclasses import dataclass
from typing import Union

from src.core.domains import State
from src.core.syntax import BasicEvent, Subject
from src.core.values import FinMap


@dataclass(frozen=True)
class ProgAct:
    """Action step of the program currently running on ``unit``."""

    unit: str = ''

    def __str__(self) -> str:
        return f'act@{self.unit}' if self.unit else 'act'


@dataclass(frozen=True)
class EvtOcc:
    """Occurrence of a basic event on ``unit``."""

    event: BasicEvent
    unit: str = ''

    def __str__(self) -> str:
        return f'occ {self.event.label}'


@dataclass(frozen=True)
class EnvStep:
    def __str__(self) -> str:
        return 'env'


ENV = EnvStep()

Label = Union[ProgAct, EvtOcc, EnvStep]


def is_action(label: Label) -> bool:
    return not isinstance(label, EnvStep)


class EventContext(FinMap):
    """Partial map from execution units to the basic event they last triggered."""

    __slots__ = ()


EMPTY_CONTEXT = EventContext()


@dataclass(frozen=True)
class Configuration:
    spec: Subject
    state: State
    ctx: EventContext = EMPTY_CONTEXT

    def __str__(self) -> str:
        return f'({self.spec}, {self.state!r}, {dict(self.ctx)!r})'
