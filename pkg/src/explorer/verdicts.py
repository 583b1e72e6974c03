"""Bounded verdicts returned by every explorer check."""

from dataclasses import dataclass
from typing import Union

from src.explorer.computations import Computation


@dataclass(frozen=True)
class Holds:
    """No violation within ``depth`` transitions."""

    depth: int
    explored: int = 0

    @property
    def holds(self) -> bool:
        return True

    def describe(self) -> str:
        return f'Holds({self.depth}) after {self.explored} configurations'


@dataclass(frozen=True)
class Counterexample:
    computation: Computation
    clause: str
    detail: str = ''

    @property
    def holds(self) -> bool:
        return False

    def describe(self) -> str:
        text = f'Counterexample ({self.clause}) of {len(self.computation.edges)} transitions'
        return f'{text}: {self.detail}' if self.detail else text


Verdict = Union[Holds, Counterexample]
