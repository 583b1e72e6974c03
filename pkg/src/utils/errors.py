"""Exception hierarchy shared by every checker module."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    col_start: int
    col_end: int

    def __str__(self) -> str:
        return f'{self.file}:{self.line}:{self.col_start}'


class PicoreError(Exception):
    """Root of all checker errors."""


# --- evaluation -----------------------------------------------------------

class EvalError(PicoreError, ValueError):
    pass


class UnboundVariable(EvalError):
    def __init__(self, name: str):
        super().__init__(f'Unbound variable: {name}')
        self.name = name


class TypeMismatch(EvalError):
    def __init__(self, operator: str, value: Any):
        super().__init__(f'Operator {operator} cannot be applied to {value!r}')
        self.operator = operator
        self.value = value


class HeadOfEmpty(EvalError):
    def __init__(self, operator: str):
        super().__init__(f'{operator} applied to an empty value')
        self.operator = operator


# --- finite domains -------------------------------------------------------

class DomainError(PicoreError, ValueError):
    pass


class MissingDomain(DomainError):
    def __init__(self, name: str):
        super().__init__(f'No domain declared for variable {name}')
        self.name = name


class EmptyDomain(DomainError):
    def __init__(self, name: str):
        super().__init__(f'Domain of variable {name} is empty')
        self.name = name


class DomainEscape(DomainError):
    def __init__(self, name: str, value: Any, configuration: Any = None):
        super().__init__(f'Value {value!r} for {name} leaves its declared domain')
        self.name = name
        self.value = value
        self.configuration = configuration


class MissingFrame(DomainError):
    def __init__(self, relation: Any):
        super().__init__(
            f'Relation {relation} constrains no primed variable; supply an explicit frame'
        )
        self.relation = relation


# --- inputs ---------------------------------------------------------------

class SpecError(PicoreError, ValueError):
    pass


class PicoreSyntaxError(SpecError):
    def __init__(self, message: str, span: Optional[SourceSpan] = None):
        location = f'{span}: ' if span else ''
        super().__init__(f'{location}{message}')
        self.message = message
        self.span = span


class UndeclaredVariable(PicoreSyntaxError):
    def __init__(self, name: str, span: Optional[SourceSpan] = None):
        super().__init__(f'Undeclared identifier {name}', span)
        self.name = name


class DuplicateEventLabel(PicoreSyntaxError):
    def __init__(self, label: str, span: Optional[SourceSpan] = None):
        super().__init__(f'Duplicate event {label}', span)
        self.label = label


class UnitMismatch(SpecError):
    pass


class InvalidScale(SpecError):
    pass


class InconsistentConfig(SpecError):
    pass


class MissingGamma(SpecError):
    def __init__(self, label: str):
        super().__init__(f'No rely-guarantee condition declared for event {label}')
        self.label = label


class MissingAnnotation(SpecError):
    def __init__(self, where: str):
        super().__init__(f'Missing intermediate assertion at {where}')
        self.where = where


# --- resource bounds ------------------------------------------------------

class ResourceLimit(PicoreError, RuntimeError):
    pass


class AtomBoundExceeded(ResourceLimit):
    def __init__(self, bound: int, configuration: Any = None):
        super().__init__(f'Atomic execution did not terminate within {bound} steps')
        self.bound = bound
        self.configuration = configuration


class StateSpaceTooLarge(ResourceLimit):
    def __init__(self, cap: int, what: str = 'states'):
        super().__init__(f'Exploration exceeded the cap of {cap} {what}')
        self.cap = cap
        self.what = what
