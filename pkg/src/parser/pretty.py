"""Canonical concrete syntax for every syntax node and for whole spec files.

The output of :func:`pretty_print` parses back to an equal :class:`SpecFile`.
"""

from typing import List, Tuple

from src.core.domains import BoolDom, DomainSpec, ListDom, MapDom, OptionDom, ValuesDom
from src.core.expressions import (
    ID,
    TRUE,
    Binary,
    Expr,
    Frame,
    ListExpr,
    Lit,
    MapExpr,
    Name,
    Quant,
    SetEnum,
    SetRange,
    Term,
    Unary,
    Update,
    Var,
)
from src.core.spec import EsysDecl, EventDef, EventRef, RGCond, SeqDecl, SetDecl, SpecFile
from src.core.syntax import (
    AnonEvent,
    Await,
    Basic,
    BasicEvent,
    Cond,
    Done,
    EvtSeq,
    EvtSet,
    Nondt,
    ParallelEventSystem,
    Program,
    Seq,
    While,
)
from src.core.values import Some, is_int, render_value

INDENT = '  '

# binding strength, loosest first
_IMPLIES, _OR, _AND, _NOT, _CMP, _LIST, _SUM, _PROD, _PREFIX, _POSTFIX, _ATOM = range(1, 12)

# op -> (token, precedence, left minimum, right minimum)
_BINARY = {
    'implies': ('-->', _IMPLIES, _OR, _IMPLIES),
    'or': ('OR', _OR, _OR, _AND),
    'and': ('AND', _AND, _AND, _NOT),
    '#': ('#', _LIST, _SUM, _LIST),
    '@': ('@', _LIST, _SUM, _LIST),
    '+': ('+', _SUM, _SUM, _PROD),
    '-': ('-', _SUM, _SUM, _PROD),
    '*': ('*', _PROD, _PROD, _PREFIX),
}
for _op in ('=', '/=', '<', '<=', '>', '>='):
    _BINARY[_op] = (_op, _CMP, _LIST, _LIST)
_BINARY['in'] = ('IN', _CMP, _LIST, _LIST)
_BINARY['subset'] = ('SUBSET', _CMP, _LIST, _LIST)

_PREFIX_TOKENS = {
    'neg': '-',
    'hd': 'hd ',
    'tl': 'tl ',
    'len': 'len ',
    'the': 'the ',
    'some': 'SOME ',
    'is_some': 'is_some ',
}


def _lit(value) -> Tuple[str, int]:
    text = render_value(value)
    if isinstance(value, Some) or (is_int(value) and value < 0):
        return text, _PREFIX
    return text, _ATOM


def _expr(expr: Expr) -> Tuple[str, int]:
    if isinstance(expr, Lit):
        return _lit(expr.value)
    if isinstance(expr, Var):
        return expr.name + ("'" if expr.primed else ''), _ATOM
    if isinstance(expr, Name):
        return expr.name, _ATOM
    if isinstance(expr, Frame):
        if expr == ID:
            return 'Id', _ATOM
        return f'FRAME({", ".join(expr.changed)})', _ATOM
    if isinstance(expr, Binary):
        if expr.op == 'apply':
            return f'{_wrap(expr.left, _POSTFIX)}[{expr_text(expr.right)}]', _POSTFIX
        token, prec, left_min, right_min = _BINARY[expr.op]
        return f'{_wrap(expr.left, left_min)} {token} {_wrap(expr.right, right_min)}', prec
    if isinstance(expr, Unary):
        if expr.op == 'not':
            return f'NOT {_wrap(expr.arg, _NOT)}', _NOT
        return _PREFIX_TOKENS[expr.op] + _wrap(expr.arg, _PREFIX), _PREFIX
    if isinstance(expr, Update):
        target = _wrap(expr.target, _POSTFIX)
        return f'{target}[{expr_text(expr.key)} := {expr_text(expr.value)}]', _POSTFIX
    if isinstance(expr, ListExpr):
        return '[' + ', '.join(expr_text(item) for item in expr.items) + ']', _ATOM
    if isinstance(expr, MapExpr):
        pairs = ', '.join(f'{expr_text(k)} |-> {expr_text(v)}' for k, v in expr.pairs)
        return '{' + pairs + '}', _ATOM
    if isinstance(expr, Quant):
        keyword = 'FORALL' if expr.kind == 'forall' else 'EXISTS'
        return f'{keyword} {expr.var} IN {set_text(expr.domain)} . ({expr_text(expr.body)})', _ATOM
    if isinstance(expr, (SetEnum, SetRange)):
        return set_text(expr), _ATOM
    raise TypeError(f'Cannot print expression {expr!r}')


def _wrap(expr: Expr, minimum: int) -> str:
    text, prec = _expr(expr)
    # "--" starts a comment
    if prec < minimum or (minimum == _PREFIX and text.startswith('-')):
        return f'({text})'
    return text


def expr_text(expr: Expr) -> str:
    return _expr(expr)[0]


def set_text(expr: Expr) -> str:
    if isinstance(expr, SetRange):
        return '{' + expr_text(expr.lo) + '..' + expr_text(expr.hi) + '}'
    if isinstance(expr, SetEnum):
        return '{' + ', '.join(expr_text(item) for item in expr.items) + '}'
    if isinstance(expr, Name):
        return expr.name
    if isinstance(expr, Lit) and isinstance(expr.value, tuple):
        return '{' + ', '.join(render_value(v) for v in expr.value) + '}'
    raise TypeError(f'Cannot print set expression {expr!r}')


def domain_text(spec: DomainSpec) -> str:
    if isinstance(spec, BoolDom):
        return 'BOOL'
    if isinstance(spec, ListDom):
        return f'LIST {domain_text(spec.elem)} MAXLEN {spec.maxlen}'
    if isinstance(spec, OptionDom):
        return f'OPTION {domain_text(spec.elem)}'
    if isinstance(spec, MapDom):
        return f'MAP {set_text(spec.keys)} TO {domain_text(spec.elem)}'
    if isinstance(spec, ValuesDom):
        return set_text(spec.values)
    raise TypeError(f'Cannot print domain {spec!r}')


# --- programs -----------------------------------------------------------------

def program_lines(program: Program, depth: int = 0) -> List[str]:
    pad = INDENT * depth
    if isinstance(program, Done):
        return [pad + 'SKIP-DONE']
    if isinstance(program, Basic):
        if not program.assigns:
            return [pad + 'SKIP']
        targets = ', '.join(program.targets)
        values = ', '.join(expr_text(value) for _, value in program.assigns)
        return [f'{pad}{targets} := {values}']
    if isinstance(program, Seq):
        lines = program_lines(program.first, depth)
        lines[-1] += ' ;;'
        if program.mid is not None:
            lines.append(f'{pad}{{| {expr_text(program.mid)} |}}')
        return lines + program_lines(program.second, depth)
    if isinstance(program, Cond):
        lines = [f'{pad}IF {expr_text(program.cond)} THEN'] + program_lines(program.then, depth + 1)
        if program.orelse != Basic(()):
            lines += [pad + 'ELSE'] + program_lines(program.orelse, depth + 1)
        return lines + [pad + 'FI']
    if isinstance(program, While):
        return (
            [f'{pad}WHILE {expr_text(program.cond)} DO']
            + program_lines(program.body, depth + 1)
            + [pad + 'OD']
        )
    if isinstance(program, Await):
        head = f'{pad}ATOM' if program.cond == TRUE else f'{pad}AWAIT {expr_text(program.cond)} THEN'
        return [head] + program_lines(program.body, depth + 1) + [pad + 'END']
    if isinstance(program, Nondt):
        return [f'{pad}NONDT {expr_text(program.rel)}']
    raise TypeError(f'Cannot print program {program!r}')


def program_text(program: Program) -> str:
    return '\n'.join(program_lines(program))


def _inline(program: Program) -> str:
    return ' '.join(line.strip() for line in program_lines(program))


def event_text(event) -> str:
    if isinstance(event, BasicEvent):
        return str(event.label)
    if isinstance(event, AnonEvent):
        return f'<{_inline(event.body)}>'
    raise TypeError(f'Cannot print event {event!r}')


def esys_text(system) -> str:
    if isinstance(system, EvtSet):
        return '{' + ', '.join(event_text(e) for e in system.events) + '}'
    if isinstance(system, EvtSeq):
        return f'{event_text(system.first)} ; {esys_text(system.rest)}'
    return event_text(system)


def rgcond_text(cond: RGCond) -> str:
    return (
        f'PRE {expr_text(cond.pre)} RELY {expr_text(cond.rely)} '
        f'GUAR {expr_text(cond.guar)} POST {expr_text(cond.post)}'
    )


def pretty_node(node: Term) -> str:
    """Concrete syntax of any term; programs and systems print on one line."""
    if isinstance(node, Expr):
        return expr_text(node)
    if isinstance(node, Program):
        return _inline(node)
    if isinstance(node, (BasicEvent, AnonEvent)):
        return event_text(node)
    if isinstance(node, (EvtSet, EvtSeq)):
        return esys_text(node)
    if isinstance(node, ParallelEventSystem):
        return ' || '.join(f'{unit}: {esys_text(system)}' for unit, system in node.systems)
    if isinstance(node, RGCond):
        return rgcond_text(node)
    if isinstance(node, DomainSpec):
        return domain_text(node)
    if isinstance(node, EventRef):
        return _ref_text(node)
    return repr(node)


# --- spec files -----------------------------------------------------------------

def _ref_text(ref: EventRef) -> str:
    if not ref.param_domains:
        return ref.name
    params = ', '.join(f'{name} : {set_text(dom)}' for name, dom in ref.param_domains)
    return f'{ref.name}({params})'


def _decl_text(decl: EsysDecl) -> str:
    if isinstance(decl, SeqDecl):
        return f'{_ref_text(decl.head)} ; {_decl_text(decl.rest)}'
    if isinstance(decl, SetDecl):
        return '{' + ', '.join(_ref_text(ref) for ref in decl.refs) + '}'
    raise TypeError(f'Cannot print system declaration {decl!r}')


def _event_def_lines(event: EventDef) -> List[str]:
    head = f'{INDENT}EVENT {event.name}'
    if event.params:
        head += ' [' + ', '.join(event.params) + ']'
    head += f' @ {event.unit}'
    if event.guard != TRUE:
        head += f' WHEN {expr_text(event.guard)}'
    return [head + ' THEN'] + program_lines(event.body, 2) + [INDENT + 'END']


def _rgcond_lines(cond: RGCond, depth: int) -> List[str]:
    pad = INDENT * depth
    return [
        f'{pad}PRE  {expr_text(cond.pre)}',
        f'{pad}RELY {expr_text(cond.rely)}',
        f'{pad}GUAR {expr_text(cond.guar)}',
        f'{pad}POST {expr_text(cond.post)}',
    ]


def pretty_print(spec: SpecFile) -> str:
    """Render a whole spec file in canonical concrete syntax."""
    lines = [f'SPEC {spec.name}', '']
    if spec.symbols:
        lines += ['SYMBOLS', INDENT + ', '.join(spec.symbols), '']
    if spec.constants:
        lines.append('CONSTANTS')
        lines += [f'{INDENT}{name} = {expr_text(expr)}' for name, expr in spec.constants]
        lines.append('')
    lines.append('DOMAINS')
    lines += [f'{INDENT}{name} : {domain_text(dom)}' for name, dom in spec.variables]
    lines += ['', 'INIT', INDENT + expr_text(spec.init), '', 'EVENTS']
    for event in spec.events:
        lines += _event_def_lines(event)
    lines += ['', 'SYSTEM']
    lines += [f'{INDENT}{unit} : {_decl_text(decl)}' for unit, decl in spec.system]
    if spec.rgspecs or spec.unit_specs:
        lines += ['', 'RGSPECS']
        for entry in spec.rgspecs:
            lines.append(f'{INDENT}{entry.event} :')
            lines += _rgcond_lines(entry.cond, 2)
            if entry.inner is not None:
                lines.append(INDENT * 2 + 'FROM')
                lines += _rgcond_lines(entry.inner, 2)
        for unit, cond in spec.unit_specs:
            lines.append(f'{INDENT}UNIT {unit} :')
            lines += _rgcond_lines(cond, 2)
    if spec.invariants:
        lines += ['', 'INVARIANTS']
        lines += [f'{INDENT}{name} : {expr_text(expr)}' for name, expr in spec.invariants]
    return '\n'.join(lines) + '\n'
