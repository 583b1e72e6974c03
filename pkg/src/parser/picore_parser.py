"""Parser for PiCore specification files.

The grammar lives in :mod:`src.parser.grammar`; this module walks the lark
parse tree and builds the core model. Identifiers are resolved while
walking: event parameters, the unit binder, quantifier variables and
constants become :class:`Name`, declared variables become :class:`Var`,
symbols become literals. Anything else is an :class:`UndeclaredVariable`.
"""

import logging
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple, Union

from lark import Lark, Token, Tree
from lark.exceptions import UnexpectedInput

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
    Unary,
    Update,
    Var,
)
from src.core.spec import EsysDecl, EventDef, EventRef, RGCond, RGEntry, SeqDecl, SetDecl, SpecFile
from src.core.syntax import SKIP, Await, Basic, Cond, Nondt, Program, Seq, While
from src.core.values import FinMap, Some, is_int
from src.parser.grammar import GRAMMAR
from src.utils.errors import DuplicateEventLabel, PicoreSyntaxError, SourceSpan, UndeclaredVariable

log = logging.getLogger(__name__)

_LARK = Lark(
    GRAMMAR,
    parser='lalr',
    start=['start', 'expr', 'stmts'],
    propagate_positions=True,
)

_BINARY = {
    'implies': 'implies',
    'or_': 'or',
    'and_': 'and',
    'eq': '=',
    'ne': '/=',
    'lt': '<',
    'le': '<=',
    'gt': '>',
    'ge': '>=',
    'in_': 'in',
    'subset': 'subset',
    'cons': '#',
    'append': '@',
    'add': '+',
    'sub': '-',
    'mul': '*',
    'apply': 'apply',
}

_UNARY = {
    'not_': 'not',
    'neg': 'neg',
    'hd': 'hd',
    'tl': 'tl',
    'len_': 'len',
    'the': 'the',
    'some': 'some',
    'is_some': 'is_some',
}


def _eof_span(text: str, source: str) -> SourceSpan:
    """Span of the last character of the input, trailing whitespace ignored."""
    body = text.rstrip()
    if not body:
        return SourceSpan(source, 1, 1, 1)
    lines = body.split('\n')
    column = len(lines[-1])
    return SourceSpan(source, len(lines), column, column + 1)


def _syntax_error(exc: UnexpectedInput, text: str, source: str) -> PicoreSyntaxError:
    token = getattr(exc, 'token', None)
    line = getattr(exc, 'line', None)
    column = getattr(exc, 'column', None)
    at_end = token is not None and token.type == '$END'
    if at_end or not isinstance(line, int) or line < 1:
        return PicoreSyntaxError('Unexpected end of input', _eof_span(text, source))
    if token is not None:
        span = SourceSpan(source, line, column, column + max(len(token), 1))
        message = f'Unexpected token {str(token)!r}'
        expected = sorted(getattr(exc, 'expected', None) or ())
        if expected:
            message += f', expected one of {", ".join(expected)}'
        return PicoreSyntaxError(message, span)
    span = SourceSpan(source, line, column, column + 1)
    return PicoreSyntaxError(f'Unexpected character {getattr(exc, "char", "?")!r}', span)


def _parse_tree(text: str, source: str, start: str) -> Tree:
    try:
        return _LARK.parse(text, start=start)
    except UnexpectedInput as exc:
        raise _syntax_error(exc, text, source) from None


class _Builder:
    """Walks a parse tree with the declaration context of one spec file."""

    def __init__(
        self,
        source: str,
        symbols: Iterable[str] = (),
        constants: Iterable[str] = (),
        variables: Iterable[str] = (),
    ):
        self.source = source
        self.symbols: Set[str] = set(symbols)
        self.constants: Set[str] = set(constants)
        self.variables: Set[str] = set(variables)

    # --- spans -------------------------------------------------------------

    def span(self, node: Union[Tree, Token]) -> Optional[SourceSpan]:
        if isinstance(node, Token):
            if node.line is None:
                return None
            end = node.end_column if node.end_column is not None else node.column + len(node)
            return SourceSpan(self.source, node.line, node.column, end)
        meta = node.meta
        if getattr(meta, 'empty', True):
            return None
        return SourceSpan(self.source, meta.line, meta.column, meta.end_column)

    def fail(self, message: str, node: Union[Tree, Token]) -> PicoreSyntaxError:
        return PicoreSyntaxError(message, self.span(node))

    # --- expressions -------------------------------------------------------

    def resolve(self, token: Token, local: FrozenSet[str]) -> Expr:
        name = str(token)
        if name in local or name in self.constants:
            return Name(name)
        if name in self.variables:
            return Var(name)
        if name in self.symbols:
            return Lit(name)
        raise UndeclaredVariable(name, self.span(token))

    def variable(self, token: Token) -> str:
        name = str(token).rstrip("'")
        if name not in self.variables:
            raise UndeclaredVariable(name, self.span(token))
        return name

    def expr(self, tree: Tree, local: FrozenSet[str] = frozenset()) -> Expr:
        kind = tree.data
        kids = tree.children
        if kind in _BINARY:
            left, right = (self.expr(child, local) for child in kids)
            return Binary(_BINARY[kind], left, right)
        if kind in _UNARY:
            return _fold_unary(_UNARY[kind], self.expr(kids[0], local))
        if kind == 'update':
            target, key, value = (self.expr(child, local) for child in kids)
            return Update(target, key, value)
        if kind == 'int_lit':
            return Lit(int(kids[0]))
        if kind == 'true_lit':
            return Lit(True)
        if kind == 'false_lit':
            return Lit(False)
        if kind == 'none_lit':
            return Lit(None)
        if kind == 'id_rel':
            return ID
        if kind == 'frame':
            return Frame(tuple(self.variable(token) for token in kids))
        if kind == 'name':
            return self.resolve(kids[0], local)
        if kind == 'primed':
            return Var(self.variable(kids[0]), True)
        if kind == 'list_lit':
            items = tuple(self.expr(child, local) for child in kids)
            if all(isinstance(item, Lit) for item in items):
                return Lit(tuple(item.value for item in items))
            return ListExpr(items)
        if kind == 'map_lit':
            pairs = tuple(
                (self.expr(entry.children[0], local), self.expr(entry.children[1], local))
                for entry in kids
            )
            if all(isinstance(k, Lit) and isinstance(v, Lit) for k, v in pairs):
                return Lit(FinMap((k.value, v.value) for k, v in pairs))
            return MapExpr(pairs)
        if kind in ('forall', 'exists'):
            var, domain, body = kids
            bound = str(var)
            return Quant(
                kind, bound, self.setexpr(domain, local), self.expr(body, local | {bound})
            )
        raise self.fail(f'Unsupported expression form {kind}', tree)

    def setexpr(self, tree: Tree, local: FrozenSet[str] = frozenset()) -> Expr:
        kind = tree.data
        if kind == 'set_empty':
            return SetEnum(())
        if kind == 'set_enum':
            return SetEnum(tuple(self.expr(child, local) for child in tree.children))
        if kind == 'set_range':
            lo, hi = tree.children
            return SetRange(self.expr(lo, local), self.expr(hi, local))
        token = tree.children[0]
        name = str(token)
        if name in local or name in self.constants:
            return Name(name)
        raise UndeclaredVariable(name, self.span(token))

    def domain(self, tree: Tree) -> DomainSpec:
        kind = tree.data
        kids = tree.children
        if kind == 'dom_bool':
            return BoolDom()
        if kind == 'dom_list':
            return ListDom(self.domain(kids[0]), int(kids[1]))
        if kind == 'dom_option':
            return OptionDom(self.domain(kids[0]))
        if kind == 'dom_map':
            return MapDom(self.setexpr(kids[0]), self.domain(kids[1]))
        return ValuesDom(self.setexpr(kids[0]))

    # --- statements ----------------------------------------------------------

    def stmts(self, tree: Tree, local: FrozenSet[str] = frozenset()) -> Program:
        items: List[Tuple[Program, Optional[Expr]]] = []
        pending: Optional[Expr] = None
        for child in tree.children:
            if child.data == 'annot':
                pending = self.expr(child.children[0], local)
                continue
            items.append((self.stmt(child, local), pending))
            pending = None
        program, _ = items[-1]
        for index in range(len(items) - 2, -1, -1):
            first, _ = items[index]
            program = Seq(first, program, items[index + 1][1])
        return program

    def stmt(self, tree: Tree, local: FrozenSet[str]) -> Program:
        kind = tree.data
        kids = tree.children
        if kind == 'assign':
            targets = [child for child in kids if isinstance(child, Token)]
            values = [child for child in kids if isinstance(child, Tree)]
            if len(targets) != len(values):
                raise self.fail(
                    f'{len(targets)} assignment targets but {len(values)} expressions', tree
                )
            names = [self.variable(token) for token in targets]
            if len(set(names)) != len(names):
                raise self.fail('A variable is assigned twice in one statement', tree)
            return Basic(tuple(zip(names, (self.expr(value, local) for value in values))))
        if kind == 'skip':
            return SKIP
        if kind == 'if_':
            cond = self.expr(kids[0], local)
            then = self.stmts(kids[1], local)
            orelse = self.stmts(kids[2], local) if len(kids) > 2 else SKIP
            return Cond(cond, then, orelse)
        if kind == 'while_':
            return While(self.expr(kids[0], local), self.stmts(kids[1], local))
        if kind == 'await_':
            return Await(self.expr(kids[0], local), self.stmts(kids[1], local))
        if kind == 'atom_':
            return Await(TRUE, self.stmts(kids[0], local))
        if kind == 'nondt':
            return Nondt(self.expr(kids[0], local))
        raise self.fail(f'Unsupported statement form {kind}', tree)

    # --- declarations --------------------------------------------------------

    def rgcond(self, tree: Tree, local: FrozenSet[str]) -> RGCond:
        pre, rely, guar, post = (self.expr(child, local) for child in tree.children)
        return RGCond(pre, rely, guar, post)

    def event_def(self, tree: Tree) -> EventDef:
        tokens = [child for child in tree.children if isinstance(child, Token)]
        subtrees = {child.data: child for child in tree.children if isinstance(child, Tree)}
        name_token, unit_token = tokens
        params = tuple(str(p) for p in subtrees['param_list'].children) if 'param_list' in subtrees else ()
        if len(set(params)) != len(params):
            raise self.fail(f'Repeated parameter in event {name_token}', name_token)
        unit = str(unit_token)
        local = set(params)
        if unit not in self.symbols:
            local.add(unit)
        local = frozenset(local)
        guard = self.expr(subtrees['when'].children[0], local) if 'when' in subtrees else TRUE
        body = self.stmts(subtrees['stmts'], local)
        return EventDef(str(name_token), params, unit, guard, body, self.span(name_token))

    def event_ref(self, tree: Tree, events: Dict[str, EventDef]) -> EventRef:
        name_token = tree.children[0]
        if str(name_token) not in events:
            raise UndeclaredVariable(str(name_token), self.span(name_token))
        param_domains = tuple(
            (str(child.children[0]), self.setexpr(child.children[1])) for child in tree.children[1:]
        )
        return EventRef(str(name_token), param_domains, self.span(name_token))

    def esys(self, tree: Tree, events: Dict[str, EventDef]) -> EsysDecl:
        if tree.data == 'esys_seq':
            head, rest = tree.children
            return SeqDecl(self.event_ref(head, events), self.esys(rest, events))
        return SetDecl(tuple(self.event_ref(child, events) for child in tree.children))

    def event_scope(self, event: EventDef) -> FrozenSet[str]:
        local = set(event.params)
        if event.unit not in self.symbols:
            local.add(event.unit)
        return frozenset(local)


def _fold_unary(op: str, arg: Expr) -> Expr:
    if isinstance(arg, Lit):
        if op == 'neg' and is_int(arg.value):
            return Lit(-arg.value)
        if op == 'some':
            return Lit(Some(arg.value))
    return Unary(op, arg)


def _sections(tree: Tree) -> Dict[str, Tree]:
    return {child.data: child for child in tree.children}


def _declare(seen: Set[str], token: Token, builder: _Builder, what: str) -> str:
    name = str(token)
    if name in seen:
        raise builder.fail(f'{what} {name} declared twice', token)
    seen.add(name)
    return name


def parse_spec(text: str, source: str = '<string>') -> SpecFile:
    """Parse the text of a ``.picore`` file into a :class:`SpecFile`."""
    tree = _parse_tree(text, source, 'start')
    sections = _sections(tree)
    builder = _Builder(source)
    declared: Set[str] = set()

    name = Path(source).stem if source != '<string>' else 'spec'
    if 'header' in sections:
        name = str(sections['header'].children[0])

    symbols: List[str] = []
    if 'symbols' in sections:
        for token in sections['symbols'].children:
            symbols.append(_declare(declared, token, builder, 'Symbol'))
    builder.symbols = set(symbols)

    constants: List[Tuple[str, Expr]] = []
    if 'constants' in sections:
        for const_def in sections['constants'].children:
            token, value = const_def.children
            expr = builder.expr(value)
            constants.append((_declare(declared, token, builder, 'Constant'), expr))
            builder.constants.add(str(token))

    var_decls = sections['domains'].children
    for var_decl in var_decls:
        builder.variables.add(_declare(declared, var_decl.children[0], builder, 'Variable'))
    variables = tuple((str(decl.children[0]), builder.domain(decl.children[1])) for decl in var_decls)

    init = builder.expr(sections['init'].children[0])

    events: Dict[str, EventDef] = {}
    for event_tree in sections['events'].children:
        event = builder.event_def(event_tree)
        if event.name in events:
            raise DuplicateEventLabel(event.name, event.span)
        events[event.name] = event

    system: List[Tuple[str, EsysDecl]] = []
    units: Set[str] = set()
    for unit_def in sections['system'].children:
        unit_token, esys_tree = unit_def.children
        unit = str(unit_token)
        if unit not in builder.symbols:
            raise UndeclaredVariable(unit, builder.span(unit_token))
        if unit in units:
            raise builder.fail(f'Unit {unit} declared twice', unit_token)
        units.add(unit)
        system.append((unit, builder.esys(esys_tree, events)))

    rgspecs: List[RGEntry] = []
    unit_specs: List[Tuple[str, RGCond]] = []
    if 'rgspecs' in sections:
        covered: Set[str] = set()
        for entry in sections['rgspecs'].children:
            target = entry.children[0]
            key = f'{entry.data}:{target}'
            if key in covered:
                raise builder.fail(f'Second rely-guarantee entry for {target}', target)
            covered.add(key)
            if entry.data == 'rg_unit':
                if str(target) not in units:
                    raise UndeclaredVariable(str(target), builder.span(target))
                unit_specs.append((str(target), builder.rgcond(entry.children[1], frozenset())))
                continue
            if str(target) not in events:
                raise UndeclaredVariable(str(target), builder.span(target))
            local = builder.event_scope(events[str(target)])
            cond = builder.rgcond(entry.children[1], local)
            inner = builder.rgcond(entry.children[2], local) if len(entry.children) > 2 else None
            rgspecs.append(RGEntry(str(target), cond, inner))

    invariants: List[Tuple[str, Expr]] = []
    if 'invariants' in sections:
        inv_names: Set[str] = set()
        for inv_def in sections['invariants'].children:
            token, body = inv_def.children
            invariants.append((_declare(inv_names, token, builder, 'Invariant'), builder.expr(body)))

    spec = SpecFile(
        name=name,
        symbols=tuple(symbols),
        constants=tuple(constants),
        variables=variables,
        init=init,
        events=tuple(events.values()),
        system=tuple(system),
        rgspecs=tuple(rgspecs),
        unit_specs=tuple(unit_specs),
        invariants=tuple(invariants),
        source=source,
    )
    log.debug(
        'Parsed %s: %d variables, %d events, %d units',
        source, len(variables), len(events), len(system),
    )
    return spec


def parse_file(path: Union[str, Path]) -> SpecFile:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f'Specification file not found: {path}')
    with open(path, 'r', encoding='utf-8-sig') as f:
        return parse_spec(f.read(), str(path))


def _context_builder(
    variables: Iterable[str],
    symbols: Iterable[str],
    constants: Iterable[str],
) -> _Builder:
    return _Builder('<string>', symbols=symbols, constants=constants, variables=variables)


def parse_expression(
    text: str,
    variables: Iterable[str] = (),
    symbols: Iterable[str] = (),
    constants: Iterable[str] = (),
    names: Iterable[str] = (),
) -> Expr:
    """Parse a standalone expression; ``names`` are free parameter names."""
    tree = _parse_tree(text, '<string>', 'expr')
    builder = _context_builder(variables, symbols, constants)
    return builder.expr(tree, frozenset(names))


def parse_program(
    text: str,
    variables: Iterable[str] = (),
    symbols: Iterable[str] = (),
    constants: Iterable[str] = (),
    names: Iterable[str] = (),
) -> Program:
    tree = _parse_tree(text, '<string>', 'stmts')
    builder = _context_builder(variables, symbols, constants)
    return builder.stmts(tree, frozenset(names))
