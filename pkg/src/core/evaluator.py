"""Evaluation of expressions by compilation to Python closures.

Compiled readers take ``(pre, post)`` mappings. State predicates are run
with an empty post mapping so that a stray primed variable is reported.
``and``/``or``/``-->`` short-circuit left to right.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Mapping, Optional, Tuple

from src.core.expressions import (
    FALSE,
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
    and_all,
    children,
    negate,
    or_all,
    rebuild,
    walk,
)
from src.core.values import FinMap, Some, Value, is_int, value_key, values_equal
from src.utils.errors import EvalError, HeadOfEmpty, TypeMismatch, UnboundVariable

Reader = Callable[[Mapping, Mapping], Value]
FrameCheck = Callable[[FrozenSet[str], Mapping, Mapping], Value]

_NO_STATE: Mapping = FinMap()


class _Unknown:
    __slots__ = ()

    def __repr__(self) -> str:
        return 'UNKNOWN'


UNKNOWN = _Unknown()


def full_frame(changed: FrozenSet[str], pre: Mapping, post: Mapping) -> bool:
    for name in pre:
        if name in changed:
            continue
        try:
            after = post[name]
        except KeyError:
            raise UnboundVariable(name + "'") from None
        if not values_equal(pre[name], after):
            return False
    return True


# --- operators -------------------------------------------------------------

def _ints(op: str, a: Value, b: Value) -> None:
    if not is_int(a):
        raise TypeMismatch(op, a)
    if not is_int(b):
        raise TypeMismatch(op, b)


def _list(op: str, value: Value) -> tuple:
    if not isinstance(value, tuple):
        raise TypeMismatch(op, value)
    return value


def _op_not(v):
    if v is True:
        return False
    if v is False:
        return True
    raise TypeMismatch('NOT', v)


def _op_neg(v):
    if not is_int(v):
        raise TypeMismatch('-', v)
    return -v


def _op_hd(v):
    items = _list('hd', v)
    if not items:
        raise HeadOfEmpty('hd')
    return items[0]


def _op_tl(v):
    return _list('tl', v)[1:]


def _op_len(v):
    return len(_list('len', v))


def _op_the(v):
    if isinstance(v, Some):
        return v.value
    if v is None:
        raise HeadOfEmpty('the')
    raise TypeMismatch('the', v)


def _op_is_some(v):
    if v is None:
        return False
    if isinstance(v, Some):
        return True
    raise TypeMismatch('is_some', v)


UNARY: Dict[str, Callable[[Value], Value]] = {
    'not': _op_not,
    'neg': _op_neg,
    'hd': _op_hd,
    'tl': _op_tl,
    'len': _op_len,
    'the': _op_the,
    'some': Some,
    'is_some': _op_is_some,
}


def _op_eq(a, b):
    return values_equal(a, b)


def _op_ne(a, b):
    return not values_equal(a, b)


def _op_lt(a, b):
    _ints('<', a, b)
    return a < b


def _op_le(a, b):
    _ints('<=', a, b)
    return a <= b


def _op_gt(a, b):
    _ints('>', a, b)
    return a > b


def _op_ge(a, b):
    _ints('>=', a, b)
    return a >= b


def _op_in(a, b):
    items = _list('IN', b)
    if a not in items:
        return False
    return any(values_equal(a, item) for item in items)


def _op_subset(a, b):
    return set(_list('SUBSET', a)) <= set(_list('SUBSET', b))


def _op_cons(a, b):
    return (a,) + _list('#', b)


def _op_append(a, b):
    return _list('@', a) + _list('@', b)


def _op_add(a, b):
    _ints('+', a, b)
    return a + b


def _op_sub(a, b):
    _ints('-', a, b)
    return a - b


def _op_mul(a, b):
    _ints('*', a, b)
    return a * b


def _op_apply(m, k):
    if not isinstance(m, FinMap):
        raise TypeMismatch('apply', m)
    try:
        return m[k]
    except KeyError:
        raise TypeMismatch('apply', k) from None


def _op_update(m, k, v):
    if not isinstance(m, FinMap):
        raise TypeMismatch('update', m)
    return m.set(k, v)


BINARY: Dict[str, Callable[[Value, Value], Value]] = {
    '=': _op_eq,
    '/=': _op_ne,
    '<': _op_lt,
    '<=': _op_le,
    '>': _op_gt,
    '>=': _op_ge,
    'in': _op_in,
    'subset': _op_subset,
    '#': _op_cons,
    '@': _op_append,
    '+': _op_add,
    '-': _op_sub,
    '*': _op_mul,
    'apply': _op_apply,
}


def _bool(op: str, value: Value) -> bool:
    if value is True or value is False:
        return value
    raise TypeMismatch(op, value)


def substitute_name(expr: Expr, name: str, replacement: Expr) -> Expr:
    if isinstance(expr, Name):
        return replacement if expr.name == name else expr
    if isinstance(expr, Quant):
        domain = substitute_name(expr.domain, name, replacement)
        body = expr.body if expr.var == name else substitute_name(expr.body, name, replacement)
        return Quant(expr.kind, expr.var, domain, body)
    return rebuild(expr, lambda child: substitute_name(child, name, replacement))


def set_values(expr: Expr, env: Optional[Mapping[str, Value]] = None) -> Tuple[Value, ...]:
    """Values of a closed finite-set expression, deduplicated in canonical order."""
    if isinstance(expr, SetRange):
        lo = compile_expr(bind(expr.lo, env or {}))(_NO_STATE, _NO_STATE)
        hi = compile_expr(bind(expr.hi, env or {}))(_NO_STATE, _NO_STATE)
        _ints('..', lo, hi)
        values = tuple(range(lo, hi + 1))
    elif isinstance(expr, SetEnum):
        values = tuple(
            compile_expr(bind(item, env or {}))(_NO_STATE, _NO_STATE) for item in expr.items
        )
    else:
        values = compile_expr(bind(expr, env or {}))(_NO_STATE, _NO_STATE)
        if not isinstance(values, tuple):
            raise TypeMismatch('set', values)
    unique = {value_key(v): v for v in values}
    return tuple(unique[key] for key in sorted(unique))


# --- strict compilation ----------------------------------------------------

def compile_expr(expr: Expr, frame: Optional[FrameCheck] = None) -> Reader:
    if frame is None:
        return _compile_default(expr)
    return _compile(expr, frame)


@lru_cache(maxsize=None)
def _compile_default(expr: Expr) -> Reader:
    return _compile(expr, full_frame)


def _compile(expr: Expr, frame: FrameCheck) -> Reader:
    kind = type(expr)
    if kind is Lit:
        value = expr.value
        return lambda pre, post: value

    if kind is Var:
        name = expr.name
        label = name + "'" if expr.primed else name
        if expr.primed:
            def read_post(pre, post):
                try:
                    return post[name]
                except KeyError:
                    raise UnboundVariable(label) from None
            return read_post

        def read_pre(pre, post):
            try:
                return pre[name]
            except KeyError:
                raise UnboundVariable(label) from None
        return read_pre

    if kind is Name:
        missing = expr.name

        def unbound(pre, post):
            raise UnboundVariable(missing)
        return unbound

    if kind is Unary:
        arg = _compile(expr.arg, frame)
        apply_unary = UNARY[expr.op]
        return lambda pre, post: apply_unary(arg(pre, post))

    if kind is Binary:
        left = _compile(expr.left, frame)
        right = _compile(expr.right, frame)
        op = expr.op
        if op == 'and':
            def run_and(pre, post):
                if not _bool('AND', left(pre, post)):
                    return False
                return _bool('AND', right(pre, post))
            return run_and
        if op == 'or':
            def run_or(pre, post):
                if _bool('OR', left(pre, post)):
                    return True
                return _bool('OR', right(pre, post))
            return run_or
        if op == 'implies':
            def run_implies(pre, post):
                if not _bool('-->', left(pre, post)):
                    return True
                return _bool('-->', right(pre, post))
            return run_implies
        apply_binary = BINARY[op]
        return lambda pre, post: apply_binary(left(pre, post), right(pre, post))

    if kind is Update:
        target = _compile(expr.target, frame)
        key = _compile(expr.key, frame)
        value = _compile(expr.value, frame)
        return lambda pre, post: _op_update(target(pre, post), key(pre, post), value(pre, post))

    if kind is ListExpr:
        items = [_compile(item, frame) for item in expr.items]
        return lambda pre, post: tuple(item(pre, post) for item in items)

    if kind is MapExpr:
        pairs = [(_compile(k, frame), _compile(v, frame)) for k, v in expr.pairs]
        return lambda pre, post: FinMap((k(pre, post), v(pre, post)) for k, v in pairs)

    if kind in (SetRange, SetEnum):
        values = set_values(expr)
        return lambda pre, post: values

    if kind is Quant:
        return _compile(unroll(expr), frame)

    if kind is Frame:
        changed = frozenset(expr.changed)
        return lambda pre, post: frame(changed, pre, post)

    raise TypeError(f'Cannot compile {expr!r}')


def unroll(quant: Quant) -> Expr:
    values = set_values(quant.domain)
    parts = [substitute_name(quant.body, quant.var, Lit(v)) for v in values]
    return and_all(parts) if quant.kind == 'forall' else or_all(parts)


def evaluate(expr: Expr, state: Mapping) -> Value:
    return compile_expr(expr)(state, _NO_STATE)


def holds(expr: Expr, state: Mapping) -> bool:
    return _bool('predicate', evaluate(expr, state))


def eval_rel(expr: Expr, pre: Mapping, post: Mapping) -> bool:
    return _bool('relation', compile_expr(expr)(pre, post))


# --- three-valued compilation ----------------------------------------------

def compile_partial(expr: Expr, frame: FrameCheck) -> Reader:
    """Kleene evaluation: unassigned slots read as UNKNOWN."""
    reader = _compile3(expr, frame)

    def run(pre, post):
        try:
            return reader(pre, post)
        except EvalError:
            return UNKNOWN
    return run


def _compile3(expr: Expr, frame: FrameCheck) -> Reader:
    kind = type(expr)
    if kind is Var:
        name = expr.name
        if expr.primed:
            return lambda pre, post: post.get(name, UNKNOWN)
        return lambda pre, post: pre.get(name, UNKNOWN)

    if kind is Unary:
        arg = _compile3(expr.arg, frame)
        apply_unary = UNARY[expr.op]

        def run_unary(pre, post):
            value = arg(pre, post)
            return UNKNOWN if value is UNKNOWN else apply_unary(value)
        return run_unary

    if kind is Binary:
        left = _compile3(expr.left, frame)
        right = _compile3(expr.right, frame)
        op = expr.op
        if op in ('and', 'or', 'implies'):
            return _kleene(op, left, right)
        apply_binary = BINARY[op]

        def run_binary(pre, post):
            a = left(pre, post)
            if a is UNKNOWN:
                return UNKNOWN
            b = right(pre, post)
            if b is UNKNOWN:
                return UNKNOWN
            return apply_binary(a, b)
        return run_binary

    if kind is Update:
        parts = [_compile3(e, frame) for e in (expr.target, expr.key, expr.value)]

        def run_update(pre, post):
            values = [p(pre, post) for p in parts]
            if any(v is UNKNOWN for v in values):
                return UNKNOWN
            return _op_update(*values)
        return run_update

    if kind is ListExpr:
        items = [_compile3(item, frame) for item in expr.items]

        def run_list(pre, post):
            values = tuple(item(pre, post) for item in items)
            return UNKNOWN if any(v is UNKNOWN for v in values) else values
        return run_list

    if kind is MapExpr:
        pairs = [(_compile3(k, frame), _compile3(v, frame)) for k, v in expr.pairs]

        def run_map(pre, post):
            values = [(k(pre, post), v(pre, post)) for k, v in pairs]
            if any(k is UNKNOWN or v is UNKNOWN for k, v in values):
                return UNKNOWN
            return FinMap(values)
        return run_map

    if kind is Quant:
        return _compile3(unroll(expr), frame)

    return _compile(expr, frame)


def _kleene(op: str, left: Reader, right: Reader) -> Reader:
    def run(pre, post):
        a = left(pre, post)
        if a is not UNKNOWN:
            a = _bool(op, a)
            if op == 'implies':
                a = not a
                if a:
                    return True
            elif a is (op == 'or'):
                return a
        b = right(pre, post)
        if b is not UNKNOWN:
            b = _bool(op, b)
            if op == 'and' and b is False:
                return False
            if op != 'and' and b is True:
                return True
        if a is UNKNOWN or b is UNKNOWN:
            return UNKNOWN
        return b
    return run


# --- binding and folding ---------------------------------------------------

def bind(expr: Expr, env: Mapping[str, Value]) -> Expr:
    """Replace parameters and constants by literals and unroll closed quantifiers."""
    return simplify(_bind(expr, env))


def _bind(expr: Expr, env: Mapping[str, Value]) -> Expr:
    if isinstance(expr, Name):
        return Lit(env[expr.name]) if expr.name in env else expr
    if isinstance(expr, Quant):
        domain = _bind(expr.domain, env)
        inner = {k: v for k, v in env.items() if k != expr.var}
        body = _bind(expr.body, inner)
        try:
            values = set_values(domain)
        except EvalError:
            return Quant(expr.kind, expr.var, domain, body)
        parts = [_bind(substitute_name(body, expr.var, Lit(v)), inner) for v in values]
        return and_all(parts) if expr.kind == 'forall' else or_all(parts)
    return rebuild(expr, lambda child: _bind(child, env))


def _closed(expr: Expr) -> bool:
    return all(isinstance(child, Lit) for child in children(expr))


def simplify(expr: Expr) -> Expr:
    """Fold constant sub-expressions; boolean connectives absorb literals."""
    if isinstance(expr, (Lit, Var, Name, Frame, Quant)):
        return expr
    expr = rebuild(expr, simplify)
    if isinstance(expr, Binary) and expr.op in ('and', 'or', 'implies'):
        return _simplify_connective(expr)
    if isinstance(expr, Unary) and expr.op == 'not' and isinstance(expr.arg, Lit):
        return negate(expr.arg)
    if isinstance(expr, (Unary, Binary, Update, ListExpr, MapExpr)) and _closed(expr):
        try:
            return Lit(compile_expr(expr)(_NO_STATE, _NO_STATE))
        except EvalError:
            return expr
    return expr


_PARTIAL_OPS = frozenset({'hd', 'the', 'apply'})


def _may_fail(expr: Expr) -> bool:
    """Whether evaluating ``expr`` can raise, so it must not be folded away."""
    for node in walk(expr):
        if isinstance(node, (Unary, Binary)) and node.op in _PARTIAL_OPS:
            return True
        if isinstance(node, (Unary, Binary, Update, ListExpr, MapExpr)) and _closed(node):
            # a closed term left unfolded raised when folded
            return True
    return False


def _simplify_connective(expr: Binary) -> Expr:
    """Absorb literal operands, keeping left-to-right evaluation errors."""
    left, right = expr.left, expr.right
    if expr.op == 'and':
        if left == FALSE:
            return FALSE
        if left == TRUE:
            return right
        if right == TRUE:
            return left
        if right == FALSE and not _may_fail(left):
            return FALSE
    elif expr.op == 'or':
        if left == TRUE:
            return TRUE
        if left == FALSE:
            return right
        if right == FALSE:
            return left
        if right == TRUE and not _may_fail(left):
            return TRUE
    else:
        if left == FALSE:
            return TRUE
        if left == TRUE:
            return right
        if right == TRUE and not _may_fail(left):
            return TRUE
        if right == FALSE:
            return negate(left)
    return expr
