"""Expression language for chart fields.

Grammar, loosest binding first::

    expr     :: term [('+' | '-') term]*
    term     :: unary [('*' | '/') unary]*
    unary    :: '-' unary | power
    power    :: atom ['^' exponent]
    exponent :: ['-'] number | '(' ['-'] number ['/' number] ')'
    atom     :: fn '(' expr ')' | 'pi' | number | 'x'k | '(' expr ')'

Exponents are rational literals, so every field stays differentiable wherever
its base is positive. A fractional exponent needs parentheses, so ``x1^2/2``
is half the square.
"""

import functools
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import pyparsing as pp

from hermitian_lab.errors import (
    DegenerateValueError,
    ExpressionSyntaxError,
    IndexOutOfRangeError,
    UnknownIdentifierError,
)
from hermitian_lab.jets import Jet3

if TYPE_CHECKING:
    from collections.abc import Sequence

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


@dataclass(frozen=True, slots=True)
class Constant:
    value: float


@dataclass(frozen=True, slots=True)
class Coordinate:
    index: int


@dataclass(frozen=True, slots=True)
class Unary:
    func: str
    operand: Expr


@dataclass(frozen=True, slots=True)
class Binary:
    op: str
    left: Expr
    right: Expr


type Expr = Constant | Coordinate | Unary | Binary


@dataclass(frozen=True, slots=True)
class _Name:
    name: str
    loc: int


def _fold(tokens: pp.ParseResults) -> Any:
    items = list(tokens)
    node = items[0]
    for op, rhs in zip(items[1::2], items[2::2], strict=True):
        node = Binary(op, node, rhs)
    return node


def _exponent(tokens: pp.ParseResults) -> Constant:
    items = list(tokens)
    sign = -1.0 if items[0] == "-" else 1.0
    numbers = [t for t in items if isinstance(t, Constant)]
    value = numbers[0].value
    if len(numbers) == 2:
        if numbers[1].value == 0.0:
            raise pp.ParseFatalException("zero denominator in exponent")
        value /= numbers[1].value
    return Constant(sign * value)


@functools.cache
def _grammar() -> pp.ParserElement:
    lpar, rpar = pp.Suppress("("), pp.Suppress(")")
    number = pp.Regex(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?").set_parse_action(
        lambda t: Constant(float(t[0]))
    )
    pi = pp.Keyword("pi").set_parse_action(lambda: Constant(math.pi))
    ident = pp.Word(pp.alphas, pp.alphanums + "_").set_parse_action(
        lambda s, loc, t: _Name(t[0], loc)
    )
    expr = pp.Forward()
    fn = pp.MatchFirst([pp.Keyword(name) for name in FUNCTIONS])
    call = (fn + lpar + expr + rpar).set_parse_action(lambda t: Unary(t[0], t[1]))
    signed = pp.Opt("-") + number
    rational = signed + pp.Opt(pp.Suppress("/") + number)
    exponent = (signed | lpar + rational + rpar).set_parse_action(_exponent)
    atom = call | pi | number | ident | lpar + expr + rpar
    power = (atom + pp.Opt(pp.Suppress("^") + exponent)).set_parse_action(
        lambda t: Binary("^", t[0], t[1]) if len(t) == 2 else t[0]
    )
    unary = pp.Forward()
    unary <<= (pp.Suppress("-") + unary).set_parse_action(
        lambda t: Unary("neg", t[0])
    ) | power
    term = (unary + pp.ZeroOrMore(pp.one_of("* /") + unary)).set_parse_action(_fold)
    expr <<= (term + pp.ZeroOrMore(pp.one_of("+ -") + term)).set_parse_action(_fold)
    return expr


def _byte_offset(source: str, loc: int) -> int:
    return len(source[:loc].encode())


def _resolve(node: Any, source: str, dim: int) -> Expr:
    match node:
        case _Name(name=name, loc=loc):
            offset = _byte_offset(source, loc)
            if name[0] != "x" or not name[1:].isdigit() or name[1] == "0":
                raise UnknownIdentifierError(name, offset)
            index = int(name[1:])
            if index > dim:
                raise IndexOutOfRangeError(name, offset, dim)
            return Coordinate(index - 1)
        case Unary(func=func, operand=operand):
            return Unary(func, _resolve(operand, source, dim))
        case Binary(op=op, left=left, right=right):
            return Binary(op, _resolve(left, source, dim), _resolve(right, source, dim))
        case _:
            return node


def parse(source: str, dim: int) -> Expr:
    try:
        tokens = _grammar().parse_string(source, parse_all=True)
    except pp.ParseBaseException as e:
        raise ExpressionSyntaxError(source, _byte_offset(source, e.loc), e.msg) from e
    return _resolve(tokens[0], source, dim)


def pretty(node: Expr) -> str:
    """Fully parenthesised rendering that parses back to the same tree."""
    match node:
        case Constant(value=value):
            return repr(value)
        case Coordinate(index=index):
            return f"x{index + 1}"
        case Unary(func="neg", operand=operand):
            return f"(-{pretty(operand)})"
        case Unary(func=func, operand=operand):
            return f"{func}({pretty(operand)})"
        case Binary(op="^", left=left, right=Constant(value=value)):
            return f"({pretty(left)} ^ ({value!r}))"
        case Binary(op=op, left=left, right=right):
            return f"({pretty(left)} {op} {pretty(right)})"
    raise TypeError(node)


def free_indices(node: Expr) -> frozenset[int]:
    match node:
        case Coordinate(index=index):
            return frozenset({index})
        case Unary(operand=operand):
            return free_indices(operand)
        case Binary(left=left, right=right):
            return free_indices(left) | free_indices(right)
    return frozenset()


def eval_expr(node: Expr, coords: Sequence[float], order: int) -> Jet3:
    """Evaluate ``node`` as a jet of the requested order at ``coords``."""
    dim = len(coords)
    match node:
        case Constant(value=value):
            return Jet3.constant(value, dim, order)
        case Coordinate(index=index):
            if index >= dim:
                raise IndexOutOfRangeError(f"x{index + 1}", 0, dim)
            return Jet3.variable(coords, index, order)
        case Unary(func="neg", operand=operand):
            return -eval_expr(operand, coords, order)
        case Unary(func=func, operand=operand):
            return getattr(eval_expr(operand, coords, order), func)()
        case Binary(op="^", left=left, right=Constant(value=value)):
            return eval_expr(left, coords, order) ** value
        case Binary(op=op, left=left, right=right):
            a, b = eval_expr(left, coords, order), eval_expr(right, coords, order)
            match op:
                case "+":
                    return a + b
                case "-":
                    return a - b
                case "*":
                    return a * b
                case "/":
                    return a / b
    raise TypeError(node)


def eval_scalar(node: Expr, coords: Sequence[float]) -> float:
    match node:
        case Constant(value=value):
            return value
        case Coordinate(index=index):
            return float(coords[index])
        case Unary(func="neg", operand=operand):
            return -eval_scalar(operand, coords)
        case Unary(func=func, operand=operand):
            x = eval_scalar(operand, coords)
            if func in {"log", "sqrt"} and x <= 0:
                raise DegenerateValueError(func, x)
            return float(getattr(math, func)(x))
        case Binary(op="^", left=left, right=Constant(value=value)):
            x = eval_scalar(left, coords)
            if x < 0 and not value.is_integer():
                raise DegenerateValueError(f"power {value}", x)
            if x == 0 and value < 0:
                raise DegenerateValueError(f"power {value}", x)
            return float(x**value)
        case Binary(op=op, left=left, right=right):
            a, b = eval_scalar(left, coords), eval_scalar(right, coords)
            match op:
                case "+":
                    return a + b
                case "-":
                    return a - b
                case "*":
                    return a * b
                case "/":
                    if b == 0:
                        raise DegenerateValueError("division", a)
                    return a / b
    raise TypeError(node)
