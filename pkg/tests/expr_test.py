import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermitian_lab.errors import (
    DegenerateValueError,
    ExpressionSyntaxError,
    IndexOutOfRangeError,
    UnknownIdentifierError,
)
from hermitian_lab.expr import (
    Binary,
    Constant,
    Coordinate,
    Unary,
    eval_expr,
    eval_scalar,
    free_indices,
    parse,
    pretty,
)
from hermitian_lab.jets import fd_oracle

SOURCES = (
    "x1",
    "2*x1 - x2/3",
    "-x1^2",
    "x1^(-1/2)",
    "x1^2/4 + x2",
    "sin(x1)*cos(x2) + exp(-x1)",
    "log(1 + x1^2) / sqrt(2 + x2)",
    "(x1 + x2)^(3/2)",
    "2*pi*x2",
    "1.5e-1 * x1 * x1",
)


@pytest.mark.parametrize(
    ("source", "tree"),
    [
        ("x1 + 2", Binary("+", Coordinate(0), Constant(2.0))),
        ("-x2", Unary("neg", Coordinate(1))),
        ("x1 - x2 - 1", Binary("-", Binary("-", Coordinate(0), Coordinate(1)), Constant(1.0))),
        ("x1 + x2 * 3", Binary("+", Coordinate(0), Binary("*", Coordinate(1), Constant(3.0)))),
        ("-x1^2", Unary("neg", Binary("^", Coordinate(0), Constant(2.0)))),
        ("x1^(-1/2)", Binary("^", Coordinate(0), Constant(-0.5))),
        ("x1^-1/2", Binary("/", Binary("^", Coordinate(0), Constant(-1.0)), Constant(2.0))),
        ("x1^2/2", Binary("/", Binary("^", Coordinate(0), Constant(2.0)), Constant(2.0))),
        ("sqrt(x2)", Unary("sqrt", Coordinate(1))),
    ],
)
def test_parse_tree(source: str, tree: object) -> None:
    assert parse(source, 2) == tree


@pytest.mark.parametrize(
    ("source", "coords", "expected"),
    [
        ("x1^2/2", [3.0], 4.5),
        ("x1^2/4 + x2", [2.0, 1.0], 2.0),
        ("x1^(1/2)/2", [4.0], 1.0),
        ("-x1^2/2", [2.0], -2.0),
    ],
)
def test_division_after_exponent(source: str, coords: list[float], expected: float) -> None:
    node = parse(source, len(coords))
    assert eval_scalar(node, coords) == pytest.approx(expected)
    assert eval_expr(node, coords, 1).value == pytest.approx(expected)


def test_pi_constant() -> None:
    assert parse("pi", 1) == Constant(math.pi)


@pytest.mark.parametrize("source", SOURCES)
def test_pretty_parses_back(source: str) -> None:
    node = parse(source, 2)
    assert parse(pretty(node), 2) == node


@pytest.mark.parametrize("source", ["x1 +", "(x1", "x1 ** 2", "", "x1^x2", "sin x1"])
def test_syntax_errors(source: str) -> None:
    with pytest.raises(ExpressionSyntaxError) as exc_info:
        parse(source, 2)
    assert 0 <= exc_info.value.offset <= len(source.encode())
    assert exc_info.value.source == source


def test_zero_exponent_denominator() -> None:
    with pytest.raises(ExpressionSyntaxError):
        parse("x1^(1/0)", 1)


@pytest.mark.parametrize(
    ("source", "name", "offset"),
    [("y + 1", "y", 0), ("x1 * x0", "x0", 5), ("x1 + x01", "x01", 5)],
)
def test_unknown_identifier(source: str, name: str, offset: int) -> None:
    with pytest.raises(UnknownIdentifierError) as exc_info:
        parse(source, 2)
    assert exc_info.value.name == name
    assert exc_info.value.offset == offset


def test_index_out_of_range() -> None:
    with pytest.raises(IndexOutOfRangeError) as exc_info:
        parse("1 + x5", 4)
    assert exc_info.value.offset == 4
    assert exc_info.value.dim == 4


def test_free_indices() -> None:
    assert free_indices(parse("sin(x1) + x3*x1", 4)) == {0, 2}
    assert free_indices(parse("2 + pi", 4)) == frozenset()


@pytest.mark.parametrize("source", SOURCES)
def test_jet_matches_scalar_and_finite_differences(source: str) -> None:
    coords = [0.7, 0.4]
    node = parse(source, 2)
    jet = eval_expr(node, coords, 2)
    assert jet.value == pytest.approx(eval_scalar(node, coords))
    oracle = fd_oracle(lambda x: eval_scalar(node, x), coords, step=1e-4, order=2)
    np.testing.assert_allclose(jet.grad, oracle.grad, rtol=1e-6, atol=1e-8)
    np.testing.assert_allclose(jet.hess, oracle.hess, rtol=1e-4, atol=1e-5)


@given(
    a=st.floats(min_value=-3.0, max_value=3.0),
    b=st.floats(min_value=-3.0, max_value=3.0),
)
@settings(max_examples=50)
def test_polynomial_values(a: float, b: float) -> None:
    node = parse("x1^2 - 3*x1*x2 + x2^3", 2)
    assert eval_scalar(node, [a, b]) == pytest.approx(a**2 - 3 * a * b + b**3, abs=1e-9)


def test_degenerate_at_evaluation() -> None:
    node = parse("log(x1)", 1)
    with pytest.raises(DegenerateValueError):
        eval_expr(node, [0.0], 2)


@pytest.mark.parametrize("source", ["sqrt(x1)", "log(x1)"])
@pytest.mark.parametrize("value", [0.0, -1.0])
def test_scalar_and_jet_agree_on_domain_boundary(source: str, value: float) -> None:
    node = parse(source, 1)
    with pytest.raises(DegenerateValueError):
        eval_scalar(node, [value])
    with pytest.raises(DegenerateValueError):
        eval_expr(node, [value], 1)
