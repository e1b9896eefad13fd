import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermitian_lab.errors import DegenerateValueError, DomainError, OrderError
from hermitian_lab.jets import Jet3, TensorJet, fd_oracle, jet_einsum

coordinate = st.floats(min_value=0.1, max_value=2.0, allow_nan=False)


def _field(x: np.ndarray) -> float:
    return x[0] * x[1] ** 2 + math.sin(x[0]) * math.exp(x[1])


def _jet_field(coords: list[float], order: int) -> Jet3:
    x = Jet3.variable(coords, 0, order)
    y = Jet3.variable(coords, 1, order)
    return x * y**2 + x.sin() * y.exp()


def test_variable_and_constant() -> None:
    x = Jet3.variable([1.0, 2.0], 1, 3)
    assert x.value == 2.0
    assert x.order == 3
    np.testing.assert_array_equal(x.grad, [0.0, 1.0])
    assert not x.hess.any()
    c = Jet3.constant(5.0, 2, 1)
    assert c.order == 1
    assert c.hess is None


def test_invalid_order() -> None:
    with pytest.raises(OrderError):
        Jet3.constant(1.0, 2, 4)


def test_truncate_above_order() -> None:
    with pytest.raises(OrderError):
        Jet3.constant(1.0, 2, 1).truncate(2)


def test_mixed_orders_truncate_to_lower() -> None:
    a = Jet3.variable([1.0, 2.0], 0, 3)
    b = Jet3.variable([1.0, 2.0], 1, 1)
    assert (a * b).order == 1


def test_against_finite_differences() -> None:
    coords = [0.4, 0.9]
    jet = _jet_field(coords, 3)
    oracle = fd_oracle(_field, coords, step=1e-3, order=3)
    assert jet.value == pytest.approx(oracle.value)
    np.testing.assert_allclose(jet.grad, oracle.grad, rtol=1e-5)
    np.testing.assert_allclose(jet.hess, oracle.hess, rtol=1e-4, atol=1e-6)
    np.testing.assert_allclose(jet.third, oracle.third, rtol=1e-3, atol=1e-5)


def test_third_derivatives_symmetric() -> None:
    jet = _jet_field([0.3, 1.1], 3)
    t = jet.third
    np.testing.assert_allclose(t, t.transpose(1, 0, 2))
    np.testing.assert_allclose(t, t.transpose(2, 1, 0))


@given(x=coordinate, y=coordinate)
@settings(max_examples=50)
def test_quotient_rule(x: float, y: float) -> None:
    a = Jet3.variable([x, y], 0, 2)
    b = Jet3.variable([x, y], 1, 2)
    q = a / b
    assert q.value == pytest.approx(x / y)
    np.testing.assert_allclose(q.grad, [1 / y, -x / y**2])
    np.testing.assert_allclose(q.hess, [[0.0, -1 / y**2], [-1 / y**2, 2 * x / y**3]])


@given(x=coordinate)
@settings(max_examples=50)
def test_sqrt_squared_is_identity(x: float) -> None:
    a = Jet3.variable([x], 0, 3)
    r = a.sqrt() * a.sqrt()
    assert r.value == pytest.approx(x)
    np.testing.assert_allclose(r.grad, [1.0])
    np.testing.assert_allclose(r.hess, [[0.0]], atol=1e-9)
    np.testing.assert_allclose(r.third, [[[0.0]]], atol=1e-8)


@pytest.mark.parametrize(
    ("build", "operation"),
    [
        (lambda a: a.log(), "log"),
        (lambda a: a.sqrt(), "sqrt"),
        (lambda a: a ** 0.5, "power 0.5"),
    ],
)
def test_degenerate_values(build: object, operation: str) -> None:
    a = Jet3.variable([-1.0], 0, 2)
    with pytest.raises(DegenerateValueError) as exc_info:
        build(a)  # type: ignore[operator]
    assert exc_info.value.operation == operation


def test_division_by_zero() -> None:
    with pytest.raises(DegenerateValueError):
        Jet3.constant(1.0, 1, 2) / Jet3.constant(0.0, 1, 2)


def test_integer_power_of_negative_base() -> None:
    a = Jet3.variable([-2.0], 0, 2)
    cube = a**3
    assert cube.value == -8.0
    np.testing.assert_allclose(cube.grad, [12.0])
    np.testing.assert_allclose(cube.hess, [[-12.0]])


def test_fd_oracle_rejects_stencil_outside_chart() -> None:
    with pytest.raises(DomainError):
        fd_oracle(_field, [0.0, 0.5], order=1, contains=lambda x: bool(x[0] > 0.0))


def test_tensor_jet_inverse() -> None:
    coords = [0.2, 0.5]
    x = Jet3.variable(coords, 0, 2)
    y = Jet3.variable(coords, 1, 2)
    one = Jet3.constant(1.0, 2, 2)
    matrix = TensorJet.from_jets([[one + x * x, x * y], [x * y, one + y * y]])
    product = jet_einsum("ab,bc->ac", matrix, matrix.inv())
    np.testing.assert_allclose(product.value, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(product.d1, 0.0, atol=1e-12)
    np.testing.assert_allclose(product.d2, 0.0, atol=1e-11)


def test_tensor_jet_determinant() -> None:
    coords = [0.3, 0.8]
    x = Jet3.variable(coords, 0, 2)
    y = Jet3.variable(coords, 1, 2)
    matrix = TensorJet.from_jets([[x, y], [y * y, x * x]])
    det = matrix.det()
    expected = x * x * x - y * y * y
    assert float(det.value) == pytest.approx(expected.value)
    np.testing.assert_allclose(det.d1, expected.grad)
    np.testing.assert_allclose(det.d2, expected.hess)
