"""Forward-mode Taylor jets.

``Jet3`` carries a scalar field and its partial derivatives up to third order
at one chart point. ``TensorJet`` carries an array-valued field with up to
second derivatives and is what the geometry pipeline contracts.
"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

from hermitian_lab.errors import DegenerateValueError, DomainError, OrderError

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from numpy.typing import NDArray

type Number = int | float


def _sym3(t: NDArray[np.float64]) -> NDArray[np.float64]:
    return t + t.transpose(0, 2, 1) + t.transpose(2, 1, 0)


class Jet3:
    __slots__ = ("grad", "hess", "third", "value")

    def __init__(
        self,
        value: float,
        grad: NDArray[np.float64],
        hess: NDArray[np.float64] | None = None,
        third: NDArray[np.float64] | None = None,
    ) -> None:
        if third is not None and hess is None:
            raise ValueError("third derivatives require second derivatives")
        self.value = float(value)
        self.grad = grad
        self.hess = hess
        self.third = third

    @property
    def order(self) -> int:
        if self.third is not None:
            return 3
        return 2 if self.hess is not None else 1

    @property
    def dim(self) -> int:
        return int(self.grad.shape[0])

    @classmethod
    def constant(cls, value: float, dim: int, order: int) -> Jet3:
        _check_order(order)
        return cls(
            value,
            np.zeros(dim),
            np.zeros((dim, dim)) if order >= 2 else None,
            np.zeros((dim, dim, dim)) if order >= 3 else None,
        )

    @classmethod
    def variable(cls, coords: Sequence[float], index: int, order: int) -> Jet3:
        dim = len(coords)
        jet = cls.constant(coords[index], dim, order)
        jet.grad[index] = 1.0
        return jet

    def truncate(self, order: int) -> Jet3:
        if order > self.order:
            raise OrderError(order, self.order)
        return Jet3(
            self.value,
            self.grad,
            self.hess if order >= 2 else None,
            self.third if order >= 3 else None,
        )

    def _coerce(self, other: Jet3 | Number) -> tuple[Jet3, Jet3]:
        if not isinstance(other, Jet3):
            return self, Jet3.constant(float(other), self.dim, self.order)
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch {self.dim} != {other.dim}")
        order = min(self.order, other.order)
        return self.truncate(order), other.truncate(order)

    def compose(self, f0: float, f1: float, f2: float = 0.0, f3: float = 0.0) -> Jet3:
        """Chain rule for ``f(self)`` given the derivatives of ``f`` at the value."""
        g1 = self.grad
        hess = third = None
        if self.hess is not None:
            hess = f2 * np.multiply.outer(g1, g1) + f1 * self.hess
        if self.third is not None and self.hess is not None:
            third = (
                f3 * np.einsum("a,b,c->abc", g1, g1, g1)
                + f2 * _sym3(np.multiply.outer(self.hess, g1))
                + f1 * self.third
            )
        return Jet3(f0, f1 * g1, hess, third)

    def __add__(self, other: Jet3 | Number) -> Jet3:
        a, b = self._coerce(other)
        return Jet3(
            a.value + b.value,
            a.grad + b.grad,
            None if a.hess is None or b.hess is None else a.hess + b.hess,
            None if a.third is None or b.third is None else a.third + b.third,
        )

    __radd__ = __add__

    def __neg__(self) -> Jet3:
        return Jet3(
            -self.value,
            -self.grad,
            None if self.hess is None else -self.hess,
            None if self.third is None else -self.third,
        )

    def __sub__(self, other: Jet3 | Number) -> Jet3:
        return self + (-other)

    def __rsub__(self, other: Number) -> Jet3:
        return (-self) + other

    def __mul__(self, other: Jet3 | Number) -> Jet3:
        if not isinstance(other, Jet3):
            c = float(other)
            return Jet3(
                c * self.value,
                c * self.grad,
                None if self.hess is None else c * self.hess,
                None if self.third is None else c * self.third,
            )
        u, v = self._coerce(other)
        hess = third = None
        if u.hess is not None and v.hess is not None:
            cross = np.multiply.outer(u.grad, v.grad)
            hess = u.hess * v.value + cross + cross.T + u.value * v.hess
            if u.third is not None and v.third is not None:
                third = (
                    u.third * v.value
                    + _sym3(np.multiply.outer(u.hess, v.grad))
                    + _sym3(np.multiply.outer(v.hess, u.grad))
                    + u.value * v.third
                )
        return Jet3(
            u.value * v.value, u.grad * v.value + u.value * v.grad, hess, third
        )

    __rmul__ = __mul__

    def reciprocal(self) -> Jet3:
        x = self.value
        if x == 0.0:
            raise DegenerateValueError("division", x)
        return self.compose(1 / x, -1 / x**2, 2 / x**3, -6 / x**4)

    def __truediv__(self, other: Jet3 | Number) -> Jet3:
        if not isinstance(other, Jet3):
            if other == 0:
                raise DegenerateValueError("division", 0.0)
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other: Number) -> Jet3:
        return self.reciprocal() * other

    def __pow__(self, exponent: Number) -> Jet3:
        p = float(exponent)
        x = self.value
        if x < 0 and not p.is_integer():
            raise DegenerateValueError(f"power {p}", x)
        coefficients = []
        falling = 1.0
        for k in range(4):
            if falling == 0.0:
                coefficients.append(0.0)
            elif x == 0.0 and p - k < 0:
                raise DegenerateValueError(f"power {p}", x)
            else:
                coefficients.append(falling * x ** (p - k))
            falling *= p - k
        return self.compose(*coefficients)

    def sin(self) -> Jet3:
        s, c = math.sin(self.value), math.cos(self.value)
        return self.compose(s, c, -s, -c)

    def cos(self) -> Jet3:
        s, c = math.sin(self.value), math.cos(self.value)
        return self.compose(c, -s, -c, s)

    def exp(self) -> Jet3:
        e = math.exp(self.value)
        return self.compose(e, e, e, e)

    def log(self) -> Jet3:
        x = self.value
        if x <= 0.0:
            raise DegenerateValueError("log", x)
        return self.compose(math.log(x), 1 / x, -1 / x**2, 2 / x**3)

    def sqrt(self) -> Jet3:
        x = self.value
        if x <= 0.0:
            raise DegenerateValueError("sqrt", x)
        r = math.sqrt(x)
        return self.compose(r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x))

    def __repr__(self) -> str:
        return f"Jet3(value={self.value!r}, order={self.order}, dim={self.dim})"


def _check_order(order: int) -> None:
    if order not in (1, 2, 3):
        raise OrderError(order, 3)


def fd_oracle(
    field: Callable[[NDArray[np.float64]], float],
    coords: Sequence[float],
    step: float = 1e-4,
    order: int = 2,
    contains: Callable[[NDArray[np.float64]], bool] | None = None,
) -> Jet3:
    """Central finite differences of ``field``; the stencil must stay in the chart."""
    _check_order(order)
    x0 = np.asarray(coords, dtype=float)
    dim = x0.shape[0]
    basis = np.eye(dim) * step

    def f(x: NDArray[np.float64]) -> float:
        if contains is not None and not contains(x):
            raise DomainError(x.tolist(), "Finite-difference stencil leaves the chart")
        return float(field(x))

    def gradient(x: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.array(
            [(f(x + basis[i]) - f(x - basis[i])) / (2 * step) for i in range(dim)]
        )

    def hessian(x: NDArray[np.float64]) -> NDArray[np.float64]:
        fx = f(x)
        out = np.empty((dim, dim))
        for i in range(dim):
            out[i, i] = (f(x + basis[i]) - 2 * fx + f(x - basis[i])) / step**2
            for j in range(i):
                out[i, j] = out[j, i] = (
                    f(x + basis[i] + basis[j])
                    - f(x + basis[i] - basis[j])
                    - f(x - basis[i] + basis[j])
                    + f(x - basis[i] - basis[j])
                ) / (4 * step**2)
        return out

    hess = hessian(x0) if order >= 2 else None
    third = None
    if order >= 3:
        third = np.stack(
            [
                (hessian(x0 + basis[k]) - hessian(x0 - basis[k])) / (2 * step)
                for k in range(dim)
            ],
            axis=-1,
        )
    return Jet3(f(x0), gradient(x0), hess, third)


_D1, _D2 = "Y", "Z"


@dataclass(frozen=True, slots=True)
class TensorJet:
    """Array-valued jet; derivative axes trail the value axes."""

    value: NDArray[Any]
    d1: NDArray[Any] | None = None
    d2: NDArray[Any] | None = None

    def __post_init__(self) -> None:
        if self.d2 is not None and self.d1 is None:
            raise ValueError("second derivatives require first derivatives")

    @property
    def order(self) -> int:
        if self.d2 is not None:
            return 2
        return 1 if self.d1 is not None else 0

    @property
    def rank(self) -> int:
        return self.value.ndim

    @classmethod
    def from_jets(cls, jets: Sequence[Any], order: int = 2) -> TensorJet:
        """Stack a nested sequence of ``Jet3`` into one tensor jet."""
        flat: list[Jet3] = list(np.asarray(jets, dtype=object).ravel())
        shape = np.asarray(jets, dtype=object).shape
        if any(j.order < order for j in flat):
            raise OrderError(order, min(j.order for j in flat))
        dim = flat[0].dim
        value = np.array([j.value for j in flat]).reshape(shape)
        d1 = np.array([j.grad for j in flat]).reshape((*shape, dim)) if order >= 1 else None
        d2 = (
            np.array([j.hess for j in flat]).reshape((*shape, dim, dim))
            if order >= 2
            else None
        )
        return cls(value, d1, d2)

    @classmethod
    def gradient_of_jets(cls, jets: Sequence[Jet3]) -> TensorJet:
        """Jacobian of a vector of third order jets, carried to second order."""
        if any(j.order < 3 for j in jets):
            raise OrderError(3, min(j.order for j in jets))
        return cls(
            np.array([j.grad for j in jets]),
            np.array([j.hess for j in jets]),
            np.array([j.third for j in jets]),
        )

    def truncate(self, order: int) -> TensorJet:
        if order > self.order:
            raise OrderError(order, self.order)
        return TensorJet(
            self.value, self.d1 if order >= 1 else None, self.d2 if order >= 2 else None
        )

    def _pair(self, other: TensorJet) -> tuple[TensorJet, TensorJet]:
        order = min(self.order, other.order)
        return self.truncate(order), other.truncate(order)

    def __add__(self, other: TensorJet) -> TensorJet:
        a, b = self._pair(other)
        return TensorJet(
            a.value + b.value,
            None if a.d1 is None or b.d1 is None else a.d1 + b.d1,
            None if a.d2 is None or b.d2 is None else a.d2 + b.d2,
        )

    def __neg__(self) -> TensorJet:
        return self * -1.0

    def __sub__(self, other: TensorJet) -> TensorJet:
        return self + (-other)

    def __mul__(self, scalar: complex) -> TensorJet:
        return TensorJet(
            scalar * self.value,
            None if self.d1 is None else scalar * self.d1,
            None if self.d2 is None else scalar * self.d2,
        )

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> TensorJet:
        return self * (1.0 / scalar)

    def transpose(self, *axes: int) -> TensorJet:
        r = self.rank
        return TensorJet(
            self.value.transpose(axes),
            None if self.d1 is None else self.d1.transpose((*axes, r)),
            None if self.d2 is None else self.d2.transpose((*axes, r, r + 1)),
        )

    def grad(self) -> TensorJet:
        """Partial derivative as a new trailing value axis, one order lower."""
        if self.d1 is None:
            raise OrderError(1, 0)
        return TensorJet(self.d1, self.d2, None)

    def conj(self) -> TensorJet:
        return TensorJet(
            self.value.conj(),
            None if self.d1 is None else self.d1.conj(),
            None if self.d2 is None else self.d2.conj(),
        )

    def inv(self) -> TensorJet:
        a_inv = np.linalg.inv(self.value)
        d1 = d2 = None
        if self.d1 is not None:
            d1 = -np.einsum("ab,bce,cd->ade", a_inv, self.d1, a_inv)
        if self.d2 is not None and self.d1 is not None:
            cross = np.einsum(
                "ab,bce,cd,dgf,gh->ahef", a_inv, self.d1, a_inv, self.d1, a_inv
            )
            d2 = (
                cross
                + cross.swapaxes(2, 3)
                - np.einsum("ab,bcef,cd->adef", a_inv, self.d2, a_inv)
            )
        return TensorJet(a_inv, d1, d2)

    def det(self) -> TensorJet:
        det = float(np.linalg.det(self.value))
        a_inv = np.linalg.inv(self.value)
        d1 = d2 = None
        if self.d1 is not None:
            tr = np.einsum("ab,bae->e", a_inv, self.d1)
            d1 = det * tr
            if self.d2 is not None:
                d2 = det * (
                    np.multiply.outer(tr, tr)
                    - np.einsum("ab,bce,cd,daf->ef", a_inv, self.d1, a_inv, self.d1)
                    + np.einsum("ab,baef->ef", a_inv, self.d2)
                )
        return TensorJet(np.asarray(det), d1, d2)

    def map_scalar(self, f0: float, f1: float, f2: float) -> TensorJet:
        """Chain rule for a rank-0 jet given the derivatives of ``f``."""
        if self.rank != 0:
            raise ValueError("map_scalar expects a rank-0 jet")
        d1 = d2 = None
        if self.d1 is not None:
            d1 = f1 * self.d1
            if self.d2 is not None:
                d2 = f1 * self.d2 + f2 * np.multiply.outer(self.d1, self.d1)
        return TensorJet(np.asarray(f0), d1, d2)

    def sqrt(self) -> TensorJet:
        x = float(self.value)
        if x <= 0.0:
            raise DegenerateValueError("sqrt", x)
        r = math.sqrt(x)
        return self.map_scalar(r, 0.5 / r, -0.25 / (r * x))

    def reciprocal(self) -> TensorJet:
        x = float(self.value)
        if x == 0.0:
            raise DegenerateValueError("division", x)
        return self.map_scalar(1 / x, -1 / x**2, 2 / x**3)


def _tagged(terms: list[str], output: str, tags: dict[int, str]) -> str:
    extra = "".join(tags.values())
    return ",".join(t + tags.get(i, "") for i, t in enumerate(terms)) + "->" + output + extra


def jet_einsum(subscripts: str, *operands: TensorJet | NDArray[Any]) -> TensorJet:
    """``np.einsum`` with the Leibniz rule applied to every jet operand.

    Plain arrays are constants. Subscripts must not use the letters Y and Z.
    """
    inputs, output = subscripts.replace(" ", "").split("->")
    terms = inputs.split(",")
    jet_positions = [i for i, op in enumerate(operands) if isinstance(op, TensorJet)]
    if not jet_positions:
        raise ValueError("jet_einsum needs at least one TensorJet operand")
    order = min(operands[i].order for i in jet_positions)  # type: ignore[union-attr]
    values = [op.value if isinstance(op, TensorJet) else op for op in operands]

    def contract(spec: str, replaced: dict[int, NDArray[Any]]) -> NDArray[Any]:
        args = [replaced.get(i, v) for i, v in enumerate(values)]
        return np.einsum(spec, *args, optimize=True)

    d1 = d2 = None
    if order >= 1:
        d1 = sum(
            contract(
                _tagged(terms, output, {i: _D1}),
                {i: operands[i].d1},  # type: ignore[union-attr,dict-item]
            )
            for i in jet_positions
        )
    if order >= 2:
        d2 = sum(
            contract(
                _tagged(terms, output, {i: _D1 + _D2}),
                {i: operands[i].d2},  # type: ignore[union-attr,dict-item]
            )
            for i in jet_positions
        )
        for i in jet_positions:
            for j in jet_positions:
                if i != j:
                    d2 = d2 + contract(
                        _tagged(terms, output, {i: _D1, j: _D2}),
                        {i: operands[i].d1, j: operands[j].d1},  # type: ignore[union-attr,dict-item]
                    )
    return TensorJet(np.einsum(subscripts, *values, optimize=True), d1, d2)
