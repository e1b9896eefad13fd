"""Structures on charts and the per-point geometry bundle built from them."""

import functools
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Protocol

import numpy as np

from hermitian_lab import expr, hermitian
from hermitian_lab.domains import BoxDomain
from hermitian_lab.errors import ChartError, DomainError
from hermitian_lab.jets import TensorJet, jet_einsum
from hermitian_lab.riemannian import christoffel, covariant_derivative_acs, riemann
from hermitian_lab.schemas import ChartPoint
from hermitian_lab.tensors import (
    Frame,
    build_adapted_frame,
    codifferential,
    exterior_derivative,
    standard_complex_structure,
)

if TYPE_CHECKING:
    from collections.abc import Callable, Mapping, Sequence

    from numpy.typing import NDArray

    from hermitian_lab.domains import Domain
    from hermitian_lab.schemas import ManifoldSpecFile, NormBundle


class StructureField(Protocol):
    dim: int

    def jets(self, coords: Sequence[float]) -> tuple[TensorJet, TensorJet]:
        """Second order jets of (h_ab, J^a_b) at ``coords``."""
        ...


def _matrix_jets(entries: Sequence[Sequence[expr.Expr]], coords: Sequence[float]) -> TensorJet:
    return TensorJet.from_jets(
        [[expr.eval_expr(e, coords, 2) for e in row] for row in entries], order=2
    )


def _parse_matrix(rows: Sequence[Sequence[str]], dim: int) -> tuple[tuple[expr.Expr, ...], ...]:
    return tuple(tuple(expr.parse(s, dim) for s in row) for row in rows)


@dataclass(frozen=True)
class ExpressionStructure:
    """h and J given component by component as expressions in the chart."""

    dim: int
    metric: tuple[tuple[expr.Expr, ...], ...]
    acs: tuple[tuple[expr.Expr, ...], ...]

    @classmethod
    def from_strings(
        cls, dim: int, metric: Sequence[Sequence[str]], acs: Sequence[Sequence[str]]
    ) -> ExpressionStructure:
        return cls(dim, _parse_matrix(metric, dim), _parse_matrix(acs, dim))

    def jets(self, coords: Sequence[float]) -> tuple[TensorJet, TensorJet]:
        return _matrix_jets(self.metric, coords), _matrix_jets(self.acs, coords)


@dataclass(frozen=True)
class EmbeddedStructure:
    """Pull back of an ambient metric and structure through an embedding E.

    h = DE^T DE and J = h^-1 DE^T J_amb(E) DE, which is the tangential
    projection of the ambient rule. E needs third order jets so that J keeps
    second order ones.
    """

    dim: int
    embedding: tuple[expr.Expr, ...]
    ambient: Callable[[TensorJet], TensorJet]

    def jets(self, coords: Sequence[float]) -> tuple[TensorJet, TensorJet]:
        e3 = [expr.eval_expr(e, coords, 3) for e in self.embedding]
        position = TensorJet.from_jets(e3, order=2)
        jacobian = TensorJet.gradient_of_jets(e3)
        h = jet_einsum("ia,ib->ab", jacobian, jacobian)
        acs = jet_einsum(
            "ab,ib,ij,jc->ac", h.inv(), jacobian, self.ambient(position), jacobian
        )
        return h, acs


def embedded_structure(
    dim: int, embedding: Sequence[str], ambient: Callable[[TensorJet], TensorJet]
) -> EmbeddedStructure:
    return EmbeddedStructure(dim, tuple(expr.parse(s, dim) for s in embedding), ambient)


@dataclass(frozen=True)
class ConjugatedStructure:
    """J = P J0 P^-1 with h averaged to be J-invariant, h = (h0 + J^T h0 J) / 2."""

    dim: int
    conjugator: tuple[tuple[expr.Expr, ...], ...]
    metric0: tuple[tuple[expr.Expr, ...], ...]

    def jets(self, coords: Sequence[float]) -> tuple[TensorJet, TensorJet]:
        p = _matrix_jets(self.conjugator, coords)
        h0 = _matrix_jets(self.metric0, coords)
        acs = jet_einsum("ab,bc,cd->ad", p, standard_complex_structure(self.dim // 2), p.inv())
        h = (h0 + jet_einsum("ba,bc,cd->ad", acs, h0, acs)) * 0.5
        return h, acs


@dataclass(frozen=True)
class Manifold:
    name: str
    dim: int
    charts: Mapping[str, StructureField]
    domain: Domain
    expected_class: str | None = None
    expected_scalars: Mapping[str, float] = field(default_factory=dict)
    homogeneous: bool = False
    description: str = ""
    spec_file: ManifoldSpecFile | None = None

    @property
    def n(self) -> int:
        return self.dim // 2

    @property
    def integrable(self) -> bool | None:
        """Known integrability of the catalog structure, None when unknown."""
        if self.expected_class is None:
            return None
        return "W1" not in self.expected_class and "W2" not in self.expected_class

    def geometry(self, point: ChartPoint) -> LocalGeometry:
        if point.chart_id not in self.charts:
            raise ChartError(f"{self.name} has no chart {point.chart_id!r}")
        if not self.domain.contains(point):
            raise DomainError(point.coords, f"Point outside the chart domain of {self.name}")
        h, acs = self.charts[point.chart_id].jets(point.coords)
        return LocalGeometry(point, h, acs)

    def contains_coords(self, chart_id: str) -> Callable[[NDArray[np.float64]], bool]:
        def contains(x: NDArray[np.float64]) -> bool:
            return self.domain.contains(ChartPoint(coords=tuple(map(float, x)), chart_id=chart_id))

        return contains


def manifold_from_spec(spec: ManifoldSpecFile) -> Manifold:
    structure = ExpressionStructure.from_strings(spec.dim, spec.metric, spec.acs)
    domain = BoxDomain(
        box=tuple(tuple(b) for b in spec.domain.box),  # type: ignore[misc]
        periodic=tuple(spec.domain.periodic),
    )
    return Manifold(
        name=spec.name,
        dim=spec.dim,
        charts={"main": structure},
        domain=domain,
        expected_class=spec.expected_class,
        spec_file=spec,
    )


class LocalGeometry:
    """Jets of h and J at one point and everything derived from them, computed lazily.

    Coordinate quantities keep jets as long as something downstream differentiates
    them; frame quantities are plain arrays.
    """

    def __init__(self, point: ChartPoint, metric: TensorJet, acs: TensorJet) -> None:
        self.point = point
        self.metric = metric
        self.acs = acs

    @property
    def dim(self) -> int:
        return int(self.metric.value.shape[0])

    @property
    def n(self) -> int:
        return self.dim // 2

    @functools.cached_property
    def frame(self) -> Frame:
        return build_adapted_frame(self.metric.value, self.acs.value)

    @functools.cached_property
    def acs_frame(self) -> NDArray[np.float64]:
        """``acs_frame[C, A]`` is component C of J e_A."""
        return self.frame.coframe @ self.acs.value @ self.frame.vectors

    @functools.cached_property
    def hinv(self) -> TensorJet:
        return self.metric.inv()

    @functools.cached_property
    def sqrt_det(self) -> TensorJet:
        return self.metric.det().sqrt()

    @functools.cached_property
    def gamma(self) -> TensorJet:
        return christoffel(self.metric, self.hinv)

    @functools.cached_property
    def nabla_acs(self) -> TensorJet:
        return covariant_derivative_acs(self.acs, self.gamma)

    @functools.cached_property
    def riemann_frame(self) -> NDArray[np.float64]:
        return self.frame.covariant(riemann(self.gamma, self.metric.value))

    @functools.cached_property
    def fundamental_form(self) -> TensorJet:
        """F_ab = h(J d_a, d_b)."""
        return jet_einsum("cb,ca->ab", self.metric, self.acs)

    @functools.cached_property
    def fundamental_form_frame(self) -> NDArray[np.float64]:
        return self.frame.covariant(self.fundamental_form.value)

    @functools.cached_property
    def dF(self) -> TensorJet:
        return exterior_derivative(self.fundamental_form)

    @functools.cached_property
    def lee(self) -> TensorJet:
        """alpha_c = 1/2 F^{ab} dF_{abc}, first order jet."""
        return jet_einsum(
            "ac,bd,cd,abe->e", self.hinv, self.hinv, self.fundamental_form, self.dF
        ) * 0.5

    @functools.cached_property
    def delta_F(self) -> TensorJet:
        return codifferential(self.fundamental_form, self.metric, self.hinv, self.sqrt_det)

    @functools.cached_property
    def d_delta_F(self) -> NDArray[np.float64]:
        return exterior_derivative(self.delta_F).value

    @functools.cached_property
    def delta_lee(self) -> float:
        return float(codifferential(self.lee, self.metric, self.hinv, self.sqrt_det).value)

    def covariant_frame(self, tensor: NDArray[Any]) -> NDArray[Any]:
        return self.frame.covariant(tensor)

    @functools.cached_property
    def decomposition(self) -> hermitian.Decomposition:
        return hermitian.decompose(self)

    @functools.cached_property
    def norms(self) -> NormBundle:
        return hermitian.norms(self)
