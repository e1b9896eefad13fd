"""Fundamental domains: random test points and quadrature nodes."""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal, Protocol

import numpy as np
from scipy.stats import norm, qmc

from hermitian_lab.errors import ChartError
from hermitian_lab.schemas import ChartPoint

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import NDArray


@dataclass(frozen=True, slots=True)
class Quadrature:
    points: list[ChartPoint]
    weights: NDArray[np.float64]
    method: Literal["lattice", "quasi-random"]
    # True when weights already carry the Riemannian volume; otherwise they are
    # coordinate measure and get multiplied by sqrt(det h).
    riemannian: bool


class Domain(Protocol):
    def contains(self, point: ChartPoint) -> bool: ...

    def sample(self, count: int, seed: int) -> list[ChartPoint]: ...

    def quadrature(self, count: int, seed: int, homogeneous: bool) -> Quadrature: ...


def _qmc_unit(dim: int, count: int, seed: int) -> NDArray[np.float64]:
    return qmc.Halton(d=dim, scramble=True, rng=np.random.default_rng(seed)).random(count)


def _unit_vectors(uniform: NDArray[np.float64]) -> NDArray[np.float64]:
    gauss = norm.ppf(np.clip(uniform, 1e-12, 1 - 1e-12))
    return gauss / np.linalg.norm(gauss, axis=1, keepdims=True)


def sphere_area(dim: int) -> float:
    """Volume of the unit sphere S^{dim-1} in R^dim."""
    return 2 * math.pi ** (dim / 2) / math.gamma(dim / 2)


@dataclass(frozen=True, slots=True)
class BoxDomain:
    """Coordinate box; periodic axes mean the chart extends past the box."""

    box: tuple[tuple[float, float], ...]
    periodic: tuple[bool, ...]

    @property
    def volume(self) -> float:
        return math.prod(hi - lo for lo, hi in self.box)

    def contains(self, point: ChartPoint) -> bool:
        return all(
            per or lo <= x <= hi
            for x, (lo, hi), per in zip(point.coords, self.box, self.periodic, strict=True)
        )

    def _scale(self, unit: NDArray[np.float64]) -> list[ChartPoint]:
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        return [ChartPoint(coords=tuple(map(float, lo + u * (hi - lo)))) for u in unit]

    def sample(self, count: int, seed: int) -> list[ChartPoint]:
        rng = np.random.default_rng(seed)
        return self._scale(rng.uniform(size=(count, len(self.box))))

    def quadrature(self, count: int, seed: int, homogeneous: bool) -> Quadrature:
        dim = len(self.box)
        if homogeneous:
            per_axis = max(1, math.floor(count ** (1 / dim)))
            axis = (np.arange(per_axis) + 0.5) / per_axis
            unit = np.array(np.meshgrid(*[axis] * dim, indexing="ij")).reshape(dim, -1).T
            method: Literal["lattice", "quasi-random"] = "lattice"
        else:
            unit = _qmc_unit(dim, count, seed)
            method = "quasi-random"
        weights = np.full(len(unit), self.volume / len(unit))
        return Quadrature(self._scale(unit), weights, method, riemannian=False)


@dataclass(frozen=True, slots=True)
class AnnulusDomain:
    """R^dim minus the origin modulo x ~ ratio * x, in log-radial coordinates."""

    dim: int
    ratio: float = 2.0

    @property
    def volume(self) -> float:
        # h = delta / |x|^2 turns dv into d(log r) times the round sphere measure
        return math.log(self.ratio) * sphere_area(self.dim)

    def contains(self, point: ChartPoint) -> bool:
        return float(np.linalg.norm(point.coords)) > 0.0

    def _points(self, radial: NDArray[np.float64], directions: NDArray[np.float64]) -> list[ChartPoint]:
        radii = self.ratio**radial
        return [
            ChartPoint(coords=tuple(map(float, r * d)))
            for r, d in zip(radii, directions, strict=True)
        ]

    def sample(self, count: int, seed: int) -> list[ChartPoint]:
        rng = np.random.default_rng(seed)
        gauss = rng.standard_normal((count, self.dim))
        directions = gauss / np.linalg.norm(gauss, axis=1, keepdims=True)
        return self._points(rng.uniform(size=count), directions)

    def quadrature(self, count: int, seed: int, homogeneous: bool) -> Quadrature:
        unit = _qmc_unit(self.dim + 1, count, seed)
        points = self._points(unit[:, 0], _unit_vectors(unit[:, 1:]))
        return Quadrature(points, np.full(count, self.volume / count), "quasi-random", riemannian=True)


@dataclass(frozen=True, slots=True)
class SphereDomain:
    """Round S^dim covered by two stereographic charts.

    Chart ``south`` projects from the north pole and serves the southern
    hemisphere, chart ``north`` projects from the south pole.
    """

    dim: int

    @property
    def volume(self) -> float:
        return sphere_area(self.dim + 1)

    def contains(self, point: ChartPoint) -> bool:
        if point.chart_id not in ("south", "north"):
            raise ChartError(f"Unknown chart {point.chart_id!r}")
        return True

    @staticmethod
    def chart_point(p: Sequence[float]) -> ChartPoint:
        *x, last = p
        if last <= 0:
            return ChartPoint(coords=tuple(float(c) / (1 - last) for c in x), chart_id="south")
        return ChartPoint(coords=tuple(float(c) / (1 + last) for c in x), chart_id="north")

    def sample(self, count: int, seed: int) -> list[ChartPoint]:
        rng = np.random.default_rng(seed)
        gauss = rng.standard_normal((count, self.dim + 1))
        return [self.chart_point(p / np.linalg.norm(p)) for p in gauss]

    def quadrature(self, count: int, seed: int, homogeneous: bool) -> Quadrature:
        unit = _qmc_unit(self.dim + 1, count, seed)
        points = [self.chart_point(p) for p in _unit_vectors(unit)]
        return Quadrature(points, np.full(count, self.volume / count), "quasi-random", riemannian=True)
