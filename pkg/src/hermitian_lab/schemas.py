import math
from pathlib import Path
from typing import Annotated, Literal, Self

import annotated_types
import pydantic
import pydantic_settings

from hermitian_lab.constants import (
    CLASSIFY_TOLERANCE,
    DEFAULT_POINTS,
    DEFAULT_SEED,
    DEFAULT_TOL_ABS,
    DEFAULT_TOL_REL,
    QUADRATURE_SIGMAS,
)

type NonNegativeFloat = Annotated[float, annotated_types.Ge(0.0)]
type Tolerance = Annotated[float, annotated_types.Gt(0.0)]


class ChartPoint(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(frozen=True)

    coords: tuple[float, ...]
    chart_id: str = "main"


class DomainSpec(pydantic.BaseModel):
    periodic: list[bool]
    box: list[Annotated[tuple[float, float], pydantic.Field(description="[lo, hi]")]]

    @pydantic.model_validator(mode="after")
    def _check_box(self) -> Self:
        if len(self.periodic) != len(self.box):
            raise ValueError("periodic and box must have one entry per coordinate")
        for lo, hi in self.box:
            if not lo < hi:
                raise ValueError(f"empty box interval [{lo}, {hi}]")
        return self


class ManifoldSpecFile(pydantic.BaseModel):
    """User supplied structure: component expressions of h_ab and J^a_b."""

    dim: Annotated[int, annotated_types.Ge(4)]
    metric: list[list[str]]
    acs: Annotated[list[list[str]], pydantic.Field(alias="J")]
    domain: DomainSpec
    expected_class: str | None = None
    name: str = "custom"

    model_config = pydantic.ConfigDict(populate_by_name=True)

    @pydantic.model_validator(mode="after")
    def _check_shapes(self) -> Self:
        if self.dim % 2:
            raise ValueError(f"dimension {self.dim} is odd")
        for label, rows in (("metric", self.metric), ("J", self.acs)):
            if len(rows) != self.dim or any(len(row) != self.dim for row in rows):
                raise ValueError(f"{label} must be a {self.dim}x{self.dim} matrix")
        if len(self.domain.box) != self.dim:
            raise ValueError("domain box must have one interval per coordinate")
        return self


class NormBundle(pydantic.BaseModel):
    nsq_dF: NonNegativeFloat
    nsq_dF_minus: NonNegativeFloat
    nsq_dF_plus: NonNegativeFloat
    nsq_dF0_plus: NonNegativeFloat
    nsq_N: NonNegativeFloat
    nsq_N0: NonNegativeFloat
    nsq_bN: NonNegativeFloat
    nsq_lee: NonNegativeFloat
    nsq_nablaF: NonNegativeFloat
    delta_lee: float


class ScalarReport(pydantic.BaseModel):
    point: ChartPoint
    s: float
    s_J: float
    weyl_F: float
    norms: NormBundle
    s1: dict[str, float] = pydantic.Field(description="contraction s1(t) keyed by t")
    s2: dict[str, float] = pydantic.Field(description="contraction s2(t) keyed by t")


class IdentityResult(pydantic.BaseModel):
    identity: str
    anchor: str
    point: ChartPoint | None = None
    t: float | None = None
    lhs: float
    rhs: float
    abs_err: float
    rel_err: float
    passed: Annotated[bool, pydantic.Field(alias="pass")]
    error: str | None = None

    model_config = pydantic.ConfigDict(populate_by_name=True, serialize_by_alias=True)

    @classmethod
    def compare(  # noqa: PLR0913
        cls,
        identity: str,
        anchor: str,
        lhs: float,
        rhs: float,
        tol_abs: float,
        tol_rel: float,
        point: ChartPoint | None = None,
        t: float | None = None,
        residual: float | None = None,
    ) -> IdentityResult:
        """Scalar comparison; tensor identities pass their norms and max residual."""
        abs_err = abs(lhs - rhs) if residual is None else residual
        scale = max(abs(lhs), abs(rhs))
        rel_err = abs_err / scale if scale > 0 else 0.0
        ok = math.isfinite(abs_err) and (abs_err < tol_abs or rel_err < tol_rel)
        return cls(
            identity=identity,
            anchor=anchor,
            point=point,
            t=t,
            lhs=lhs,
            rhs=rhs,
            abs_err=abs_err,
            rel_err=rel_err,
            passed=ok,
        )

    @classmethod
    def failure(
        cls,
        identity: str,
        anchor: str,
        error: Exception,
        point: ChartPoint | None = None,
        t: float | None = None,
    ) -> IdentityResult:
        return cls(
            identity=identity,
            anchor=anchor,
            point=point,
            t=t,
            lhs=math.nan,
            rhs=math.nan,
            abs_err=math.inf,
            rel_err=math.inf,
            passed=False,
            error=f"{error.__class__.__name__}: {error}",
        )


class IntegralEstimate(pydantic.BaseModel):
    integrand: str
    t: float | None = None
    value: float
    std_error: float | None = None
    points: int
    method: Literal["lattice", "quasi-random"]


class TheoremResult(pydantic.BaseModel):
    theorem: str
    status: Literal["passed", "failed", "skipped"]
    t: float | None = None
    reason: str | None = None
    integral: IntegralEstimate | None = None
    closed_form_integral: IntegralEstimate | None = None
    expected_sign: Literal[1, -1] | None = None
    equality: bool | None = None
    diagnosis: str | None = None


class ClassResult(pydantic.BaseModel):
    label: str
    components: dict[str, float]
    expected: str | None = None
    matches: bool | None = None


class ManifoldReport(pydantic.BaseModel):
    manifold: str
    dim: int
    results: list[IdentityResult] = []
    scalars: list[ScalarReport] = []
    integrals: list[IntegralEstimate] = []
    theorems: list[TheoremResult] = []
    classification: ClassResult | None = None


class RunConfig(pydantic_settings.BaseSettings):
    model_config = pydantic_settings.SettingsConfigDict(env_prefix="HERMITIAN_LAB_")

    manifold: str | None = None
    spec: Path | None = None
    points: Annotated[int, annotated_types.Ge(1)] = DEFAULT_POINTS
    seed: int = DEFAULT_SEED
    t_values: list[float] | None = None
    integrands: list[str] | None = None
    tol_abs: Tolerance = DEFAULT_TOL_ABS
    tol_rel: Tolerance = DEFAULT_TOL_REL
    classify_tol: Tolerance = CLASSIFY_TOLERANCE
    quadrature_sigmas: Tolerance = QUADRATURE_SIGMAS
    max_workers: Annotated[int, annotated_types.Ge(1)] = 4
    out: Path | None = None
    format: Literal["json", "csv"] = "json"


class Report(pydantic.BaseModel):
    version: str
    config: RunConfig
    manifolds: list[ManifoldReport]
    ledger_hash: str

    @property
    def passed(self) -> bool:
        return all(
            r.passed for m in self.manifolds for r in m.results
        ) and all(
            th.status != "failed" for m in self.manifolds for th in m.theorems
        ) and all(
            m.classification.matches is not False
            for m in self.manifolds
            if m.classification is not None
        )
