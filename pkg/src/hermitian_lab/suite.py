"""One run over a manifold: classification, pointwise identities, scalars, integrals, theorems."""

import enum
import logging
import pathlib
from typing import TYPE_CHECKING

import pydantic

from hermitian_lab import hermitian
from hermitian_lab.constants import DEFAULT_T_VALUES, LEDGER_HASH
from hermitian_lab.decorators import manifold_run, parallel_points
from hermitian_lab.errors import (
    InputError,
    NoUsablePointsError,
    SpecFileError,
    SpecValidationError,
)
from hermitian_lab.identities import PointContext, run_pointwise_suite, scalar_report
from hermitian_lab.integrals import integrand, integrate, sign_theorems
from hermitian_lab.log import log_after_call
from hermitian_lab.manifold import manifold_from_spec
from hermitian_lab.schemas import IdentityResult, ManifoldReport, ManifoldSpecFile, Report
from hermitian_lab.version import __version__
from hermitian_lab.zoo import CATALOG, get_manifold

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from hermitian_lab.integrals import Request
    from hermitian_lab.manifold import Manifold
    from hermitian_lab.schemas import (
        ChartPoint,
        ClassResult,
        NormBundle,
        RunConfig,
        ScalarReport,
    )


class Stage(enum.StrEnum):
    IDENTITIES = "identities"
    SCALARS = "scalars"
    INTEGRALS = "integrals"


ALL_STAGES = frozenset({Stage.IDENTITIES, Stage.INTEGRALS})

CLASSIFICATION_ANCHOR = "torsion norms at the point"
SCALAR_REPORT_ANCHOR = "scalar curvatures at the point"


def read_spec(path: pathlib.Path) -> ManifoldSpecFile:
    try:
        text = path.read_text()
    except OSError as e:
        raise SpecFileError(f"Cannot read spec file {path}: {e}") from e
    try:
        return ManifoldSpecFile.model_validate_json(text)
    except pydantic.ValidationError as e:
        raise SpecValidationError(e) from e


def load_manifolds(config: RunConfig) -> list[Manifold]:
    """The manifold named in the config or read from its spec file; ``all`` selects the catalog."""
    if config.spec is not None:
        return [manifold_from_spec(read_spec(config.spec))]
    if config.manifold is None:
        raise InputError("Pass a catalog manifold name or a spec file")
    if config.manifold == "all":
        return [get_manifold(name) for name in CATALOG]
    return [get_manifold(config.manifold)]


def t_values(config: RunConfig, n: int) -> list[float]:
    """Configured t values, or the defaults plus the threshold 1 - 1/(2(n-1))."""
    if config.t_values:
        return list(config.t_values)
    return sorted({*DEFAULT_T_VALUES, 1 - 1 / (2 * (n - 1))})


def requested_integrals(names: Sequence[str], ts: Sequence[float]) -> list[Request]:
    requests: list[Request] = []
    for name in names:
        if integrand(name).uses_t:
            requests += [(name, t) for t in ts]
        else:
            requests.append((name, None))
    return requests


def _split[T](outcomes: Iterable[T | IdentityResult]) -> tuple[list[T], list[IdentityResult]]:
    values: list[T] = []
    failures: list[IdentityResult] = []
    for outcome in outcomes:
        if isinstance(outcome, IdentityResult):
            failures.append(outcome)
        else:
            values.append(outcome)
    return values, failures


def classify_points(
    manifold: Manifold, points: Sequence[ChartPoint], tol: float, max_workers: int
) -> tuple[ClassResult, list[IdentityResult]]:
    """Classification over the points that evaluate, plus one failure per point that did not.

    Raises ``NoUsablePointsError`` when no point survives.
    """

    def on_error(point: ChartPoint, error: Exception) -> IdentityResult:
        return IdentityResult.failure("classification", CLASSIFICATION_ANCHOR, error, point=point)

    @parallel_points(max_workers=max_workers, on_error=on_error)
    def bundle(point: ChartPoint) -> NormBundle | IdentityResult:
        return manifold.geometry(point).norms

    bundles, failures = _split(bundle(points))
    if not bundles:
        raise NoUsablePointsError(manifold.name, len(points))
    return hermitian.classify(bundles, manifold.n, tol, manifold.expected_class), failures


def scalar_reports(
    manifold: Manifold, points: Sequence[ChartPoint], ts: Sequence[float], max_workers: int
) -> tuple[list[ScalarReport], list[IdentityResult]]:
    def on_error(point: ChartPoint, error: Exception) -> IdentityResult:
        return IdentityResult.failure("scalar_report", SCALAR_REPORT_ANCHOR, error, point=point)

    @parallel_points(max_workers=max_workers, on_error=on_error)
    def report(point: ChartPoint) -> ScalarReport | IdentityResult:
        return scalar_report(PointContext(manifold.geometry(point)), ts)

    return _split(report(points))


def default_integrals(n: int, classification: ClassResult, ts: Sequence[float]) -> list[Request]:
    requests: list[Request] = [("volume", None), ("s_minus_sJ", None), ("delta_lee", None)]
    requests += [("total_2s1_minus_s", t) for t in ts]
    requests += [("total_s1_minus_s2", t) for t in ts]
    if "W1" not in classification.label and "W2" not in classification.label:
        requests += [("bismut_gap", None), ("chern_gap", None)]
        if n >= 3:
            requests += [(f"kgauduchon:k={k}", None) for k in range(1, n)]
    return requests


def _report_summary(report: ManifoldReport) -> dict[str, object]:
    return {
        "failed_identities": sum(not r.passed for r in report.results),
        "failed_theorems": sum(th.status == "failed" for th in report.theorems),
        "label": report.classification.label if report.classification else None,
    }


@manifold_run
@log_after_call(
    log_level=logging.INFO,
    log_message="manifold_report",
    excluded_fields=("manifold", "config"),
    result_extractor=_report_summary,
)
def run_manifold(
    manifold: Manifold,
    config: RunConfig,
    stages: Iterable[Stage] = ALL_STAGES,
) -> ManifoldReport:
    stages = frozenset(stages)
    ts = t_values(config, manifold.n)
    points = manifold.domain.sample(config.points, config.seed)
    classification, failures = classify_points(
        manifold, points, config.classify_tol, config.max_workers
    )
    report = ManifoldReport(
        manifold=manifold.name, dim=manifold.dim, classification=classification, results=failures
    )
    if Stage.IDENTITIES in stages:
        report.results += run_pointwise_suite(
            manifold, points, ts, config.tol_abs, config.tol_rel, config.max_workers
        )
    if Stage.SCALARS in stages:
        report.scalars, failures = scalar_reports(manifold, points, ts, config.max_workers)
        report.results += failures
    if Stage.INTEGRALS in stages:
        quadrature = manifold.domain.quadrature(config.points, config.seed, manifold.homogeneous)
        requests = (
            requested_integrals(config.integrands, ts)
            if config.integrands
            else default_integrals(manifold.n, classification, ts)
        )
        report.integrals = integrate(manifold, requests, quadrature, config.max_workers)
        report.theorems = sign_theorems(
            manifold,
            quadrature,
            classification,
            ts,
            config.tol_abs,
            config.tol_rel,
            config.classify_tol,
            config.max_workers,
            config.quadrature_sigmas,
        )
    return report


def build_report(config: RunConfig, manifolds: Sequence[ManifoldReport]) -> Report:
    return Report(
        version=__version__,
        config=config,
        manifolds=list(manifolds),
        ledger_hash=LEDGER_HASH,
    )
