"""Total integrals over a fundamental domain and the sign theorems read off them."""

import math
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

import numpy as np

from hermitian_lab import gauduchon, hermitian
from hermitian_lab.constants import QUADRATURE_SIGMAS, T_ROOT_HIGH, T_ROOT_LOW
from hermitian_lab.decorators import parallel_points
from hermitian_lab.errors import HypothesisError, InputError
from hermitian_lab.identities import PointContext
from hermitian_lab.log import logger
from hermitian_lab.schemas import IntegralEstimate, TheoremResult

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from numpy.typing import NDArray

    from hermitian_lab.domains import Quadrature
    from hermitian_lab.manifold import Manifold
    from hermitian_lab.schemas import ChartPoint, ClassResult


@dataclass(frozen=True, slots=True)
class Integrand:
    name: str
    evaluate: Callable[[PointContext, float], float]
    uses_t: bool = False


def _s_minus_sj(ctx: PointContext, t: float) -> float:
    s, s_j = ctx.scalars
    return s - s_j


def _s_minus_sj_closed(ctx: PointContext, t: float) -> float:
    nb = ctx.geo.norms
    return 2 / 3 * nb.nsq_dF_minus - nb.nsq_N0 / 4 + nb.nsq_lee


def _two_s1_minus_s(ctx: PointContext, t: float) -> float:
    return 2 * ctx.s12(t)[0] - ctx.scalars[0]


def _two_s1_minus_s_closed(ctx: PointContext, t: float) -> float:
    nb = ctx.geo.norms
    s = ctx.scalars[0]
    return 2 * gauduchon.s1_closed_form(s, nb, ctx.n, t) - s - (t - 2) * nb.delta_lee


def _s1_minus_s2(ctx: PointContext, t: float) -> float:
    s1, s2 = ctx.s12(t)
    return s1 - s2


def _s1_minus_s2_closed(ctx: PointContext, t: float) -> float:
    nb = ctx.geo.norms
    return gauduchon.s1_minus_s2_closed_form(nb, ctx.n, t) - (t - 0.5) * nb.delta_lee


def _bismut_gap(ctx: PointContext, t: float) -> float:
    return _s1_minus_s2(ctx, -1.0)


def _bismut_gap_closed(ctx: PointContext, t: float) -> float:
    nb = ctx.geo.norms
    return nb.nsq_dF - nb.nsq_lee


def _chern_gap(ctx: PointContext, t: float) -> float:
    return _s1_minus_s2(ctx, 1.0)


def _chern_gap_closed(ctx: PointContext, t: float) -> float:
    return 0.5 * ctx.geo.norms.nsq_lee


INTEGRANDS: dict[str, Integrand] = {
    item.name: item
    for item in (
        Integrand("volume", lambda ctx, t: 1.0),
        Integrand("zero", lambda ctx, t: 0.0),
        Integrand("delta_lee", lambda ctx, t: ctx.geo.norms.delta_lee),
        Integrand("abs_delta_lee", lambda ctx, t: abs(ctx.geo.norms.delta_lee)),
        Integrand("s", lambda ctx, t: ctx.scalars[0]),
        Integrand("s_J", lambda ctx, t: ctx.scalars[1]),
        Integrand("s_minus_sJ", _s_minus_sj),
        Integrand("s_minus_sJ_closed", _s_minus_sj_closed),
        Integrand("total_2s1_minus_s", _two_s1_minus_s, uses_t=True),
        Integrand("total_2s1_minus_s_closed", _two_s1_minus_s_closed, uses_t=True),
        Integrand("total_s1_minus_s2", _s1_minus_s2, uses_t=True),
        Integrand("total_s1_minus_s2_closed", _s1_minus_s2_closed, uses_t=True),
        Integrand("bismut_gap", _bismut_gap),
        Integrand("bismut_gap_closed", _bismut_gap_closed),
        Integrand("abs_bismut_gap", lambda ctx, t: abs(_bismut_gap(ctx, t))),
        Integrand("chern_gap", _chern_gap),
        Integrand("chern_gap_closed", _chern_gap_closed),
    )
}

_KGAUDUCHON = re.compile(r"^(?P<abs>abs_)?kgauduchon:k=(?P<k>\d+)$")


def integrand(name: str) -> Integrand:
    """Look up an integrand; ``kgauduchon:k=N`` and ``abs_kgauduchon:k=N`` are built on demand."""
    if name in INTEGRANDS:
        return INTEGRANDS[name]
    if match := _KGAUDUCHON.match(name):
        k = int(match["k"])
        if match["abs"]:
            return Integrand(name, lambda ctx, t: abs(ctx.kgauduchon(k).density))
        return Integrand(name, lambda ctx, t: ctx.kgauduchon(k).density)
    raise InputError(
        f"Unknown integrand {name!r}, expected one of {sorted(INTEGRANDS)} or kgauduchon:k=N"
    )


type Request = tuple[str, float | None]


def node_values(
    manifold: Manifold,
    quadrature: Quadrature,
    requests: Sequence[Request],
    max_workers: int = 4,
) -> NDArray[np.float64]:
    """Integrand values times the Riemannian weight, shape (nodes, requests)."""
    evaluators = [(integrand(name), t) for name, t in requests]

    def on_error(point: ChartPoint, error: Exception) -> Exception:
        return error

    @parallel_points(max_workers=max_workers, on_error=on_error)
    def evaluate(point: ChartPoint) -> list[float] | Exception:
        ctx = PointContext(manifold.geometry(point))
        density = 1.0 if quadrature.riemannian else float(ctx.geo.sqrt_det.value)
        return [
            density * item.evaluate(ctx, 0.0 if t is None else t) for item, t in evaluators
        ]

    rows = evaluate(quadrature.points)
    for row in rows:
        if isinstance(row, Exception):
            raise row
    values = np.asarray(rows, dtype=float).reshape(len(rows), len(evaluators))
    return values * quadrature.weights[:, None]


def _estimate(
    name: str, t: float | None, weighted: NDArray[np.float64], quadrature: Quadrature
) -> IntegralEstimate:
    count = weighted.shape[0]
    std_error = None
    if quadrature.method == "quasi-random" and count > 1:
        std_error = float(np.std(weighted * count, ddof=1) / math.sqrt(count))
    return IntegralEstimate(
        integrand=name,
        t=t,
        value=float(weighted.sum()),
        std_error=std_error,
        points=count,
        method=quadrature.method,
    )


def integrate(
    manifold: Manifold,
    requests: Sequence[Request],
    quadrature: Quadrature,
    max_workers: int = 4,
) -> list[IntegralEstimate]:
    weighted = node_values(manifold, quadrature, requests, max_workers)
    estimates = [
        _estimate(name, t, weighted[:, i], quadrature) for i, (name, t) in enumerate(requests)
    ]
    logger.info(
        "integrate",
        extra={"integrals": {f"{e.integrand}@{e.t}": e.value for e in estimates}},
    )
    return estimates


type Sign = Literal[1, -1]


@dataclass(frozen=True, slots=True)
class TheoremContext:
    n: int
    present: frozenset[str]
    t: float | None

    @property
    def integrable(self) -> bool:
        return not self.present & {"W1", "W2"}


def _subset(allowed: set[str]) -> Callable[[TheoremContext], str | None]:
    def check(ctx: TheoremContext) -> str | None:
        if ctx.present <= allowed:
            return None
        return f"class {'+'.join(sorted(ctx.present))} is not inside {'+'.join(sorted(allowed))}"

    return check


def _all(*checks: Callable[[TheoremContext], str | None]) -> Callable[[TheoremContext], str | None]:
    def check(ctx: TheoremContext) -> str | None:
        for item in checks:
            if (reason := item(ctx)) is not None:
                return reason
        return None

    return check


def _dimension(condition: Callable[[int], bool], text: str) -> Callable[[TheoremContext], str | None]:
    return lambda ctx: None if condition(ctx.n) else f"needs {text}, n = {ctx.n}"


def _t_range(condition: Callable[[float], bool], text: str) -> Callable[[TheoremContext], str | None]:
    def check(ctx: TheoremContext) -> str | None:
        if ctx.t is None:
            return f"needs {text}, no t given"
        return None if condition(ctx.t) else f"needs {text}, t = {ctx.t:g}"

    return check


def _integrable(ctx: TheoremContext) -> str | None:
    return None if ctx.integrable else "needs integrable J"


def _lower_2s1_threshold(n: int) -> float:
    return 1 - 1 / (2 * (n - 1))


_N3 = _dimension(lambda n: n >= 3, "n >= 3")
_SURFACE = _dimension(lambda n: n == 2, "n = 2")


@dataclass(frozen=True, slots=True)
class SignTheorem:
    name: str
    integrand: str
    closed_form: str
    expected_sign: Sign | None
    hypothesis: Callable[[TheoremContext], str | None]
    uses_t: bool = False


THEOREMS: tuple[SignTheorem, ...] = (
    SignTheorem(
        "s_minus_sJ_nonnegative",
        "s_minus_sJ",
        "s_minus_sJ_closed",
        1,
        _subset({"W1", "W3", "W4"}),
    ),
    SignTheorem(
        "s_minus_sJ_nonpositive", "s_minus_sJ", "s_minus_sJ_closed", -1, _subset({"W2", "W3"})
    ),
    SignTheorem(
        "total_2s1_minus_s_nonnegative",
        "total_2s1_minus_s",
        "total_2s1_minus_s_closed",
        1,
        lambda ctx: _all(
            _N3,
            _subset({"W2", "W3", "W4"}),
            _t_range(lambda t: t >= _lower_2s1_threshold(ctx.n), "t >= 1 - 1/(2(n-1))"),
        )(ctx),
        uses_t=True,
    ),
    SignTheorem(
        "total_2s1_minus_s_nonpositive",
        "total_2s1_minus_s",
        "total_2s1_minus_s_closed",
        -1,
        lambda ctx: _all(
            _N3,
            _subset({"W1", "W4"}),
            _t_range(lambda t: t <= _lower_2s1_threshold(ctx.n), "t <= 1 - 1/(2(n-1))"),
        )(ctx),
        uses_t=True,
    ),
    SignTheorem(
        "surface_total_2s1_minus_s_nonnegative",
        "total_2s1_minus_s",
        "total_2s1_minus_s_closed",
        1,
        _all(_SURFACE, _t_range(lambda t: t >= 0.5, "t >= 1/2")),
        uses_t=True,
    ),
    SignTheorem(
        "surface_total_2s1_minus_s_nonpositive",
        "total_2s1_minus_s",
        "total_2s1_minus_s_closed",
        -1,
        _all(_SURFACE, _integrable, _t_range(lambda t: t <= 0.5, "t <= 1/2")),
        uses_t=True,
    ),
    SignTheorem(
        "total_s1_minus_s2_nonnegative",
        "total_s1_minus_s2",
        "total_s1_minus_s2_closed",
        1,
        _all(
            _N3,
            _subset({"W2", "W3", "W4"}),
            _t_range(lambda t: t <= T_ROOT_LOW or t >= T_ROOT_HIGH, "t outside (-3-2sqrt3, -3+2sqrt3)"),
        ),
        uses_t=True,
    ),
    SignTheorem(
        "total_s1_minus_s2_nonpositive",
        "total_s1_minus_s2",
        "total_s1_minus_s2_closed",
        -1,
        _all(_N3, _subset({"W1", "W4"}), _t_range(lambda t: -1 <= t <= 1 / 3, "-1 <= t <= 1/3")),
        uses_t=True,
    ),
    SignTheorem(
        "surface_total_s1_minus_s2_nonnegative",
        "total_s1_minus_s2",
        "total_s1_minus_s2_closed",
        1,
        _all(_SURFACE, _t_range(lambda t: t <= -1 or t >= 1 / 3, "t <= -1 or t >= 1/3")),
        uses_t=True,
    ),
    SignTheorem(
        "surface_total_s1_minus_s2_nonpositive",
        "total_s1_minus_s2",
        "total_s1_minus_s2_closed",
        -1,
        _all(_SURFACE, _integrable, _t_range(lambda t: -1 <= t <= 1 / 3, "-1 <= t <= 1/3")),
        uses_t=True,
    ),
    SignTheorem("chern_gap_nonnegative", "chern_gap", "chern_gap_closed", 1, _integrable),
    SignTheorem("bismut_gap_total", "bismut_gap", "bismut_gap_closed", None, _all(_N3, _integrable)),
    SignTheorem("lee_divergence_total", "delta_lee", "zero", None, lambda ctx: None),
)


def _tolerance(
    estimate: IntegralEstimate,
    difference_error: float | None,
    tol_abs: float,
    tol_rel: float,
    sigmas: float = QUADRATURE_SIGMAS,
) -> float:
    sigma = 0.0 if difference_error is None else sigmas * difference_error
    return max(tol_abs, tol_rel * abs(estimate.value), sigma)


def evaluate_theorem(  # noqa: PLR0913
    theorem: SignTheorem,
    manifold: Manifold,
    quadrature: Quadrature,
    classification: ClassResult,
    t: float | None,
    tol_abs: float,
    tol_rel: float,
    classify_tol: float,
    max_workers: int = 4,
    sigmas: float = QUADRATURE_SIGMAS,
) -> TheoremResult:
    present = frozenset(k for k, v in classification.components.items() if v >= classify_tol)
    try:
        if (reason := theorem.hypothesis(TheoremContext(manifold.n, present, t))) is not None:
            raise HypothesisError(theorem.name, reason)
    except HypothesisError as e:
        return TheoremResult(theorem=theorem.name, status="skipped", t=t, reason=e.reason)
    request_t = t if theorem.uses_t else None
    weighted = node_values(
        manifold,
        quadrature,
        [(theorem.integrand, request_t), (theorem.closed_form, request_t)],
        max_workers,
    )
    integral = _estimate(theorem.integrand, request_t, weighted[:, 0], quadrature)
    closed = _estimate(theorem.closed_form, request_t, weighted[:, 1], quadrature)
    diff_error = _estimate(
        "difference", request_t, weighted[:, 0] - weighted[:, 1], quadrature
    ).std_error
    tol = _tolerance(integral, diff_error, tol_abs, tol_rel, sigmas)
    consistent = abs(integral.value - closed.value) <= tol
    equality = abs(closed.value) <= tol
    sign_ok = theorem.expected_sign is None or theorem.expected_sign * closed.value >= -tol
    diagnosis = hermitian.diagnose(classification.components, classify_tol) if equality else None
    return TheoremResult(
        theorem=theorem.name,
        status="passed" if consistent and sign_ok else "failed",
        t=request_t,
        reason=None if consistent else f"integral differs from its closed form by {abs(integral.value - closed.value):.3e}",
        integral=integral,
        closed_form_integral=closed,
        expected_sign=theorem.expected_sign,
        equality=equality if theorem.expected_sign is not None else None,
        diagnosis=diagnosis,
    )


def kgauduchon_theorem(  # noqa: PLR0913
    manifold: Manifold,
    quadrature: Quadrature,
    classification: ClassResult,
    tol_abs: float,
    classify_tol: float,
    max_workers: int = 4,
) -> TheoremResult:
    """A Gauduchon metric with s1(-1) = s2(-1) makes every k-Gauduchon density vanish."""
    name = "kgauduchon_from_bismut_balance"
    n = manifold.n
    present = frozenset(k for k, v in classification.components.items() if v >= classify_tol)
    try:
        if n < 3:
            raise HypothesisError(name, f"needs n >= 3, n = {n}")
        if present & {"W1", "W2"}:
            raise HypothesisError(name, "needs integrable J")
        hypotheses = node_values(
            manifold, quadrature, [("abs_delta_lee", None), ("abs_bismut_gap", None)], max_workers
        ).sum(axis=0)
        if hypotheses[0] > tol_abs:
            raise HypothesisError(name, f"metric is not Gauduchon, total |delta alpha| = {hypotheses[0]:.3e}")
        if hypotheses[1] > tol_abs:
            raise HypothesisError(name, f"s1(-1) != s2(-1), total |s1 - s2| = {hypotheses[1]:.3e}")
    except HypothesisError as e:
        return TheoremResult(theorem=name, status="skipped", reason=e.reason)
    requests: list[Request] = [(f"abs_kgauduchon:k={k}", None) for k in range(1, n)]
    weighted = node_values(manifold, quadrature, requests, max_workers)
    worst = max(
        (_estimate(req[0], None, weighted[:, i], quadrature) for i, req in enumerate(requests)),
        key=lambda e: e.value,
    )
    return TheoremResult(
        theorem=name,
        status="passed" if worst.value <= tol_abs else "failed",
        integral=worst,
        equality=worst.value <= tol_abs,
    )


def sign_theorems(  # noqa: PLR0913
    manifold: Manifold,
    quadrature: Quadrature,
    classification: ClassResult,
    t_values: Sequence[float],
    tol_abs: float,
    tol_rel: float,
    classify_tol: float,
    max_workers: int = 4,
    sigmas: float = QUADRATURE_SIGMAS,
) -> list[TheoremResult]:
    results = []
    for theorem in THEOREMS:
        for t in t_values if theorem.uses_t else (None,):
            results.append(
                evaluate_theorem(
                    theorem,
                    manifold,
                    quadrature,
                    classification,
                    t,
                    tol_abs,
                    tol_rel,
                    classify_tol,
                    max_workers,
                    sigmas,
                )
            )
    results.append(
        kgauduchon_theorem(manifold, quadrature, classification, tol_abs, classify_tol, max_workers)
    )
    logger.info(
        "sign_theorems",
        extra={"statuses": {f"{r.theorem}@{r.t}": r.status for r in results}},
    )
    return results
