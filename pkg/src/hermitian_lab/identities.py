"""Named pointwise identities between curvature, torsion and the components of dF and N.

Every identity evaluates to ``(lhs, rhs)`` or, for tensor identities,
``(|lhs|, |rhs|, max residual)``. An identity only runs where its
hypotheses hold, e.g. Hermitian formulas on integrable structures.
"""

import functools
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from hermitian_lab import gauduchon, hermitian
from hermitian_lab.constants import FD_REL_TOLERANCE, FD_SECOND_ORDER_TOLERANCE, FD_STEP
from hermitian_lab.decorators import parallel_points
from hermitian_lab.errors import ApplicationError, InputError
from hermitian_lab.jets import fd_oracle
from hermitian_lab.log import logger
from hermitian_lab.riemannian import (
    curvature_operator,
    j_ricci_form,
    riemann_symmetry_residual,
    weyl_contract,
)
from hermitian_lab.schemas import IdentityResult, ScalarReport

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from numpy.typing import NDArray

    from hermitian_lab.manifold import LocalGeometry, Manifold
    from hermitian_lab.schemas import ChartPoint

type Evaluation = tuple[float, float] | tuple[float, float, float]

NUMERIC_ERRORS = (ApplicationError, ArithmeticError, ValueError, np.linalg.LinAlgError)


class PointContext:
    """A ``LocalGeometry`` plus the t-dependent quantities already computed at it."""

    def __init__(self, geo: LocalGeometry) -> None:
        self.geo = geo
        self._curvature: dict[float, gauduchon.CurvatureKt] = {}
        self._kgauduchon: dict[int, gauduchon.KGauduchonTerms] = {}

    @property
    def n(self) -> int:
        return self.geo.n

    @functools.cached_property
    def scalars(self) -> tuple[float, float]:
        return hermitian.scalar_pack(self.geo)

    @functools.cached_property
    def torsion(self) -> gauduchon.ChernTorsion:
        return gauduchon.chern_torsion(self.geo)

    @functools.cached_property
    def integrable(self) -> bool:
        return hermitian.is_integrable(self.geo.norms)

    def curvature(self, t: float) -> gauduchon.CurvatureKt:
        if t not in self._curvature:
            self._curvature[t] = gauduchon.curvature_kt(self.geo, t)
        return self._curvature[t]

    def s12(self, t: float) -> tuple[float, float]:
        s1, s2, _ = gauduchon.scalar_curvatures(self.curvature(t))
        return s1, s2

    def kgauduchon(self, k: int) -> gauduchon.KGauduchonTerms:
        if k not in self._kgauduchon:
            self._kgauduchon[k] = gauduchon.kgauduchon_terms(self.geo, k)
        return self._kgauduchon[k]


@dataclass(frozen=True, slots=True)
class Identity:
    name: str
    anchor: str
    evaluate: Callable[[PointContext, float], Evaluation]
    applies: Callable[[PointContext], bool]
    uses_t: bool = False


IDENTITIES: dict[str, Identity] = {}


def _always(ctx: PointContext) -> bool:
    return True


def _integrable(ctx: PointContext) -> bool:
    return ctx.integrable


def _surface(ctx: PointContext) -> bool:
    return ctx.n == 2


def _hermitian_n3(ctx: PointContext) -> bool:
    return ctx.n >= 3 and ctx.integrable


def identity(
    name: str,
    anchor: str,
    *,
    applies: Callable[[PointContext], bool] = _always,
    uses_t: bool = False,
) -> Callable[[Callable[[PointContext, float], Evaluation]], Callable[[PointContext, float], Evaluation]]:
    def decorator(
        func: Callable[[PointContext, float], Evaluation],
    ) -> Callable[[PointContext, float], Evaluation]:
        if name in IDENTITIES:
            raise ValueError(f"identity {name!r} registered twice")
        if not anchor.strip() or anchor != anchor.strip() or "\n" in anchor:
            raise ValueError(f"identity {name!r} needs a single-line anchor, got {anchor!r}")
        IDENTITIES[name] = Identity(name, anchor, func, applies, uses_t)
        return func

    return decorator


def _tensor(lhs: NDArray[np.generic], rhs: NDArray[np.generic]) -> tuple[float, float, float]:
    return (
        float(np.linalg.norm(lhs)),
        float(np.linalg.norm(rhs)),
        float(np.abs(lhs - rhs).max()),
    )


def _residual(value: float) -> tuple[float, float, float]:
    return 0.0, 0.0, value


@identity("riemann_symmetries", "R(X,Y,Z,W) = -R(Y,X,Z,W) = R(Z,W,X,Y), first Bianchi")
def _riemann_symmetries(ctx: PointContext, t: float) -> Evaluation:
    return _residual(riemann_symmetry_residual(ctx.geo.riemann_frame))


@identity("lee_form_two_ways", "1/2 F^{AB} dF_{ABC} = (J delta F)_C")
def _lee_two_ways(ctx: PointContext, t: float) -> Evaluation:
    return _tensor(ctx.geo.decomposition.lee, hermitian.lee_via_codifferential(ctx.geo))


@identity(
    "nabla_F_from_dF",
    "(nabla_X F)(Y,Z) = 1/2 [dF(X,Y,Z) - dF(X,JY,JZ) - h(JX, N(Y,Z))]",
)
def _nabla_f_from_df(ctx: PointContext, t: float) -> Evaluation:
    return _tensor(hermitian.nabla_F_frame(ctx.geo), hermitian.nabla_F_from_dF(ctx.geo))


@identity(
    "nabla_F_from_components",
    "nabla F = (dF)^- - 1/2 N(J.,.,.) + 1/2 [(dF)^+ - (dF)^+(.,J.,J.)]",
)
def _nabla_f_components(ctx: PointContext, t: float) -> Evaluation:
    return _tensor(hermitian.nabla_F_frame(ctx.geo), hermitian.nabla_F_reconstruction(ctx.geo))


@identity("nabla_F_symmetries", "(nabla_X F)(Y,Z) = -(nabla_X F)(Z,Y) = -(nabla_X F)(JY,JZ)")
def _nabla_f_symmetries(ctx: PointContext, t: float) -> Evaluation:
    return _residual(hermitian.nabla_F_symmetry_residual(ctx.geo))


@identity("nabla_F_norm_via_dF_N0", "|nabla F|^2 = |dF|^2 + 1/4 |N0|^2 - 2/3 |(dF)^-|^2")
def _nabla_f_norm_first(ctx: PointContext, t: float) -> Evaluation:
    nb = ctx.geo.norms
    return nb.nsq_nablaF, hermitian.nabla_F_norm_forms(nb, ctx.n)[0]


@identity(
    "nabla_F_norm_via_components",
    "|nabla F|^2 = |alpha|^2/(n-1) + |(dF)_0^+|^2 + 1/4 |N0|^2 + 1/3 |(dF)^-|^2",
)
def _nabla_f_norm_second(ctx: PointContext, t: float) -> Evaluation:
    nb = ctx.geo.norms
    return nb.nsq_nablaF, hermitian.nabla_F_norm_forms(nb, ctx.n)[1]


@identity(
    "s_minus_sJ",
    "s - s_J = 2/3 |(dF)^-|^2 - 1/4 |N0|^2 + |alpha|^2 + 2 delta alpha",
)
def _s_minus_sj(ctx: PointContext, t: float) -> Evaluation:
    s, s_j = ctx.scalars
    return s - s_j, hermitian.scalar_gap(ctx.geo.norms)


@identity("s_minus_sJ_via_nabla_F", "s - s_J = |dF|^2 - |nabla F|^2 + |alpha|^2 + 2 delta alpha")
def _s_minus_sj_nabla(ctx: PointContext, t: float) -> Evaluation:
    s, s_j = ctx.scalars
    nb = ctx.geo.norms
    return s - s_j, nb.nsq_dF - nb.nsq_nablaF + nb.nsq_lee + 2 * nb.delta_lee


@identity("sJ_curvature_operator", "s_J = 2 <R(F), F>")
def _sj_curvature_operator(ctx: PointContext, t: float) -> Evaluation:
    ff = ctx.geo.fundamental_form_frame
    r_f = curvature_operator(ctx.geo.riemann_frame, ff)
    return ctx.scalars[1], float(np.einsum("ab,ab->", r_f, ff))


@identity("j_ricci_form", "rho_J(X,Y) = -Ric_J(X,JY) = R(F)(X,Y)")
def _j_ricci_form(ctx: PointContext, t: float) -> Evaluation:
    geo = ctx.geo
    return _tensor(
        j_ricci_form(geo.riemann_frame, geo.acs_frame),
        curvature_operator(geo.riemann_frame, geo.fundamental_form_frame),
    )


@identity("weyl_F_pairing", "<W(F), F> = [(2n-1) s_J - s] / (2(2n-1))")
def _weyl_pairing(ctx: PointContext, t: float) -> Evaluation:
    s, s_j = ctx.scalars
    m = 2 * ctx.n - 1
    return weyl_contract(ctx.geo.riemann_frame, ctx.geo.fundamental_form_frame), (m * s_j - s) / (2 * m)


@identity(
    "lichnerowicz_curvature",
    "K^0 = 1/2 [R + R(J.,J.,.,.)] + 1/4 [<(nabla_Z J)X,(nabla_W J)Y> - <(nabla_W J)X,(nabla_Z J)Y>]",
)
def _lichnerowicz_curvature(ctx: PointContext, t: float) -> Evaluation:
    return _tensor(ctx.curvature(0.0).frame, gauduchon.lichnerowicz_curvature(ctx.geo))


@identity("s1_lichnerowicz_via_sJ", "s1(0) = s_J/2 + |(dF)^+|^2/4 - |(dF)^-|^2/12 - |N0|^2/16")
def _s1_lichnerowicz(ctx: PointContext, t: float) -> Evaluation:
    s, s_j = ctx.scalars
    return ctx.s12(0.0)[0], gauduchon.lichnerowicz_scalars(s_j, s, ctx.geo.norms)[0]


@identity("s2_lichnerowicz_via_sJ", "s2(0) = (s_J + s)/4 + [|alpha|^2 - (|nabla F|^2 - |dF|^2)]/8")
def _s2_lichnerowicz(ctx: PointContext, t: float) -> Evaluation:
    s, s_j = ctx.scalars
    return ctx.s12(0.0)[1], gauduchon.lichnerowicz_scalars(s_j, s, ctx.geo.norms)[1]


@identity("connection_metric", "D^t h = 0", uses_t=True)
def _connection_metric(ctx: PointContext, t: float) -> Evaluation:
    return _residual(gauduchon.metric_residual(ctx.geo, gauduchon.connection_t(ctx.geo, t)))


@identity("connection_hermitian", "D^t J = 0", uses_t=True)
def _connection_hermitian(ctx: PointContext, t: float) -> Evaluation:
    return _residual(gauduchon.hermitian_residual(ctx.geo, gauduchon.connection_t(ctx.geo, t)))


@identity("hermitian_scalars_real", "Im s1(t) = Im s2(t) = 0", uses_t=True)
def _hermitian_scalars_real(ctx: PointContext, t: float) -> Evaluation:
    return _residual(gauduchon.scalar_curvatures(ctx.curvature(t))[2])


@identity(
    "s1_closed_form",
    "s1(t) = s/2 - 5/12 |(dF)^-|^2 + |N0|^2/16 + |(dF)_0^+|^2/4"
    " + [1/(4(n-1)) + (t-1)/2] |alpha|^2 + (t-2)/2 delta alpha",
    uses_t=True,
)
def _s1_closed(ctx: PointContext, t: float) -> Evaluation:
    return ctx.s12(t)[0], gauduchon.s1_closed_form(ctx.scalars[0], ctx.geo.norms, ctx.n, t)


@identity(
    "s2_closed_form",
    "s2(t) = s/2 - |(dF)^-|^2/12 + |N0|^2/32 - (t^2-2t)/4 |(dF)_0^+|^2"
    " - [(t^2-2t)/(4(n-1)) + (t+1)^2/8] |alpha|^2 - (t+1)/2 delta alpha",
    uses_t=True,
)
def _s2_closed(ctx: PointContext, t: float) -> Evaluation:
    return ctx.s12(t)[1], gauduchon.s2_closed_form(ctx.scalars[0], ctx.geo.norms, ctx.n, t)


@identity("s1_trace_identity", "s1(t) = s1(0) + t/2 (|alpha|^2 + delta alpha)", uses_t=True)
def _s1_trace(ctx: PointContext, t: float) -> Evaluation:
    s1_0, s2_0 = ctx.s12(0.0)
    return ctx.s12(t)[0], gauduchon.trace_identities(s1_0, s2_0, ctx.geo.norms, t)[0]


@identity(
    "s2_trace_identity",
    "s2(t) = s2(0) - t/2 (|alpha|^2 + delta alpha) - (t^2-2t)/4 |(dF)^+|^2 - (t^2-2t)/8 |alpha|^2",
    uses_t=True,
)
def _s2_trace(ctx: PointContext, t: float) -> Evaluation:
    s1_0, s2_0 = ctx.s12(0.0)
    return ctx.s12(t)[1], gauduchon.trace_identities(s1_0, s2_0, ctx.geo.norms, t)[1]


@identity(
    "s1_minus_s2_closed_form",
    "s1 - s2 = -|(dF)^-|^2/3 + |N0|^2/32 + (t-1)^2/4 |(dF)_0^+|^2"
    " + [(n+1)t^2 + (6n-10)t + 5 - 3n]/(8(n-1)) |alpha|^2 + (t - 1/2) delta alpha",
    uses_t=True,
)
def _s1_minus_s2(ctx: PointContext, t: float) -> Evaluation:
    s1, s2 = ctx.s12(t)
    return s1 - s2, gauduchon.s1_minus_s2_closed_form(ctx.geo.norms, ctx.n, t)


@identity(
    "s1_hermitian",
    "s1(t) = s/2 + |dF|^2/4 + (t-1)/2 |alpha|^2 + (t-2)/2 delta alpha",
    applies=_integrable,
    uses_t=True,
)
def _s1_hermitian(ctx: PointContext, t: float) -> Evaluation:
    return ctx.s12(t)[0], gauduchon.hermitian_closed_forms(ctx.scalars[0], ctx.geo.norms, t)[0]


@identity(
    "s2_hermitian",
    "s2(t) = s/2 - (t^2-2t)/4 |dF|^2 - (t+1)^2/8 |alpha|^2 - (t+1)/2 delta alpha",
    applies=_integrable,
    uses_t=True,
)
def _s2_hermitian(ctx: PointContext, t: float) -> Evaluation:
    return ctx.s12(t)[1], gauduchon.hermitian_closed_forms(ctx.scalars[0], ctx.geo.norms, t)[1]


@identity(
    "s1_surface",
    "s1(t) = s/2 + |N|^2/16 + (2t-1)/4 |alpha|^2 + (t-2)/2 delta alpha",
    applies=_surface,
    uses_t=True,
)
def _s1_surface(ctx: PointContext, t: float) -> Evaluation:
    return ctx.s12(t)[0], gauduchon.surface_closed_forms(ctx.scalars[0], ctx.geo.norms, t)[0]


@identity(
    "s2_surface",
    "s2(t) = s/2 + |N|^2/32 - (3t^2-2t+1)/8 |alpha|^2 - (t+1)/2 delta alpha",
    applies=_surface,
    uses_t=True,
)
def _s2_surface(ctx: PointContext, t: float) -> Evaluation:
    return ctx.s12(t)[1], gauduchon.surface_closed_forms(ctx.scalars[0], ctx.geo.norms, t)[1]


@identity("bismut_scalar_gap", "s1(-1) - s2(-1) = |dF|^2 - |alpha|^2 - 3/2 delta alpha", applies=_integrable)
def _bismut_gap(ctx: PointContext, t: float) -> Evaluation:
    s1, s2 = ctx.s12(-1.0)
    return s1 - s2, gauduchon.bismut_difference(ctx.geo.norms)


@identity("chern_scalar_gap", "s1(1) - s2(1) = 1/2 |alpha|^2 + 1/2 delta alpha", applies=_integrable)
def _chern_gap(ctx: PointContext, t: float) -> Evaluation:
    s1, s2 = ctx.s12(1.0)
    return s1 - s2, gauduchon.chern_difference(ctx.geo.norms)


@identity("nijenhuis_from_torsion", "N^k_{ibar jbar} = -4 T^k_{ibar jbar}")
def _nijenhuis_torsion(ctx: PointContext, t: float) -> Evaluation:
    return _tensor(
        gauduchon.nijenhuis_antiholomorphic(ctx.geo), -4.0 * ctx.torsion.antiholomorphic
    )


@identity("chern_torsion_11_vanishes", "T^i(u_j, ubar_k) = 0")
def _torsion_11(ctx: PointContext, t: float) -> Evaluation:
    return _residual(float(np.abs(ctx.torsion.mixed).max()))


@identity("lee_from_torsion", "alpha = T^i_{ji} theta^j + conj")
def _lee_torsion(ctx: PointContext, t: float) -> Evaluation:
    return _tensor(ctx.geo.decomposition.lee, gauduchon.lee_from_torsion(ctx.torsion))


@identity("dF_from_torsion", "dF = sqrt(-1) (T^i ^ thetabar^i - theta^i ^ Tbar^i)")
def _df_torsion(ctx: PointContext, t: float) -> Evaluation:
    return _tensor(ctx.geo.decomposition.dF, gauduchon.dF_from_torsion(ctx.torsion, ctx.geo)[0])


@identity(
    "dF_minus_from_torsion",
    "(dF)^- = sqrt(-1)/2 (T^i_{jbar kbar} thetabar^j ^ thetabar^k ^ thetabar^i - conj)",
)
def _df_minus_torsion(ctx: PointContext, t: float) -> Evaluation:
    return _tensor(
        ctx.geo.decomposition.dF_minus, gauduchon.dF_from_torsion(ctx.torsion, ctx.geo)[1]
    )


def _torsion_norm(key: str, anchor: str) -> None:
    @identity(f"torsion_norm_{key.removeprefix('nsq_')}", anchor)
    def _evaluate(ctx: PointContext, t: float) -> Evaluation:
        return getattr(ctx.geo.norms, key), gauduchon.torsion_norms(ctx.torsion)[key]


_torsion_norm("nsq_N", "|N|^2 = 16 |T^i_{jbar kbar}|^2")
_torsion_norm("nsq_lee", "|alpha|^2 = 2 |T^i_{ji}|^2")
_torsion_norm("nsq_dF_plus", "|(dF)^+|^2 = |T^i_{jk}|^2")
_torsion_norm(
    "nsq_dF_minus",
    "|(dF)^-|^2 = |T^i_{jbar kbar}|^2 + 2 T^i_{jbar kbar} conj(T^k_{ibar jbar})",
)


@identity("connection_difference_holomorphic", "(D^0 - D^1)(u_k) u_j = 1/2 T^i_{jk} u_i")
def _gamma_holomorphic(ctx: PointContext, t: float) -> Evaluation:
    holo, _ = gauduchon.connection_difference(ctx.geo)
    return _tensor(holo, 0.5 * ctx.torsion.holomorphic)


@identity(
    "connection_difference_antiholomorphic", "(D^0 - D^1)(ubar_k) u_j = -1/2 conj(T^j_{ik}) u_i"
)
def _gamma_antiholomorphic(ctx: PointContext, t: float) -> Evaluation:
    _, anti = gauduchon.connection_difference(ctx.geo)
    return _tensor(anti, -0.5 * ctx.torsion.holomorphic.transpose(1, 0, 2).conj())


@identity("first_chern_form_shift", "rho_1(t) = rho_1(0) + t/2 d delta F", uses_t=True)
def _chern_form_shift(ctx: PointContext, t: float) -> Evaluation:
    rho_t, _ = gauduchon.first_chern_form(ctx.curvature(t))
    rho_0, _ = gauduchon.first_chern_form(ctx.curvature(0.0))
    return _tensor(rho_t - rho_0, t / 2 * ctx.geo.covariant_frame(ctx.geo.d_delta_F))


@identity("first_chern_form_real", "rho_1(t) is a real form", uses_t=True)
def _chern_form_real(ctx: PointContext, t: float) -> Evaluation:
    return _residual(gauduchon.first_chern_form(ctx.curvature(t))[1])


@identity(
    "first_chern_form_11_part",
    "1/2 [rho_1(t) + J rho_1(t)] = rho_1(1) + (t-1)/4 (d delta F + J d delta F)",
    applies=_integrable,
    uses_t=True,
)
def _chern_form_11(ctx: PointContext, t: float) -> Evaluation:
    return _tensor(
        gauduchon.rho11(ctx.curvature(t), ctx.geo.acs_frame),
        gauduchon.rho11_expected(ctx.geo, ctx.curvature(1.0), t),
    )


def _ricci_trace(which: int, anchor: str) -> None:
    @identity(f"ricci_form_trace_{which}", anchor, uses_t=True)
    def _evaluate(ctx: PointContext, t: float) -> Evaluation:
        kt = ctx.curvature(t)
        form = gauduchon.ricci_forms(kt)[which]
        trace = gauduchon.form_trace(form, ctx.geo.fundamental_form_frame)
        expected = ctx.s12(t)[0 if which == 1 else 1]
        return trace.real, expected, abs(trace - expected)


_ricci_trace(1, "<sqrt(-1) K_{kbar k i jbar} theta^i ^ thetabar^j, F> = s1")
_ricci_trace(3, "<sqrt(-1) K_{kbar i k jbar} theta^i ^ thetabar^j, F> = s2")


@identity("volume_form", "F^n / n! = sqrt(det h) dx")
def _volume_form(ctx: PointContext, t: float) -> Evaluation:
    return gauduchon.volume_ratio(ctx.geo), 1.0


@identity(
    "kgauduchon_dF_pairing",
    "<sqrt(-1) dF^{2,1} ^ dF^{1,2}, F^3> = 3 (|alpha|^2 - |dF|^2)",
    applies=_hermitian_n3,
)
def _kgauduchon_df(ctx: PointContext, t: float) -> Evaluation:
    nb = ctx.geo.norms
    return ctx.kgauduchon(1).dF_dFbar_pairing, 3 * (nb.nsq_lee - nb.nsq_dF)


@identity(
    "kgauduchon_ddbar_pairing",
    "<sqrt(-1) d dbar F, F^2> = |dF|^2 - |alpha|^2 - delta alpha",
    applies=_hermitian_n3,
)
def _kgauduchon_ddbar(ctx: PointContext, t: float) -> Evaluation:
    nb = ctx.geo.norms
    return ctx.kgauduchon(1).ddbar_pairing, nb.nsq_dF - nb.nsq_lee - nb.delta_lee


def _kgauduchon_density(k: int) -> None:
    @identity(
        f"kgauduchon_density_k{k}",
        f"sqrt(-1) d dbar(F^{k}) ^ F^(n-{k}-1) / dv"
        f" = {k}(n-3)!/2 [(n-{k}-1)(|dF|^2 - |alpha|^2) - (n-2) delta alpha]",
        applies=lambda ctx: _hermitian_n3(ctx) and k <= ctx.n - 1,
    )
    def _evaluate(ctx: PointContext, t: float) -> Evaluation:
        terms = ctx.kgauduchon(k)
        return terms.density, terms.closed_form


for _k in range(1, 8):
    _kgauduchon_density(_k)


def evaluate_identity(
    ident: Identity,
    ctx: PointContext,
    t: float | None,
    tol_abs: float,
    tol_rel: float,
) -> IdentityResult:
    point = ctx.geo.point
    try:
        lhs, rhs, *residual = ident.evaluate(ctx, 0.0 if t is None else t)
    except NUMERIC_ERRORS as e:
        return IdentityResult.failure(ident.name, ident.anchor, e, point=point, t=t)
    return IdentityResult.compare(
        ident.name,
        ident.anchor,
        lhs,
        rhs,
        tol_abs,
        tol_rel,
        point=point,
        t=t,
        residual=residual[0] if residual else None,
    )


def select_identities(names: Sequence[str] | None = None) -> list[Identity]:
    if names is None:
        return list(IDENTITIES.values())
    unknown = [name for name in names if name not in IDENTITIES]
    if unknown:
        raise InputError(f"Unknown identities {unknown}, expected names from {sorted(IDENTITIES)}")
    return [IDENTITIES[name] for name in names]


_JET_CHECKS = {
    1: ("jet_vs_finite_difference", "d(h, J) from jets = central differences", FD_REL_TOLERANCE),
    2: ("jet_vs_finite_difference_d2", "dd(h, J) from jets = central second differences", FD_SECOND_ORDER_TOLERANCE),
}


def jet_check(
    manifold: Manifold, point: ChartPoint, tol: float | None = None, order: int = 1
) -> IdentityResult:
    """Derivatives of h and J of the given order from jets against central differences."""
    name, anchor, default_tol = _JET_CHECKS[order]
    tol = default_tol if tol is None else tol
    chart = manifold.charts[point.chart_id]

    @functools.cache
    def values(x: tuple[float, ...]) -> NDArray[np.float64]:
        h, acs = chart.jets(x)
        return np.stack([h.value, acs.value])

    try:
        h, acs = chart.jets(point.coords)
        jets = np.stack([h.d1, acs.d1] if order == 1 else [h.d2, acs.d2])  # type: ignore[list-item]
        contains = manifold.contains_coords(point.chart_id)
        fd = np.empty_like(jets)
        for idx in np.ndindex(*jets.shape[:-order]):
            oracle = fd_oracle(
                lambda x, idx=idx: values(tuple(map(float, x)))[idx],
                point.coords,
                step=FD_STEP,
                order=order,
                contains=contains,
            )
            fd[idx] = oracle.grad if order == 1 else oracle.hess
    except NUMERIC_ERRORS as e:
        return IdentityResult.failure(name, anchor, e, point=point)
    scale = max(1.0, float(np.abs(jets).max()))
    return IdentityResult.compare(
        name,
        anchor,
        float(np.linalg.norm(jets)),
        float(np.linalg.norm(fd)),
        tol * scale,
        tol,
        point=point,
        residual=float(np.abs(jets - fd).max()),
    )


_CATALOG_KEY = re.compile(r"^(?P<name>s1|s2)(?:@(?P<t>-?\d+(?:\.\d+)?))?$")


def _t_free(key: str) -> bool:
    return key in {"s1", "s2"}


def catalog_value(ctx: PointContext, key: str, t: float | None = None) -> float:
    """Scalar named by a catalog key: s, s_J, a norm field, s1@t / s2@t, or s1 / s2 at ``t``."""
    if key == "s":
        return ctx.scalars[0]
    if key == "s_J":
        return ctx.scalars[1]
    if match := _CATALOG_KEY.match(key):
        if match["t"] is not None:
            t = float(match["t"])
        elif t is None:
            raise InputError(f"Catalog value {key!r} holds for every t and needs one to evaluate")
        s1, s2 = ctx.s12(t)
        return s1 if match["name"] == "s1" else s2
    if key.startswith("kgauduchon_k"):
        return ctx.kgauduchon(int(key.removeprefix("kgauduchon_k"))).density
    if key == "bismut_gap":
        s1, s2 = ctx.s12(-1.0)
        return s1 - s2
    try:
        return float(getattr(ctx.geo.norms, key))
    except AttributeError:
        raise InputError(f"Unknown catalog value {key!r}") from None


def point_results(
    manifold: Manifold,
    point: ChartPoint,
    identities: Sequence[Identity],
    t_values: Sequence[float],
    tol_abs: float,
    tol_rel: float,
) -> list[IdentityResult]:
    ctx = PointContext(manifold.geometry(point))
    results = [jet_check(manifold, point), jet_check(manifold, point, order=2)]
    for ident in identities:
        try:
            applies = ident.applies(ctx)
        except NUMERIC_ERRORS as e:
            results.append(IdentityResult.failure(ident.name, ident.anchor, e, point=point))
            continue
        if not applies:
            continue
        for t in t_values if ident.uses_t else (None,):
            results.append(evaluate_identity(ident, ctx, t, tol_abs, tol_rel))
    for key, expected in manifold.expected_scalars.items():
        for t in t_values if _t_free(key) else (None,):
            try:
                value = catalog_value(ctx, key, t)
            except NUMERIC_ERRORS as e:
                results.append(IdentityResult.failure(f"catalog:{key}", "catalog value", e, point=point, t=t))
                continue
            results.append(
                IdentityResult.compare(
                    f"catalog:{key}", "catalog value", value, expected, tol_abs, tol_rel, point=point, t=t
                )
            )
    return results


def run_pointwise_suite(  # noqa: PLR0913
    manifold: Manifold,
    points: Sequence[ChartPoint],
    t_values: Sequence[float],
    tol_abs: float,
    tol_rel: float,
    max_workers: int = 4,
    names: Sequence[str] | None = None,
) -> list[IdentityResult]:
    identities = select_identities(names)

    def on_error(point: ChartPoint, error: Exception) -> list[IdentityResult]:
        return [IdentityResult.failure("geometry", "local geometry at the point", error, point=point)]

    @parallel_points(max_workers=max_workers, on_error=on_error)
    def evaluate(point: ChartPoint) -> list[IdentityResult]:
        return point_results(manifold, point, identities, t_values, tol_abs, tol_rel)

    results = [r for batch in evaluate(points) for r in batch]
    failed = sum(not r.passed for r in results)
    logger.info(
        "pointwise_suite",
        extra={"points": len(points), "results": len(results), "failed": failed},
    )
    return results


def scalar_report(ctx: PointContext, t_values: Sequence[float]) -> ScalarReport:
    s, s_j = ctx.scalars
    pairs = {t: ctx.s12(t) for t in t_values}
    return ScalarReport(
        point=ctx.geo.point,
        s=s,
        s_J=s_j,
        weyl_F=weyl_contract(ctx.geo.riemann_frame, ctx.geo.fundamental_form_frame),
        norms=ctx.geo.norms,
        s1={_t_key(t): v[0] for t, v in pairs.items()},
        s2={_t_key(t): v[1] for t, v in pairs.items()},
    )


def _t_key(t: float) -> str:
    return f"{t:g}"
