"""The line of Hermitian connections D^t and the scalars s1(t), s2(t).

t = 0 is the first canonical (Lichnerowicz) connection, t = 1 the Chern
connection and t = -1 the Bismut connection when J is integrable.
"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from hermitian_lab.errors import StructureError
from hermitian_lab.hermitian import is_integrable, lee_wedge
from hermitian_lab.jets import TensorJet, jet_einsum
from hermitian_lab.riemannian import curvature_from_connection
from hermitian_lab.tensors import (
    KForm,
    apply_slots,
    exterior_derivative,
    frame_coframe_unitary,
    frame_unitary,
    j_action,
    kform_inner,
    pq_project,
    pq_project_jet,
    wedge,
    wedge_power,
)

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from hermitian_lab.manifold import LocalGeometry
    from hermitian_lab.schemas import NormBundle


@dataclass(frozen=True, slots=True)
class ConnectionT:
    t: float
    coefficients: TensorJet  # [a, w, y] = A^a_{wy}, D_{d_w} d_y = A^a_{wy} d_a


def connection_t(geo: LocalGeometry, t: float) -> ConnectionT:
    """D^t = nabla - 1/2 J nabla J + t/4 B, B read off from

    h(B(X,Y), Z) = h((nabla_JY J)Z + J(nabla_Y J)Z, X) - h((nabla_JZ J)Y + J(nabla_Z J)Y, X).
    """
    h, acs, nabla_j = geo.metric, geo.acs, geo.nabla_acs
    p = jet_einsum("xa,azc,cy->xyz", h, nabla_j, acs) + jet_einsum(
        "xa,ae,ezy->xyz", h, acs, nabla_j
    )
    b_low = p - p.transpose(0, 2, 1)
    c_low = jet_einsum("za,ae,eyx->xyz", h, acs, nabla_j) * -0.5 + b_low * (t / 4)
    return ConnectionT(t, geo.gamma + jet_einsum("cz,xyz->cxy", geo.hinv, c_low))


def metric_residual(geo: LocalGeometry, conn: ConnectionT) -> float:
    a, h = conn.coefficients.value, geo.metric.value
    dh = geo.metric.grad().value
    res = dh - np.einsum("eca,eb->abc", a, h) - np.einsum("ecb,ae->abc", a, h)
    return float(np.abs(res).max())


def hermitian_residual(geo: LocalGeometry, conn: ConnectionT) -> float:
    a, j = conn.coefficients.value, geo.acs.value
    dj = geo.acs.grad().value
    res = dj + np.einsum("ace,eb->abc", a, j) - np.einsum("ecb,ae->abc", a, j)
    return float(np.abs(res).max())


@dataclass(frozen=True, slots=True)
class CurvatureKt:
    t: float
    frame: NDArray[np.float64]  # K^t(e_A, e_B, e_C, e_D)
    unitary: NDArray[np.complex128]  # on (u_1..u_n, ubar_1..ubar_n)

    @property
    def n(self) -> int:
        return self.frame.shape[0] // 2


def curvature_kt(geo: LocalGeometry, t: float) -> CurvatureKt:
    conn = connection_t(geo, t)
    kf = geo.frame.covariant(curvature_from_connection(conn.coefficients, geo.metric.value))
    v = frame_unitary(geo.n)
    kc = np.einsum("abcd,ai,bj,ck,dl->ijkl", kf, v, v, v, v, optimize=True)
    return CurvatureKt(t, kf, kc)


def scalar_curvatures(kt: CurvatureKt) -> tuple[float, float, float]:
    """(s1, s2, largest imaginary part) by contraction in the unitary frame."""
    block = _mixed_block(kt)
    s1 = np.einsum("iijj->", block)
    s2 = np.einsum("ijij->", block)
    return float(s1.real), float(s2.real), float(max(abs(s1.imag), abs(s2.imag)))


def _mixed_block(kt: CurvatureKt) -> NDArray[np.complex128]:
    """[a, b, c, d] = K^t(ubar_a, u_b, u_c, ubar_d)."""
    n = kt.n
    holo, anti = np.arange(n), np.arange(n, 2 * n)
    return kt.unitary[np.ix_(anti, holo, holo, anti)]


def lichnerowicz_curvature(geo: LocalGeometry) -> NDArray[np.float64]:
    """1/2 [R(X,Y,Z,W) + R(JX,JY,Z,W)] + 1/4 [<(nabla_Z J)X,(nabla_W J)Y> - <(nabla_W J)X,(nabla_Z J)Y>]."""
    frame, jf, rf = geo.frame, geo.acs_frame, geo.riemann_frame
    eye = np.eye(geo.dim)
    nj = np.einsum("Aa,abc,bB,cC->ABC", frame.coframe, geo.nabla_acs.value, frame.vectors, frame.vectors)
    quad = np.einsum("axz,ayw->xyzw", nj, nj)
    return 0.5 * (rf + apply_slots(rf, [jf, jf, eye, eye])) + 0.25 * (
        quad - quad.transpose(0, 1, 3, 2)
    )


def s1_closed_form(s: float, nb: NormBundle, n: int, t: float) -> float:
    return (
        s / 2
        - 5 / 12 * nb.nsq_dF_minus
        + nb.nsq_N0 / 16
        + nb.nsq_dF0_plus / 4
        + (1 / (4 * (n - 1)) + (t - 1) / 2) * nb.nsq_lee
        + (t - 2) / 2 * nb.delta_lee
    )


def s2_closed_form(s: float, nb: NormBundle, n: int, t: float) -> float:
    quad = t * t - 2 * t
    return (
        s / 2
        - nb.nsq_dF_minus / 12
        + nb.nsq_N0 / 32
        - quad / 4 * nb.nsq_dF0_plus
        - (quad / (4 * (n - 1)) + (t + 1) ** 2 / 8) * nb.nsq_lee
        - (t + 1) / 2 * nb.delta_lee
    )


def lichnerowicz_scalars(s_J: float, s: float, nb: NormBundle) -> tuple[float, float]:
    """s1(0) and s2(0) written through s_J instead of s."""
    s1 = (
        s_J / 2
        + nb.nsq_dF_plus / 4
        - nb.nsq_dF_minus / 12
        - nb.nsq_N0 / 16
    )
    s2 = (s_J + s) / 4 + (nb.nsq_lee - (nb.nsq_nablaF - nb.nsq_dF)) / 8
    return s1, s2


def trace_identities(s1_0: float, s2_0: float, nb: NormBundle, t: float) -> tuple[float, float]:
    """s1(t), s2(t) from their t = 0 values."""
    quad = t * t - 2 * t
    shift = t / 2 * (nb.nsq_lee + nb.delta_lee)
    return (
        s1_0 + shift,
        s2_0 - shift - quad / 4 * nb.nsq_dF_plus - quad / 8 * nb.nsq_lee,
    )


def hermitian_closed_forms(s: float, nb: NormBundle, t: float) -> tuple[float, float]:
    """Specialisation to integrable J."""
    return (
        s / 2 + nb.nsq_dF / 4 + (t - 1) / 2 * nb.nsq_lee + (t - 2) / 2 * nb.delta_lee,
        s / 2
        - (t * t - 2 * t) / 4 * nb.nsq_dF
        - (t + 1) ** 2 / 8 * nb.nsq_lee
        - (t + 1) / 2 * nb.delta_lee,
    )


def surface_closed_forms(s: float, nb: NormBundle, t: float) -> tuple[float, float]:
    """Specialisation to real dimension four."""
    return (
        s / 2 + nb.nsq_N / 16 + (2 * t - 1) / 4 * nb.nsq_lee + (t - 2) / 2 * nb.delta_lee,
        s / 2
        + nb.nsq_N / 32
        - (3 * t * t - 2 * t + 1) / 8 * nb.nsq_lee
        - (t + 1) / 2 * nb.delta_lee,
    )


def bismut_difference(nb: NormBundle) -> float:
    """s1(-1) - s2(-1) for integrable J."""
    return nb.nsq_dF - nb.nsq_lee - 1.5 * nb.delta_lee


def chern_difference(nb: NormBundle) -> float:
    """s1(1) - s2(1) for integrable J."""
    return 0.5 * nb.nsq_lee + 0.5 * nb.delta_lee


def s1_minus_s2_closed_form(nb: NormBundle, n: int, t: float) -> float:
    quadratic = (n + 1) * t * t + (6 * n - 10) * t + 5 - 3 * n
    return (
        -nb.nsq_dF_minus / 3
        + nb.nsq_N0 / 32
        + (t - 1) ** 2 / 4 * nb.nsq_dF0_plus
        + quadratic / (8 * (n - 1)) * nb.nsq_lee
        + (t - 0.5) * nb.delta_lee
    )


@dataclass(frozen=True, slots=True)
class ChernTorsion:
    """Components of the Chern torsion T^i = theta^i(T)."""

    holomorphic: NDArray[np.complex128]  # [i, j, k] = T^i_{jk}
    antiholomorphic: NDArray[np.complex128]  # [i, j, k] = T^i_{jbar kbar}
    mixed: NDArray[np.complex128]  # [i, j, k] = T^i(u_j, ubar_k)
    forms: NDArray[np.complex128]  # [i, A, B] = T^i(e_A, e_B)


def chern_torsion(geo: LocalGeometry) -> ChernTorsion:
    a = connection_t(geo, 1.0).coefficients.value
    torsion = a - a.transpose(0, 2, 1)
    t_low = geo.frame.covariant(np.einsum("zc,cxy->xyz", geo.metric.value, torsion))
    n = geo.n
    v = frame_unitary(n)
    u, ub = v[:, :n], v[:, n:]
    return ChernTorsion(
        holomorphic=np.einsum("xyz,xj,yk,zi->ijk", t_low, u, u, ub),
        antiholomorphic=np.einsum("xyz,xj,yk,zi->ijk", t_low, ub, ub, ub),
        mixed=np.einsum("xyz,xj,yk,zi->ijk", t_low, u, ub, ub),
        forms=np.einsum("xyz,zi->ixy", t_low, ub),
    )


def nijenhuis_antiholomorphic(geo: LocalGeometry) -> NDArray[np.complex128]:
    """[k, i, j] = h(N(ubar_i, ubar_j), ubar_k)."""
    n = geo.n
    ub = frame_unitary(n)[:, n:]
    return np.einsum("xyz,xk,yi,zj->kij", geo.decomposition.N, ub, ub, ub)


def lee_from_torsion(tor: ChernTorsion) -> NDArray[np.float64]:
    """alpha = T^i_{ji} theta^j + conjugate, in real frame components."""
    theta = frame_coframe_unitary(tor.holomorphic.shape[0])
    return 2.0 * (np.einsum("iji->j", tor.holomorphic) @ theta).real


def dF_from_torsion(tor: ChernTorsion, geo: LocalGeometry) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """dF = sqrt(-1)(T^i ^ thetabar^i - theta^i ^ Tbar^i) and its (3,0)+(0,3) part."""
    theta = frame_coframe_unitary(geo.n)
    jf = geo.acs_frame
    full = np.zeros((geo.dim,) * 3, dtype=complex)
    minus = np.zeros((geo.dim,) * 3, dtype=complex)
    for i in range(geo.n):
        ti = tor.forms[i]
        ti_02 = pq_project(ti, jf, 0, 2)
        full += lee_wedge(theta[i].conj(), ti) - lee_wedge(theta[i], ti.conj())
        minus += lee_wedge(theta[i].conj(), ti_02) - lee_wedge(theta[i], ti_02.conj())
    return (1j * full).real, (1j * minus).real


def torsion_norms(tor: ChernTorsion) -> dict[str, float]:
    t_anti, t_holo = tor.antiholomorphic, tor.holomorphic
    trace = np.einsum("iji->j", t_holo)
    return {
        "nsq_N": 16.0 * float(np.sum(np.abs(t_anti) ** 2)),
        "nsq_lee": 2.0 * float(np.sum(np.abs(trace) ** 2)),
        "nsq_dF_plus": float(np.sum(np.abs(t_holo) ** 2)),
        "nsq_dF_minus": float(np.sum(np.abs(t_anti) ** 2))
        + 2.0 * float(np.einsum("ijk,kij->", t_anti, t_anti.conj()).real),
    }


def connection_difference(geo: LocalGeometry) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """gamma = D^0 - D^1 as gamma^i_j(u_k) and gamma^i_j(ubar_k), indexed [i, j, k]."""
    diff = connection_t(geo, 0.0).coefficients.value - connection_t(geo, 1.0).coefficients.value
    df = geo.frame.covariant(np.einsum("zc,cxy->xyz", geo.metric.value, diff))
    n = geo.n
    v = frame_unitary(n)
    u, ub = v[:, :n], v[:, n:]
    return (
        np.einsum("xyz,xk,yj,zi->ijk", df, u, u, ub),
        np.einsum("xyz,xk,yj,zi->ijk", df, ub, u, ub),
    )


def first_chern_form(kt: CurvatureKt) -> tuple[NDArray[np.float64], float]:
    """rho_1(t)(X,Y) = sqrt(-1) sum_i K^t(ubar_i, u_i, X, Y) and its imaginary residue."""
    n = kt.n
    v = frame_unitary(n)
    rho = 1j * np.einsum("abcd,ai,bi->cd", kt.frame, v[:, n:], v[:, :n])
    return rho.real, float(np.abs(rho.imag).max())


def rho11(kt: CurvatureKt, jf: NDArray[np.float64]) -> NDArray[np.float64]:
    """(1,1) part of the first Chern form."""
    rho, _ = first_chern_form(kt)
    return 0.5 * (rho + j_action(rho, jf))


def rho11_expected(geo: LocalGeometry, chern: CurvatureKt, t: float) -> NDArray[np.float64]:
    if not is_integrable(geo.norms):
        raise StructureError("the (1,1) Ricci form relation needs integrable J", geo.norms.nsq_N)
    ddf = geo.frame.covariant(geo.d_delta_F)
    rho1, _ = first_chern_form(chern)
    return rho1 + (t - 1) / 4 * (ddf + j_action(ddf, geo.acs_frame))


def ricci_forms(kt: CurvatureKt) -> dict[int, NDArray[np.complex128]]:
    """The four contractions sqrt(-1) c_ij theta^i ^ thetabar^j, as frame arrays."""
    block = _mixed_block(kt)
    blocks = {
        1: np.einsum("kkij->ij", block),
        2: np.einsum("jikk->ij", block),
        3: np.einsum("kikj->ij", block),
        4: np.einsum("jkik->ij", block),
    }
    theta = frame_coframe_unitary(kt.n)
    out = {}
    for key, c in blocks.items():
        half = np.einsum("ij,iA,jB->AB", c, theta, theta.conj())
        out[key] = 1j * (half - half.T)
    return out


def form_trace(form: NDArray[np.complex128], fundamental: NDArray[np.float64]) -> complex:
    """<rho, F> with the bilinear extension of the metric."""
    return complex(0.5 * np.einsum("ab,ab->", form, fundamental))


@dataclass(frozen=True, slots=True)
class KGauduchonTerms:
    k: int
    density: float
    closed_form: float
    dF_dFbar_pairing: float
    ddbar_pairing: float
    volume_ratio: float


def _frame_kform(geo: LocalGeometry, array: NDArray[np.complex128]) -> KForm:
    return KForm.from_full(geo.frame.covariant(array))


def kgauduchon_terms(geo: LocalGeometry, k: int) -> KGauduchonTerms:
    """sqrt(-1) dd^c(F^k) ^ F^{n-k-1} / dv next to its torsion expression.

    The density expands into k(k-1) sqrt(-1) dF^{1,0} ^ dF^{0,1} ^ F^{n-3} plus
    k sqrt(-1) d(dbar F) ^ F^{n-2}; every wedge runs in the adapted frame.
    """
    n = geo.n
    if n < 3 or not 1 <= k <= n - 1:
        raise StructureError(f"k-Gauduchon densities need n >= 3 and 1 <= k <= n-1, got n={n}, k={k}")
    nb = geo.norms
    if not is_integrable(nb):
        raise StructureError("k-Gauduchon densities need integrable J", nb.nsq_N)
    acs = geo.acs.value
    dbar_f = pq_project_jet(geo.dF, geo.acs, 1, 2)
    ddbar_f = pq_project(exterior_derivative(dbar_f).value, acs, 2, 2)
    del_f = pq_project(geo.dF.value, acs, 2, 1)
    f = KForm.from_full(geo.fundamental_form_frame)
    volume = wedge_power(f, n) * (1 / math.factorial(n))
    dfdf = wedge(_frame_kform(geo, del_f), _frame_kform(geo, dbar_f.value)) * 1j
    ddbar = _frame_kform(geo, ddbar_f) * 1j
    top = wedge(dfdf, wedge_power(f, n - 3)).top * k * (k - 1) + wedge(
        ddbar, wedge_power(f, n - 2)
    ).top * k
    closed = k * math.factorial(n - 3) / 2 * (
        (n - k - 1) * (nb.nsq_dF - nb.nsq_lee) - (n - 2) * nb.delta_lee
    )
    return KGauduchonTerms(
        k=k,
        density=float((top / volume.top).real),
        closed_form=closed,
        dF_dFbar_pairing=float(kform_inner(dfdf, wedge_power(f, 3)).real),
        ddbar_pairing=float(kform_inner(ddbar, wedge_power(f, 2)).real),
        volume_ratio=volume_ratio(geo),
    )


def volume_ratio(geo: LocalGeometry) -> float:
    """|F^n / n!| in chart coordinates over sqrt(det h)."""
    f = KForm.from_full(geo.fundamental_form.value)
    top = wedge_power(f, geo.n).top / math.factorial(geo.n)
    return float(abs(top) / geo.sqrt_det.value)
