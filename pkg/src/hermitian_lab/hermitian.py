"""Intrinsic torsion of an almost Hermitian structure at a point."""

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from hermitian_lab.constants import CLASSIFY_TOLERANCE
from hermitian_lab.riemannian import nabla_form2, scalar_s, scalar_sJ
from hermitian_lab.schemas import ClassResult, NormBundle
from hermitian_lab.tensors import apply_slots, form_norm_sq, j_action, pq_project

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from hermitian_lab.manifold import LocalGeometry


def nijenhuis(geo: LocalGeometry) -> NDArray[np.float64]:
    """N^a_{bc} = N(d_b, d_c)^a for N(X,Y) = [X,Y] + J[JX,Y] + J[X,JY] - [JX,JY]."""
    j = geo.acs.value
    dj = geo.acs.grad().value  # dj[a, b, c] = d_c J^a_b
    return -(
        np.einsum("db,acd->abc", j, dj)
        - np.einsum("dc,abd->abc", j, dj)
        + np.einsum("ad,dbc->abc", j, dj)
        - np.einsum("ad,dcb->abc", j, dj)
    )


def lee_wedge(lee: NDArray[np.float64], form: NDArray[np.float64]) -> NDArray[np.float64]:
    return (
        np.einsum("a,bc->abc", lee, form)
        + np.einsum("b,ca->abc", lee, form)
        + np.einsum("c,ab->abc", lee, form)
    )


def cyclic_sum(t: NDArray[np.float64]) -> NDArray[np.float64]:
    return t + t.transpose(1, 2, 0) + t.transpose(2, 0, 1)


@dataclass(frozen=True, slots=True)
class Decomposition:
    """Frame components of the pieces of dF and N."""

    fundamental_form: NDArray[np.float64]
    dF: NDArray[np.float64]
    dF_minus: NDArray[np.float64]
    dF_plus: NDArray[np.float64]
    dF0_plus: NDArray[np.float64]
    lee: NDArray[np.float64]
    N: NDArray[np.float64]
    bN: NDArray[np.float64]
    N0: NDArray[np.float64]


def decompose(geo: LocalGeometry) -> Decomposition:
    """Uncached; use ``LocalGeometry.decomposition``."""
    frame, jf, n = geo.frame, geo.acs_frame, geo.n
    ff = geo.fundamental_form_frame
    dF = frame.covariant(geo.dF.value)
    dF_minus = 2.0 * pq_project(dF, jf, 3, 0).real
    dF_plus = dF - dF_minus
    lee = frame.covariant(geo.lee.value)
    dF0_plus = dF_plus - lee_wedge(lee, ff) / (n - 1)
    n_low = np.einsum("ea,abc->ebc", geo.metric.value, nijenhuis(geo))
    N = frame.covariant(n_low)
    bN = cyclic_sum(N) / 3.0
    return Decomposition(ff, dF, dF_minus, dF_plus, dF0_plus, lee, N, bN, N - bN)


def nabla_F_frame(geo: LocalGeometry) -> NDArray[np.float64]:
    """(nabla_{e_A} F)(e_B, e_C)."""
    return geo.frame.covariant(nabla_form2(geo.fundamental_form, geo.gamma))


def vector_norm_sq(t: NDArray[np.float64]) -> float:
    """Norm of a TM-valued 2-form stored as N(X, Y, Z) = h(X, N(Y, Z))."""
    return 0.5 * float(np.sum(t**2))


def norms(geo: LocalGeometry) -> NormBundle:
    dec = geo.decomposition
    return NormBundle(
        nsq_dF=form_norm_sq(dec.dF),
        nsq_dF_minus=form_norm_sq(dec.dF_minus),
        nsq_dF_plus=form_norm_sq(dec.dF_plus),
        nsq_dF0_plus=form_norm_sq(dec.dF0_plus),
        nsq_N=vector_norm_sq(dec.N),
        nsq_N0=vector_norm_sq(dec.N0),
        nsq_bN=vector_norm_sq(dec.bN),
        nsq_lee=float(np.sum(dec.lee**2)),
        nsq_nablaF=vector_norm_sq(nabla_F_frame(geo)),
        delta_lee=geo.delta_lee,
    )


def lee_via_codifferential(geo: LocalGeometry) -> NDArray[np.float64]:
    """J delta F in frame components, the second route to the Lee form."""
    delta_f = geo.frame.covariant(geo.delta_F.value)
    return j_action(delta_f, geo.acs_frame)


def nabla_F_from_dF(geo: LocalGeometry) -> NDArray[np.float64]:
    """1/2 [dF(X,Y,Z) - dF(X,JY,JZ) - h(JX, N(Y,Z))]."""
    dec, jf = geo.decomposition, geo.acs_frame
    eye = np.eye(geo.dim)
    return 0.5 * (
        dec.dF
        - apply_slots(dec.dF, [eye, jf, jf])
        - apply_slots(dec.N, [jf, eye, eye])
    )


def nabla_F_reconstruction(geo: LocalGeometry) -> NDArray[np.float64]:
    """(dF)^- - 1/2 N(JX,Y,Z) + 1/2 [(dF)^+(X,Y,Z) - (dF)^+(X,JY,JZ)]."""
    dec, jf = geo.decomposition, geo.acs_frame
    eye = np.eye(geo.dim)
    return (
        dec.dF_minus
        - 0.5 * apply_slots(dec.N, [jf, eye, eye])
        + 0.5 * (dec.dF_plus - apply_slots(dec.dF_plus, [eye, jf, jf]))
    )


def nabla_F_symmetry_residual(geo: LocalGeometry) -> float:
    nf, jf = nabla_F_frame(geo), geo.acs_frame
    eye = np.eye(geo.dim)
    skew = np.abs(nf + nf.transpose(0, 2, 1)).max()
    j_anti = np.abs(nf + apply_slots(nf, [eye, jf, jf])).max()
    return float(max(skew, j_anti))


def nabla_F_norm_forms(nb: NormBundle, n: int) -> tuple[float, float]:
    """|nabla F|^2 through dF and N0, then through the four components."""
    first = nb.nsq_dF + 0.25 * nb.nsq_N0 - 2.0 / 3.0 * nb.nsq_dF_minus
    second = (
        nb.nsq_lee / (n - 1)
        + nb.nsq_dF0_plus
        + 0.25 * nb.nsq_N0
        + nb.nsq_dF_minus / 3.0
    )
    return first, second


def scalar_gap(nb: NormBundle) -> float:
    """s - s_J in terms of the torsion norms."""
    return (
        2.0 / 3.0 * nb.nsq_dF_minus
        - 0.25 * nb.nsq_N0
        + nb.nsq_lee
        + 2.0 * nb.delta_lee
    )


def scalar_pack(geo: LocalGeometry) -> tuple[float, float]:
    rf = geo.riemann_frame
    return scalar_s(rf), scalar_sJ(rf, geo.acs_frame)


def is_integrable(nb: NormBundle, tol: float = CLASSIFY_TOLERANCE) -> bool:
    return nb.nsq_N < tol


def class_components(nb: NormBundle, n: int) -> dict[str, float]:
    """Squared norms of the four torsion components; W1 and W3 vanish when n = 2."""
    return {
        "W1": nb.nsq_dF_minus if n > 2 else 0.0,
        "W2": nb.nsq_N0,
        "W3": nb.nsq_dF0_plus if n > 2 else 0.0,
        "W4": nb.nsq_lee,
    }


def class_label(present: set[str]) -> str:
    return "+".join(sorted(present)) if present else "K"


def classify(
    bundles: list[NormBundle], n: int, tol: float = CLASSIFY_TOLERANCE, expected: str | None = None
) -> ClassResult:
    """Smallest class containing every sampled point."""
    maxima = {key: 0.0 for key in ("W1", "W2", "W3", "W4")}
    for nb in bundles:
        for key, value in class_components(nb, n).items():
            maxima[key] = max(maxima[key], value)
    label = class_label({key for key, value in maxima.items() if value >= tol})
    return ClassResult(
        label=label,
        components=maxima,
        expected=expected,
        matches=None if expected is None else expected == label,
    )


def diagnose(maxima: dict[str, float], tol: float) -> str:
    """Name the structure from which torsion components vanish."""
    present = {key for key, value in maxima.items() if value >= tol}
    if not present:
        return "Kaehler"
    if present == {"W1"}:
        return "nearly Kaehler"
    if present == {"W2"}:
        return "almost Kaehler"
    if present == {"W3"}:
        return "balanced Hermitian"
    if present == {"W4"}:
        return "locally conformally Kaehler"
    if present <= {"W3", "W4"}:
        return "Hermitian"
    return class_label(present)
