"""Levi-Civita connection and Riemannian curvature contractions.

Coordinate conventions: ``gamma[c, a, b]`` is Gamma^c_{ab} with
nabla_{d_a} d_b = Gamma^c_{ab} d_c; derivative axes of jets trail the value
axes. Frame arrays are components in an adapted orthonormal frame.
"""

from typing import TYPE_CHECKING, Any

import numpy as np

from hermitian_lab.jets import TensorJet, jet_einsum

if TYPE_CHECKING:
    from numpy.typing import NDArray


def christoffel(h: TensorJet, hinv: TensorJet) -> TensorJet:
    dh = h.grad()  # dh[x, y, z] = d_z h_xy
    lowered = dh.transpose(0, 2, 1) + dh - dh.transpose(2, 0, 1)
    return jet_einsum("cd,dab->cab", hinv, lowered) * 0.5


def covariant_derivative_acs(acs: TensorJet, gamma: TensorJet) -> TensorJet:
    """nabla_J[a, b, c] = (nabla_{d_c} J)^a_b."""
    return (
        acs.grad()
        + jet_einsum("ace,eb->abc", gamma, acs)
        - jet_einsum("ecb,ae->abc", gamma, acs)
    )


def nabla_form2(form: TensorJet, gamma: TensorJet) -> NDArray[np.float64]:
    """(nabla_a F)_{bc} of a coordinate 2-form, value only."""
    partial = np.moveaxis(form.grad().value, -1, 0)
    g, f = gamma.value, form.value
    return partial - np.einsum("eab,ec->abc", g, f) - np.einsum("eac,be->abc", g, f)


def curvature_from_connection(coefficients: TensorJet, h: NDArray[np.float64]) -> NDArray[Any]:
    """K(X,Y,Z,W) = h(D_Z D_W Y - D_W D_Z Y - D_[Z,W] Y, X) in coordinates.

    ``coefficients[a, w, y]`` is A^a_{wy} with D_{d_w} d_y = A^a_{wy} d_a; no
    symmetry is assumed.
    """
    a = coefficients.value
    if coefficients.d1 is None:
        raise ValueError("connection coefficients need first derivatives")
    da = coefficients.d1
    k_up = (
        np.einsum("awyc->aycw", da)
        - np.einsum("acyw->aycw", da)
        + np.einsum("ace,ewy->aycw", a, a)
        - np.einsum("awe,ecy->aycw", a, a)
    )
    return np.einsum("xa,aycw->xycw", h, k_up)


def riemann(gamma: TensorJet, h: NDArray[np.float64]) -> NDArray[np.float64]:
    return curvature_from_connection(gamma, h)


def riemann_symmetry_residual(rf: NDArray[np.float64]) -> float:
    antisym = np.abs(rf + rf.transpose(1, 0, 2, 3)).max()
    pairs = np.abs(rf - rf.transpose(2, 3, 0, 1)).max()
    bianchi = np.abs(rf + rf.transpose(0, 2, 3, 1) + rf.transpose(0, 3, 1, 2)).max()
    return float(max(antisym, pairs, bianchi))


def ricci(rf: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.einsum("abad->bd", rf)


def scalar_s(rf: NDArray[np.float64]) -> float:
    return float(np.einsum("abab->", rf))


def j_ricci(rf: NDArray[np.float64], jf: NDArray[np.float64]) -> NDArray[np.float64]:
    """Ric_J(X,Y) = R(e_A, X, J e_A, J Y); ``jf[C, A]`` is component C of J e_A."""
    return np.einsum("axcd,ca,dy->xy", rf, jf, jf)


def scalar_sJ(rf: NDArray[np.float64], jf: NDArray[np.float64]) -> float:
    return float(np.trace(j_ricci(rf, jf)))


def j_ricci_form(rf: NDArray[np.float64], jf: NDArray[np.float64]) -> NDArray[np.float64]:
    """rho_J(X,Y) = -Ric_J(X, JY)."""
    return -np.einsum("xb,by->xy", j_ricci(rf, jf), jf)


def curvature_operator(rf: NDArray[np.float64], form: NDArray[np.float64]) -> NDArray[np.float64]:
    """The curvature operator on 2-forms, h(r(X^Y), Z^W) = R(X,Y,Z,W)."""
    return 0.5 * np.einsum("ab,abcd->cd", form, rf)


def kulkarni_nomizu(p: NDArray[np.float64], q: NDArray[np.float64]) -> NDArray[np.float64]:
    return (
        np.einsum("ac,bd->abcd", p, q)
        + np.einsum("bd,ac->abcd", p, q)
        - np.einsum("ad,bc->abcd", p, q)
        - np.einsum("bc,ad->abcd", p, q)
    )


def weyl(rf: NDArray[np.float64]) -> NDArray[np.float64]:
    m = rf.shape[0]
    g = np.eye(m)
    ric = ricci(rf)
    s = scalar_s(rf)
    return (
        rf
        - kulkarni_nomizu(ric, g) / (m - 2)
        + s / (2 * (m - 1) * (m - 2)) * kulkarni_nomizu(g, g)
    )


def weyl_contract(rf: NDArray[np.float64], form: NDArray[np.float64]) -> float:
    """<W(F), F> = 1/4 W_ABCD F_AB F_CD."""
    return 0.25 * float(np.einsum("abcd,ab,cd->", weyl(rf), form, form))
