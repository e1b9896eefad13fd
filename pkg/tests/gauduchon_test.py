from typing import TYPE_CHECKING

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermitian_lab import gauduchon, hermitian
from hermitian_lab.errors import StructureError
from hermitian_lab.schemas import NormBundle
from hermitian_lab.zoo import get_manifold
from tests.utils import point, twisted_product

if TYPE_CHECKING:
    from hermitian_lab.manifold import LocalGeometry

T_VALUES = (-1.0, 0.0, 0.5, 1.0, 2.0)

norm_sq = st.floats(min_value=0.0, max_value=10.0)
signed = st.floats(min_value=-10.0, max_value=10.0)
t_value = st.floats(min_value=-3.0, max_value=3.0)
dimension = st.integers(min_value=2, max_value=6)


@pytest.fixture(scope="module")
def generic() -> LocalGeometry:
    return get_manifold("perturbed_torus").geometry(point(0.15, 0.35, 0.55, 0.75, 0.95, 0.05))


@pytest.fixture(scope="module")
def conformal6() -> LocalGeometry:
    return twisted_product(6).geometry(point(0.2, -0.1, 0.05, 0.3, -0.25, 0.1))


@pytest.mark.parametrize("t", T_VALUES)
def test_connection_is_metric_and_hermitian(generic: LocalGeometry, t: float) -> None:
    conn = gauduchon.connection_t(generic, t)
    assert gauduchon.metric_residual(generic, conn) < 1e-10
    assert gauduchon.hermitian_residual(generic, conn) < 1e-10


def test_first_canonical_connection_curvature(generic: LocalGeometry) -> None:
    np.testing.assert_allclose(
        gauduchon.curvature_kt(generic, 0.0).frame,
        gauduchon.lichnerowicz_curvature(generic),
        atol=1e-9,
    )


@pytest.mark.parametrize("t", T_VALUES)
def test_scalar_curvatures_match_closed_forms(generic: LocalGeometry, t: float) -> None:
    s, _ = hermitian.scalar_pack(generic)
    nb, n = generic.norms, generic.n
    s1, s2, imag = gauduchon.scalar_curvatures(gauduchon.curvature_kt(generic, t))
    assert imag < 1e-9
    assert s1 == pytest.approx(gauduchon.s1_closed_form(s, nb, n, t), abs=1e-7)
    assert s2 == pytest.approx(gauduchon.s2_closed_form(s, nb, n, t), abs=1e-7)
    assert s1 - s2 == pytest.approx(gauduchon.s1_minus_s2_closed_form(nb, n, t), abs=1e-7)


def test_lichnerowicz_scalars(generic: LocalGeometry) -> None:
    s, s_j = hermitian.scalar_pack(generic)
    s1, s2, _ = gauduchon.scalar_curvatures(gauduchon.curvature_kt(generic, 0.0))
    assert gauduchon.lichnerowicz_scalars(s_j, s, generic.norms) == pytest.approx((s1, s2), abs=1e-7)


def test_torsion_relations(generic: LocalGeometry) -> None:
    tor = gauduchon.chern_torsion(generic)
    dec = generic.decomposition
    np.testing.assert_allclose(np.abs(tor.mixed).max(), 0.0, atol=1e-10)
    np.testing.assert_allclose(
        gauduchon.nijenhuis_antiholomorphic(generic), -4.0 * tor.antiholomorphic, atol=1e-9
    )
    np.testing.assert_allclose(gauduchon.lee_from_torsion(tor), dec.lee, atol=1e-9)
    full, minus = gauduchon.dF_from_torsion(tor, generic)
    np.testing.assert_allclose(full, dec.dF, atol=1e-9)
    np.testing.assert_allclose(minus, dec.dF_minus, atol=1e-9)
    norms = gauduchon.torsion_norms(tor)
    for key, value in norms.items():
        assert value == pytest.approx(getattr(generic.norms, key), abs=1e-9)


def test_connection_difference(generic: LocalGeometry) -> None:
    tor = gauduchon.chern_torsion(generic)
    holo, anti = gauduchon.connection_difference(generic)
    np.testing.assert_allclose(holo, 0.5 * tor.holomorphic, atol=1e-9)
    np.testing.assert_allclose(anti, -0.5 * tor.holomorphic.transpose(1, 0, 2).conj(), atol=1e-9)


@pytest.mark.parametrize("t", T_VALUES)
def test_first_chern_form(generic: LocalGeometry, t: float) -> None:
    rho_t, imag = gauduchon.first_chern_form(gauduchon.curvature_kt(generic, t))
    rho_0, _ = gauduchon.first_chern_form(gauduchon.curvature_kt(generic, 0.0))
    assert imag < 1e-9
    np.testing.assert_allclose(
        rho_t - rho_0, t / 2 * generic.covariant_frame(generic.d_delta_F), atol=1e-8
    )


@pytest.mark.parametrize("t", T_VALUES)
def test_ricci_form_traces(generic: LocalGeometry, t: float) -> None:
    kt = gauduchon.curvature_kt(generic, t)
    s1, s2, _ = gauduchon.scalar_curvatures(kt)
    forms = gauduchon.ricci_forms(kt)
    ff = generic.fundamental_form_frame
    assert set(forms) == {1, 2, 3, 4}
    for which, expected in ((1, s1), (3, s2)):
        assert gauduchon.form_trace(forms[which], ff) == pytest.approx(expected, abs=1e-8)


def test_rho11_needs_integrable_structure(generic: LocalGeometry) -> None:
    with pytest.raises(StructureError):
        gauduchon.rho11_expected(generic, gauduchon.curvature_kt(generic, 1.0), 0.5)


@pytest.mark.parametrize("t", T_VALUES)
def test_rho11_on_hermitian_structure(conformal6: LocalGeometry, t: float) -> None:
    kt = gauduchon.curvature_kt(conformal6, t)
    chern = gauduchon.curvature_kt(conformal6, 1.0)
    np.testing.assert_allclose(
        gauduchon.rho11(kt, conformal6.acs_frame),
        gauduchon.rho11_expected(conformal6, chern, t),
        atol=1e-8,
    )


@pytest.mark.parametrize("k", [1, 2])
def test_kgauduchon_density(conformal6: LocalGeometry, k: int) -> None:
    terms = gauduchon.kgauduchon_terms(conformal6, k)
    assert terms.density == pytest.approx(terms.closed_form, abs=1e-8)
    assert terms.volume_ratio == pytest.approx(1.0)
    nb = conformal6.norms
    assert terms.dF_dFbar_pairing == pytest.approx(3 * (nb.nsq_lee - nb.nsq_dF), abs=1e-8)
    assert terms.ddbar_pairing == pytest.approx(nb.nsq_dF - nb.nsq_lee - nb.delta_lee, abs=1e-8)


@pytest.mark.parametrize("k", [0, 3])
def test_kgauduchon_range(conformal6: LocalGeometry, k: int) -> None:
    with pytest.raises(StructureError):
        gauduchon.kgauduchon_terms(conformal6, k)


def test_kgauduchon_needs_integrable_structure(generic: LocalGeometry) -> None:
    with pytest.raises(StructureError):
        gauduchon.kgauduchon_terms(generic, 1)


def test_volume_ratio(generic: LocalGeometry) -> None:
    assert gauduchon.volume_ratio(generic) == pytest.approx(1.0)


def _bundle(  # noqa: PLR0913
    dF0_plus: float, lee: float, delta_lee: float, n: int, dF_minus: float = 0.0, N0: float = 0.0
) -> NormBundle:
    dF_plus = dF0_plus + lee / (n - 1)
    return NormBundle(
        nsq_dF=dF_plus + dF_minus,
        nsq_dF_minus=dF_minus,
        nsq_dF_plus=dF_plus,
        nsq_dF0_plus=dF0_plus,
        nsq_N=N0,
        nsq_N0=N0,
        nsq_bN=0.0,
        nsq_lee=lee,
        nsq_nablaF=0.0,
        delta_lee=delta_lee,
    )


@given(s=signed, dF0=norm_sq, lee=norm_sq, delta=signed, n=dimension, t=t_value)
@settings(max_examples=60)
def test_hermitian_specialisation(  # noqa: PLR0913
    s: float, dF0: float, lee: float, delta: float, n: int, t: float
) -> None:
    nb = _bundle(dF0, lee, delta, n)
    general = (gauduchon.s1_closed_form(s, nb, n, t), gauduchon.s2_closed_form(s, nb, n, t))
    assert gauduchon.hermitian_closed_forms(s, nb, t) == pytest.approx(general, abs=1e-9)


@given(s=signed, N0=norm_sq, lee=norm_sq, delta=signed, t=t_value)
@settings(max_examples=60)
def test_surface_specialisation(s: float, N0: float, lee: float, delta: float, t: float) -> None:
    nb = _bundle(0.0, lee, delta, 2, N0=N0)
    general = (gauduchon.s1_closed_form(s, nb, 2, t), gauduchon.s2_closed_form(s, nb, 2, t))
    assert gauduchon.surface_closed_forms(s, nb, t) == pytest.approx(general, abs=1e-9)


@given(
    dF0=norm_sq, lee=norm_sq, delta=signed, n=dimension, t=t_value, dF_minus=norm_sq, N0=norm_sq
)
@settings(max_examples=60)
def test_difference_closed_form(  # noqa: PLR0913
    dF0: float, lee: float, delta: float, n: int, t: float, dF_minus: float, N0: float
) -> None:
    nb = _bundle(dF0, lee, delta, n, dF_minus=dF_minus, N0=N0)
    difference = gauduchon.s1_closed_form(0.0, nb, n, t) - gauduchon.s2_closed_form(0.0, nb, n, t)
    assert gauduchon.s1_minus_s2_closed_form(nb, n, t) == pytest.approx(difference, abs=1e-9)


@given(s=signed, dF0=norm_sq, lee=norm_sq, delta=signed, n=dimension)
@settings(max_examples=60)
def test_bismut_and_chern_gaps(s: float, dF0: float, lee: float, delta: float, n: int) -> None:
    nb = _bundle(dF0, lee, delta, n)
    s1_b, s2_b = gauduchon.hermitian_closed_forms(s, nb, -1.0)
    s1_c, s2_c = gauduchon.hermitian_closed_forms(s, nb, 1.0)
    assert gauduchon.bismut_difference(nb) == pytest.approx(s1_b - s2_b, abs=1e-9)
    assert gauduchon.chern_difference(nb) == pytest.approx(s1_c - s2_c, abs=1e-9)


@given(s1_0=signed, s2_0=signed, dF0=norm_sq, lee=norm_sq, delta=signed, n=dimension, t=t_value)
@settings(max_examples=60)
def test_trace_identities_follow_closed_forms(  # noqa: PLR0913
    s1_0: float, s2_0: float, dF0: float, lee: float, delta: float, n: int, t: float
) -> None:
    nb = _bundle(dF0, lee, delta, n)
    assert gauduchon.trace_identities(s1_0, s2_0, nb, 0.0) == (s1_0, s2_0)
    s1_t, s2_t = gauduchon.trace_identities(s1_0, s2_0, nb, t)
    s1_shift = gauduchon.s1_closed_form(0.0, nb, n, t) - gauduchon.s1_closed_form(0.0, nb, n, 0.0)
    s2_shift = gauduchon.s2_closed_form(0.0, nb, n, t) - gauduchon.s2_closed_form(0.0, nb, n, 0.0)
    assert s1_t - s1_0 == pytest.approx(s1_shift, abs=1e-8)
    assert s2_t - s2_0 == pytest.approx(s2_shift, abs=1e-8)
