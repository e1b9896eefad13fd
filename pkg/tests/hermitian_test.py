import numpy as np
import pytest

from hermitian_lab import hermitian
from hermitian_lab.schemas import NormBundle
from hermitian_lab.zoo import get_manifold
from tests.utils import point, round_sphere_chart, twisted_product

ZERO_NORMS = NormBundle(
    nsq_dF=0.0,
    nsq_dF_minus=0.0,
    nsq_dF_plus=0.0,
    nsq_dF0_plus=0.0,
    nsq_N=0.0,
    nsq_N0=0.0,
    nsq_bN=0.0,
    nsq_lee=0.0,
    nsq_nablaF=0.0,
    delta_lee=0.0,
)

GEOMETRIES = {
    "twisted": lambda: twisted_product().geometry(point(0.2, -0.1, 0.05, 0.3)),
    "sphere": lambda: round_sphere_chart(4).geometry(point(0.3, 0.1, -0.2, 0.25)),
    "kodaira_thurston": lambda: get_manifold("kodaira_thurston").geometry(point(0.3, 0.6, 0.2, 0.9)),
    "iwasawa": lambda: get_manifold("iwasawa").geometry(point(0.1, 0.7, 0.4, 0.2, 0.5, 0.8)),
    "perturbed": lambda: get_manifold("perturbed_torus").geometry(point(0.15, 0.35, 0.55, 0.75, 0.95, 0.05)),
}


def test_lee_form_of_conformal_metric() -> None:
    geo = twisted_product().geometry(point(0.2, -0.1, 0.05, 0.3))
    np.testing.assert_allclose(geo.lee.value, [1.0, 0.6 * -0.1, 0.0, 0.0], atol=1e-12)
    nb = geo.norms
    assert nb.nsq_N == pytest.approx(0.0, abs=1e-20)
    assert nb.nsq_dF_minus == pytest.approx(0.0, abs=1e-20)
    assert nb.nsq_dF0_plus == pytest.approx(0.0, abs=1e-20)
    assert nb.nsq_lee > 0.1


@pytest.mark.parametrize("name", list(GEOMETRIES))
def test_lee_form_two_ways(name: str) -> None:
    geo = GEOMETRIES[name]()
    np.testing.assert_allclose(
        hermitian.lee_via_codifferential(geo), geo.decomposition.lee, atol=1e-9
    )


@pytest.mark.parametrize("name", list(GEOMETRIES))
def test_nabla_F_reconstructions(name: str) -> None:
    geo = GEOMETRIES[name]()
    direct = hermitian.nabla_F_frame(geo)
    np.testing.assert_allclose(hermitian.nabla_F_from_dF(geo), direct, atol=1e-9)
    np.testing.assert_allclose(hermitian.nabla_F_reconstruction(geo), direct, atol=1e-9)
    assert hermitian.nabla_F_symmetry_residual(geo) < 1e-9
    first, second = hermitian.nabla_F_norm_forms(geo.norms, geo.n)
    assert first == pytest.approx(geo.norms.nsq_nablaF, abs=1e-9)
    assert second == pytest.approx(geo.norms.nsq_nablaF, abs=1e-9)


@pytest.mark.parametrize("name", list(GEOMETRIES))
def test_scalar_gap(name: str) -> None:
    geo = GEOMETRIES[name]()
    s, s_j = hermitian.scalar_pack(geo)
    assert s - s_j == pytest.approx(hermitian.scalar_gap(geo.norms), abs=1e-8)


@pytest.mark.parametrize("name", list(GEOMETRIES))
def test_decomposition_pieces(name: str) -> None:
    dec = GEOMETRIES[name]().decomposition
    np.testing.assert_allclose(dec.dF_plus + dec.dF_minus, dec.dF)
    np.testing.assert_allclose(dec.bN + dec.N0, dec.N)
    np.testing.assert_allclose(hermitian.cyclic_sum(dec.N0), 0.0, atol=1e-10)
    np.testing.assert_allclose(dec.N, -dec.N.transpose(0, 2, 1), atol=1e-10)


def test_almost_kaehler_has_closed_fundamental_form() -> None:
    nb = GEOMETRIES["kodaira_thurston"]().norms
    assert nb.nsq_dF == pytest.approx(0.0, abs=1e-20)
    assert nb.nsq_N > 0.1
    assert not hermitian.is_integrable(nb)


@pytest.mark.parametrize(
    ("components", "label"),
    [
        ({}, "K"),
        ({"nsq_N0": 1.0}, "W2"),
        ({"nsq_lee": 1.0, "nsq_dF0_plus": 0.5}, "W3+W4"),
        ({"nsq_dF_minus": 2.0, "nsq_N0": 1.0, "nsq_dF0_plus": 1.0, "nsq_lee": 1.0}, "W1+W2+W3+W4"),
    ],
)
def test_classify_labels(components: dict[str, float], label: str) -> None:
    nb = ZERO_NORMS.model_copy(update=components)
    result = hermitian.classify([ZERO_NORMS, nb], 3, 1e-12, expected=label)
    assert result.label == label
    assert result.matches is True


def test_classify_surface_ignores_w1_and_w3() -> None:
    nb = ZERO_NORMS.model_copy(update={"nsq_dF_minus": 1.0, "nsq_dF0_plus": 1.0})
    result = hermitian.classify([nb], 2, 1e-12, expected="W4")
    assert result.label == "K"
    assert result.matches is False


@pytest.mark.parametrize(
    ("present", "diagnosis"),
    [
        (set(), "Kaehler"),
        ({"W1"}, "nearly Kaehler"),
        ({"W2"}, "almost Kaehler"),
        ({"W3"}, "balanced Hermitian"),
        ({"W4"}, "locally conformally Kaehler"),
        ({"W3", "W4"}, "Hermitian"),
        ({"W1", "W2"}, "W1+W2"),
    ],
)
def test_diagnose(present: set[str], diagnosis: str) -> None:
    maxima = {key: (1.0 if key in present else 0.0) for key in ("W1", "W2", "W3", "W4")}
    assert hermitian.diagnose(maxima, 1e-12) == diagnosis
