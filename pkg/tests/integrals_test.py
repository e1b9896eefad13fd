import math

import pytest

from hermitian_lab.constants import T_ROOT_HIGH, T_ROOT_LOW
from hermitian_lab.errors import InputError
from hermitian_lab.integrals import (
    INTEGRANDS,
    THEOREMS,
    SignTheorem,
    TheoremContext,
    _tolerance,
    evaluate_theorem,
    integrand,
    integrate,
    kgauduchon_theorem,
    sign_theorems,
)
from hermitian_lab.schemas import ClassResult, IntegralEstimate
from hermitian_lab.zoo import get_manifold

KAEHLER = ClassResult(label="K", components={"W1": 0.0, "W2": 0.0, "W3": 0.0, "W4": 0.0})
BALANCED = ClassResult(label="W3", components={"W1": 0.0, "W2": 0.0, "W3": 1.0, "W4": 0.0})


def _theorem(name: str) -> SignTheorem:
    return next(th for th in THEOREMS if th.name == name)


def test_integrand_lookup() -> None:
    assert integrand("volume") is INTEGRANDS["volume"]
    assert integrand("kgauduchon:k=2").name == "kgauduchon:k=2"
    assert integrand("abs_kgauduchon:k=1").name == "abs_kgauduchon:k=1"
    with pytest.raises(InputError, match="kgauduchon:k=N"):
        integrand("kgauduchon:k=x")
    with pytest.raises(InputError):
        integrand("no_such_integrand")


def test_every_theorem_has_integrands() -> None:
    for theorem in THEOREMS:
        assert integrand(theorem.integrand)
        assert integrand(theorem.closed_form)


def test_flat_torus_integrals() -> None:
    manifold = get_manifold("flat_torus_4")
    quadrature = manifold.domain.quadrature(16, 0, manifold.homogeneous)
    assert quadrature.method == "lattice"
    estimates = integrate(
        manifold, [("volume", None), ("s_minus_sJ", None), ("total_s1_minus_s2", 0.5)], quadrature
    )
    volume, gap, difference = estimates
    assert volume.value == pytest.approx(1.0)
    assert volume.points == 16
    assert volume.std_error is None
    assert gap.value == pytest.approx(0.0, abs=1e-12)
    assert difference.t == 0.5
    assert difference.value == pytest.approx(0.0, abs=1e-12)


def test_iwasawa_volume_uses_metric_density() -> None:
    manifold = get_manifold("iwasawa")
    quadrature = manifold.domain.quadrature(1, 0, manifold.homogeneous)
    (volume,) = integrate(manifold, [("volume", None)], quadrature, max_workers=1)
    assert volume.value == pytest.approx(8.0)


def test_hopf_volume_uses_riemannian_weights() -> None:
    manifold = get_manifold("hopf_2")
    quadrature = manifold.domain.quadrature(8, 3, manifold.homogeneous)
    assert quadrature.riemannian
    (volume, lee) = integrate(manifold, [("volume", None), ("delta_lee", None)], quadrature)
    assert volume.value == pytest.approx(math.log(2.0) * 2 * math.pi**2)
    assert volume.method == "quasi-random"
    assert lee.value == pytest.approx(0.0, abs=1e-8)


@pytest.mark.parametrize(
    ("name", "n", "present", "t", "skipped"),
    [
        ("s_minus_sJ_nonnegative", 3, {"W1", "W4"}, None, False),
        ("s_minus_sJ_nonnegative", 3, {"W2"}, None, True),
        ("s_minus_sJ_nonpositive", 2, {"W2", "W3"}, None, False),
        ("total_2s1_minus_s_nonnegative", 3, {"W3"}, 0.75, False),
        ("total_2s1_minus_s_nonnegative", 3, {"W3"}, 0.5, True),
        ("total_2s1_minus_s_nonnegative", 2, {"W3"}, 1.0, True),
        ("surface_total_2s1_minus_s_nonpositive", 2, {"W4"}, 0.5, False),
        ("surface_total_2s1_minus_s_nonpositive", 2, {"W2"}, 0.0, True),
        ("total_s1_minus_s2_nonnegative", 3, {"W4"}, 0.5, False),
        ("total_s1_minus_s2_nonnegative", 3, {"W4"}, 0.0, True),
        ("total_s1_minus_s2_nonpositive", 3, {"W4"}, 0.0, False),
        ("total_s1_minus_s2_nonpositive", 3, {"W4"}, 0.5, True),
        ("total_s1_minus_s2_nonnegative", 3, {"W3", "W4"}, T_ROOT_LOW, False),
        ("total_s1_minus_s2_nonnegative", 3, {"W3", "W4"}, T_ROOT_HIGH, False),
        ("total_s1_minus_s2_nonnegative", 3, {"W3", "W4"}, -0.5, True),
        ("total_s1_minus_s2_nonpositive", 3, {"W1", "W4"}, 1 / 3, False),
        ("total_s1_minus_s2_nonpositive", 3, {"W1", "W4"}, -0.5, False),
        ("surface_total_s1_minus_s2_nonnegative", 2, {"W2"}, 1 / 3, False),
        ("surface_total_s1_minus_s2_nonnegative", 2, {"W2"}, -0.5, True),
        ("surface_total_s1_minus_s2_nonpositive", 2, {"W4"}, -0.5, False),
        ("surface_total_s1_minus_s2_nonpositive", 2, {"W4"}, 1 / 3, False),
        ("chern_gap_nonnegative", 3, {"W1"}, None, True),
        ("bismut_gap_total", 2, set(), None, True),
        ("lee_divergence_total", 2, {"W1", "W2", "W3", "W4"}, None, False),
    ],
)
def test_theorem_hypotheses(
    name: str, n: int, present: set[str], t: float | None, skipped: bool
) -> None:
    reason = _theorem(name).hypothesis(TheoremContext(n, frozenset(present), t))
    assert (reason is not None) == skipped


def test_threshold_boundary_is_inclusive() -> None:
    theorem = _theorem("total_2s1_minus_s_nonpositive")
    assert theorem.hypothesis(TheoremContext(3, frozenset({"W4"}), 0.75)) is None


def test_kaehler_theorem_reports_equality() -> None:
    manifold = get_manifold("flat_torus_4")
    quadrature = manifold.domain.quadrature(16, 0, manifold.homogeneous)
    result = evaluate_theorem(
        _theorem("s_minus_sJ_nonnegative"), manifold, quadrature, KAEHLER, None, 1e-8, 1e-6, 1e-10
    )
    assert result.status == "passed"
    assert result.equality is True
    assert result.diagnosis == "Kaehler"
    assert result.integral is not None
    assert result.closed_form_integral is not None


def test_skipped_theorem_has_reason() -> None:
    manifold = get_manifold("flat_torus_4")
    quadrature = manifold.domain.quadrature(16, 0, manifold.homogeneous)
    result = evaluate_theorem(
        _theorem("total_s1_minus_s2_nonpositive"),
        manifold,
        quadrature,
        KAEHLER,
        0.0,
        1e-8,
        1e-6,
        1e-10,
    )
    assert result.status == "skipped"
    assert result.reason == "needs n >= 3, n = 2"
    assert result.integral is None


def test_iwasawa_bismut_gap() -> None:
    manifold = get_manifold("iwasawa")
    quadrature = manifold.domain.quadrature(1, 0, manifold.homogeneous)
    result = evaluate_theorem(
        _theorem("bismut_gap_total"), manifold, quadrature, BALANCED, None, 1e-8, 1e-6, 1e-10, 1
    )
    assert result.status == "passed"
    assert result.expected_sign is None
    assert result.equality is None
    assert result.integral is not None
    assert result.integral.value == pytest.approx(2.0 * 8.0)


def test_kgauduchon_theorem_needs_bismut_balance() -> None:
    manifold = get_manifold("iwasawa")
    quadrature = manifold.domain.quadrature(1, 0, manifold.homogeneous)
    result = kgauduchon_theorem(manifold, quadrature, BALANCED, 1e-8, 1e-10, 1)
    assert result.status == "skipped"
    assert result.reason is not None
    assert result.reason.startswith("s1(-1) != s2(-1)")


def test_kgauduchon_theorem_on_surface() -> None:
    manifold = get_manifold("flat_torus_4")
    quadrature = manifold.domain.quadrature(16, 0, manifold.homogeneous)
    result = kgauduchon_theorem(manifold, quadrature, KAEHLER, 1e-8, 1e-10)
    assert result.status == "skipped"
    assert result.reason == "needs n >= 3, n = 2"


def test_sign_theorems_on_flat_torus() -> None:
    manifold = get_manifold("flat_torus_4")
    quadrature = manifold.domain.quadrature(16, 0, manifold.homogeneous)
    results = sign_theorems(manifold, quadrature, KAEHLER, (-1.0, 1.0), 1e-8, 1e-6, 1e-10)
    assert not [r for r in results if r.status == "failed"]
    names = [r.theorem for r in results]
    assert names.count("surface_total_s1_minus_s2_nonnegative") == 2
    assert names[-1] == "kgauduchon_from_bismut_balance"
    passed = {(r.theorem, r.t) for r in results if r.status == "passed"}
    assert ("surface_total_2s1_minus_s_nonnegative", 1.0) in passed
    assert ("lee_divergence_total", None) in passed


def test_sign_theorems_at_region_endpoints() -> None:
    manifold = get_manifold("flat_torus_4")
    quadrature = manifold.domain.quadrature(16, 0, manifold.homogeneous)
    ts = (T_ROOT_LOW, -0.5, 1 / 3, T_ROOT_HIGH)
    results = sign_theorems(manifold, quadrature, KAEHLER, ts, 1e-8, 1e-6, 1e-10)
    assert not [r for r in results if r.status == "failed"]
    passed = {(r.theorem, r.t) for r in results if r.status == "passed"}
    assert ("surface_total_s1_minus_s2_nonpositive", -0.5) in passed
    assert ("surface_total_s1_minus_s2_nonpositive", 1 / 3) in passed
    assert ("surface_total_s1_minus_s2_nonnegative", 1 / 3) in passed


@pytest.mark.parametrize(("sigmas", "expected"), [(3.0, 3e-3), (6.0, 6e-3)])
def test_quadrature_band(sigmas: float, expected: float) -> None:
    estimate = IntegralEstimate(integrand="s", value=0.0, std_error=1e-3, points=8, method="quasi-random")
    assert _tolerance(estimate, 1e-3, 1e-8, 1e-6, sigmas) == pytest.approx(expected)
    assert _tolerance(estimate, None, 1e-8, 1e-6, sigmas) == 1e-8
