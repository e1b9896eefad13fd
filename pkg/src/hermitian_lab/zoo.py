"""Catalog of manifolds with known structure class and known scalar values."""

import dataclasses
import functools
from typing import TYPE_CHECKING

import numpy as np

from hermitian_lab.constants import PERTURBATION_AMPLITUDE
from hermitian_lab.domains import AnnulusDomain, BoxDomain, SphereDomain
from hermitian_lab.errors import InputError, UnknownManifoldError
from hermitian_lab.expr import parse
from hermitian_lab.jets import jet_einsum
from hermitian_lab.manifold import (
    ConjugatedStructure,
    ExpressionStructure,
    Manifold,
    embedded_structure,
    manifold_from_spec,
)
from hermitian_lab.schemas import DomainSpec, ManifoldSpecFile

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from numpy.typing import NDArray

    from hermitian_lab.jets import TensorJet

_PERTURBATION_SEED = 20240611

# oriented triples (1-based) of the octonion product on Im O = R^7
_OCTONION_TRIPLES = ((1, 2, 3), (1, 4, 5), (1, 7, 6), (2, 4, 6), (2, 5, 7), (3, 4, 7), (3, 6, 5))


def _identity_strings(dim: int) -> list[list[str]]:
    return [["1" if a == b else "0" for b in range(dim)] for a in range(dim)]


def _standard_acs_strings(n: int) -> list[list[str]]:
    rows = [["0"] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        rows[n + i][i] = "1"
        rows[i][n + i] = "-1"
    return rows


def _product(a: str, b: str) -> str | None:
    if "0" in (a, b):
        return None
    if a == "1":
        return f"({b})"
    if b == "1":
        return f"({a})"
    return f"({a})*({b})"


def coframe_metric(rows: Sequence[Sequence[str]], scale: float = 1.0) -> list[list[str]]:
    """h = scale * sum_i theta^i (x) theta^i for coframe rows theta^i_a, as expression strings."""
    dim = len(rows[0])
    metric = []
    for a in range(dim):
        line = []
        for b in range(dim):
            terms = [t for row in rows if (t := _product(row[a], row[b])) is not None]
            entry = " + ".join(terms) if terms else "0"
            line.append(entry if scale == 1.0 or entry == "0" else f"{scale:g}*({entry})")
        metric.append(line)
    return metric


def _torus_domain(dim: int) -> DomainSpec:
    return DomainSpec(periodic=[True] * dim, box=[(0.0, 1.0)] * dim)


def _from_strings(  # noqa: PLR0913
    name: str,
    metric: list[list[str]],
    acs: list[list[str]],
    expected_class: str,
    expected_scalars: dict[str, float],
    description: str,
) -> Manifold:
    dim = len(metric)
    spec = ManifoldSpecFile(
        dim=dim,
        metric=metric,
        acs=acs,
        domain=_torus_domain(dim),
        expected_class=expected_class,
        name=name,
    )
    return dataclasses.replace(
        manifold_from_spec(spec),
        expected_scalars=expected_scalars,
        homogeneous=True,
        description=description,
    )


def flat_torus(n: int) -> Manifold:
    dim = 2 * n
    return _from_strings(
        f"flat_torus_{dim}",
        _identity_strings(dim),
        _standard_acs_strings(n),
        "K",
        {"s": 0.0, "s_J": 0.0, "nsq_dF": 0.0, "nsq_N": 0.0, "s1": 0.0, "s2": 0.0},
        f"Flat Kaehler torus R^{dim}/Z^{dim}",
    )


_KT_COFRAME = (("1", "0", "0", "0"), ("0", "1", "0", "0"), ("0", "-x1", "1", "0"), ("0", "0", "0", "1"))


def kodaira_thurston() -> Manifold:
    """Almost Kaehler structure on the Kodaira-Thurston nilmanifold; J is not integrable."""
    acs = [["0", "x1", "-1", "0"], ["0", "0", "0", "-1"], ["1", "0", "0", "-x1"], ["0", "1", "0", "0"]]
    return _from_strings(
        "kodaira_thurston",
        coframe_metric(_KT_COFRAME),
        acs,
        "W2",
        {"s": -0.5, "nsq_dF": 0.0},
        "Kodaira-Thurston nilmanifold with an almost Kaehler structure",
    )


def kodaira_thurston_complex() -> Manifold:
    acs = [["0", "-1", "0", "0"], ["1", "0", "0", "0"], ["x1", "0", "0", "-1"], ["0", "-x1", "1", "0"]]
    return _from_strings(
        "kodaira_thurston_cplx",
        coframe_metric(_KT_COFRAME),
        acs,
        "W4",
        {"s": -0.5, "nsq_N": 0.0},
        "Kodaira-Thurston nilmanifold with an integrable structure",
    )


def iwasawa() -> Manifold:
    rows = (
        ("1", "0", "0", "0", "0", "0"),
        ("0", "1", "0", "0", "0", "0"),
        ("0", "-x1", "1", "0", "x4", "0"),
        ("0", "0", "0", "1", "0", "0"),
        ("0", "0", "0", "0", "1", "0"),
        ("0", "-x4", "0", "0", "-x1", "1"),
    )
    return _from_strings(
        "iwasawa",
        coframe_metric(rows, scale=2.0),
        _standard_acs_strings(3),
        "W3",
        {
            "s": -1.0,
            "nsq_dF": 2.0,
            "nsq_lee": 0.0,
            "s1@1": 0.0,
            "s2@1": 0.0,
            "bismut_gap": 2.0,
            "kgauduchon_k1": 1.0,
            "kgauduchon_k2": 0.0,
        },
        "Iwasawa manifold with its balanced left-invariant metric",
    )


def hopf(n: int) -> Manifold:
    dim = 2 * n
    radius_sq = " + ".join(f"x{i + 1}^2" for i in range(dim))
    metric = [
        [f"1/({radius_sq})" if a == b else "0" for b in range(dim)] for a in range(dim)
    ]
    chart = ExpressionStructure.from_strings(dim, metric, _standard_acs_strings(n))
    return Manifold(
        name=f"hopf_{n}",
        dim=dim,
        charts={"main": chart},
        domain=AnnulusDomain(dim),
        expected_class="W4",
        expected_scalars={
            "s": float((2 * n - 1) * (2 * n - 2)),
            "s_J": float(2 * (n - 1)),
            "nsq_lee": float(4 * (n - 1) ** 2),
            "delta_lee": 0.0,
        },
        homogeneous=True,
        description=f"Hopf manifold S^1 x S^{dim - 1} with the locally conformally flat metric",
    )


@functools.cache
def _octonion_tensor() -> NDArray[np.float64]:
    eps = np.zeros((7, 7, 7))
    for triple in _OCTONION_TRIPLES:
        i, j, k = (v - 1 for v in triple)
        for (a, b, c), sign in (
            ((i, j, k), 1), ((j, k, i), 1), ((k, i, j), 1),
            ((j, i, k), -1), ((i, k, j), -1), ((k, j, i), -1),
        ):
            eps[a, b, c] = sign
    return eps


def _cross_product_structure(position: TensorJet) -> TensorJet:
    """J_p(v) = p x v for the octonion cross product on R^7."""
    return jet_einsum("ijk,i->kj", _octonion_tensor(), position)


def s6_nearly_kaehler() -> Manifold:
    radius_sq = " + ".join(f"x{i + 1}^2" for i in range(6))
    denominator = f"(1 + {radius_sq})"
    planar = [f"2*x{i + 1}/{denominator}" for i in range(6)]
    south = embedded_structure(6, [*planar, f"({radius_sq} - 1)/{denominator}"], _cross_product_structure)
    north = embedded_structure(6, [*planar, f"(1 - ({radius_sq}))/{denominator}"], _cross_product_structure)
    return Manifold(
        name="s6_nearly_kaehler",
        dim=6,
        charts={"south": south, "north": north},
        domain=SphereDomain(6),
        expected_class="W1",
        expected_scalars={
            "s": 30.0,
            "s_J": 6.0,
            "nsq_dF": 36.0,
            "nsq_dF_minus": 36.0,
            "nsq_nablaF": 12.0,
            "s1": 0.0,
            "s2": 12.0,
        },
        homogeneous=True,
        description="Round S^6 with the nearly Kaehler structure from octonions",
    )


def _trig_polynomial(rng: np.random.Generator, dim: int, amplitude: float) -> str:
    terms = []
    for k in range(dim):
        coefficient = amplitude * rng.uniform(-1.0, 1.0)
        phase = rng.uniform(0.0, 2 * np.pi)
        terms.append(f"{coefficient:.6f}*sin(2*pi*x{k + 1} + {phase:.6f})")
    return " + ".join(terms)


def perturbed_torus(seed: int = _PERTURBATION_SEED, amplitude: float = PERTURBATION_AMPLITUDE) -> Manifold:
    """Generic structure: J0 conjugated by a small periodic matrix field, h averaged."""
    dim = 6
    rng = np.random.default_rng(seed)
    conjugator = [
        [
            (f"1 + {_trig_polynomial(rng, dim, amplitude)}" if a == b else _trig_polynomial(rng, dim, amplitude))
            for b in range(dim)
        ]
        for a in range(dim)
    ]
    bumps = [[_trig_polynomial(rng, dim, amplitude) for _ in range(dim)] for _ in range(dim)]
    metric0 = [
        [
            f"{'1 + ' if a == b else ''}({bumps[min(a, b)][max(a, b)]})"
            for b in range(dim)
        ]
        for a in range(dim)
    ]
    structure = ConjugatedStructure(
        dim,
        tuple(tuple(parse(s, dim) for s in row) for row in conjugator),
        tuple(tuple(parse(s, dim) for s in row) for row in metric0),
    )
    return Manifold(
        name="perturbed_torus",
        dim=dim,
        charts={"main": structure},
        domain=BoxDomain(box=((0.0, 1.0),) * dim, periodic=(True,) * dim),
        expected_class="W1+W2+W3+W4",
        homogeneous=False,
        description="Flat torus with a seeded perturbation of (h, J) in the general class",
    )


CATALOG: dict[str, Callable[[], Manifold]] = {
    "flat_torus_4": functools.partial(flat_torus, 2),
    "flat_torus_6": functools.partial(flat_torus, 3),
    "kodaira_thurston": kodaira_thurston,
    "kodaira_thurston_cplx": kodaira_thurston_complex,
    "iwasawa": iwasawa,
    "hopf_2": functools.partial(hopf, 2),
    "hopf_3": functools.partial(hopf, 3),
    "s6_nearly_kaehler": s6_nearly_kaehler,
    "perturbed_torus": perturbed_torus,
}


@functools.cache
def get_manifold(name: str) -> Manifold:
    try:
        builder = CATALOG[name]
    except KeyError:
        raise UnknownManifoldError(name, sorted(CATALOG)) from None
    return builder()


def list_manifolds() -> list[Manifold]:
    return [get_manifold(name) for name in CATALOG]


def export_spec(manifold: Manifold) -> ManifoldSpecFile:
    if manifold.spec_file is None:
        raise InputError(f"{manifold.name} has no single-chart expression form to export")
    return manifold.spec_file
