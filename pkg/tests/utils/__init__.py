import pydantic_settings

from hermitian_lab.manifold import Manifold, manifold_from_spec
from hermitian_lab.schemas import ChartPoint, DomainSpec, ManifoldSpecFile
from hermitian_lab.tensors import standard_complex_structure


class TestSettings(pydantic_settings.BaseSettings):
    model_config = pydantic_settings.SettingsConfigDict(env_prefix="HERMITIAN_LAB_TEST_")

    POINTS: int = 6
    SEED: int = 11
    TOL_ABS: float = 1e-8
    TOL_REL: float = 1e-6


settings = TestSettings()


def standard_acs_rows(n: int) -> list[list[str]]:
    return [[f"{v:g}" for v in row] for row in standard_complex_structure(n)]


def conformal_spec(dim: int, factor: str, name: str, half_width: float = 0.5) -> ManifoldSpecFile:
    """h = factor * delta with the standard J on a box around the origin."""
    return ManifoldSpecFile(
        dim=dim,
        metric=[[factor if a == b else "0" for b in range(dim)] for a in range(dim)],
        J=standard_acs_rows(dim // 2),
        domain=DomainSpec(periodic=[False] * dim, box=[(-half_width, half_width)] * dim),
        name=name,
    )


def round_sphere_chart(dim: int) -> Manifold:
    """Unit sphere in stereographic coordinates; Hermitian and conformally flat."""
    radius_sq = " + ".join(f"x{i + 1}^2" for i in range(dim))
    return manifold_from_spec(conformal_spec(dim, f"4/(1 + {radius_sq})^2", f"sphere_{dim}"))


def twisted_product(dim: int = 4) -> Manifold:
    """A Hermitian metric with a non-constant conformal factor in one direction."""
    return manifold_from_spec(conformal_spec(dim, "exp(x1 + 0.3*x2^2)", "twisted"))


def point(*coords: float, chart_id: str = "main") -> ChartPoint:
    return ChartPoint(coords=coords, chart_id=chart_id)
