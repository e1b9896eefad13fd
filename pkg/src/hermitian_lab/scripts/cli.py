import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING

import pydantic

from hermitian_lab.errors import InputError, NoUsablePointsError
from hermitian_lab.log import configure_logging, json_custom_default, log_after_call, logger
from hermitian_lab.schemas import RunConfig
from hermitian_lab.suite import ALL_STAGES, Stage, build_report, load_manifolds, run_manifold
from hermitian_lab.version import __version__
from hermitian_lab.zoo import CATALOG, export_spec, get_manifold

if TYPE_CHECKING:
    from collections.abc import Sequence

    from hermitian_lab.schemas import Report

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2

_STAGES = {
    "verify": ALL_STAGES,
    "scalars": frozenset({Stage.SCALARS}),
    "integrate": frozenset({Stage.INTEGRALS}),
    "classify": frozenset(),
}

_CSV_FIELDS = (
    "manifold",
    "kind",
    "name",
    "chart",
    "coords",
    "t",
    "lhs",
    "rhs",
    "abs_err",
    "rel_err",
    "status",
    "detail",
)


def _float_list(text: str) -> list[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from e


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hermitian-lab",
        description="Check curvature identities and integral theorems on almost Hermitian manifolds",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--log-level", default="WARNING")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("list", help="list the catalog manifolds")

    export = commands.add_parser("export", help="print the spec file of a catalog manifold")
    export.add_argument("--manifold", required=True)
    export.add_argument("--out", type=Path)

    for name, help_text in (
        ("verify", "pointwise identities, integrals and sign theorems"),
        ("scalars", "scalar curvatures and norms per point"),
        ("integrate", "integrals and sign theorems"),
        ("classify", "Gray-Hervella class over the sampled points"),
    ):
        sub = commands.add_parser(name, help=help_text)
        source = sub.add_mutually_exclusive_group(required=True)
        source.add_argument("--manifold", help="catalog name, or 'all'")
        source.add_argument("--spec", type=Path, help="JSON manifold spec file")
        sub.add_argument("--points", type=int)
        sub.add_argument("--seed", type=int)
        sub.add_argument(
            "--t", dest="t_values", type=_float_list, action="extend", help="comma separated, repeatable"
        )
        sub.add_argument(
            "--integrand",
            dest="integrands",
            action="append",
            help="integrand name, e.g. s_minus_sJ or kgauduchon:k=2; replaces the default set",
        )
        sub.add_argument("--tol-abs", type=float)
        sub.add_argument("--tol-rel", type=float)
        sub.add_argument("--classify-tol", type=float)
        sub.add_argument(
            "--sigmas", dest="quadrature_sigmas", type=float, help="standard errors allowed in integral comparisons"
        )
        sub.add_argument("--workers", dest="max_workers", type=int)
        sub.add_argument("--out", type=Path)
        sub.add_argument("--format", choices=("json", "csv"))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Command line values over ``HERMITIAN_LAB_*`` environment values over defaults."""
    fields = {
        key: value
        for key, value in vars(args).items()
        if key in RunConfig.model_fields and value is not None
    }
    try:
        return RunConfig(**fields)
    except pydantic.ValidationError as e:
        raise InputError(str(e)) from e


def _csv_rows(report: Report) -> list[dict[str, object]]:
    rows: list[dict[str, object]] = []
    for m in report.manifolds:
        if m.classification is not None:
            rows.append(
                {
                    "manifold": m.manifold,
                    "kind": "class",
                    "name": m.classification.label,
                    "status": {True: "passed", False: "failed", None: ""}[m.classification.matches],
                    "detail": m.classification.expected,
                }
            )
        for r in m.results:
            rows.append(
                {
                    "manifold": m.manifold,
                    "kind": "identity",
                    "name": r.identity,
                    "chart": r.point.chart_id if r.point else "",
                    "coords": " ".join(f"{c:.17g}" for c in r.point.coords) if r.point else "",
                    "t": r.t,
                    "lhs": r.lhs,
                    "rhs": r.rhs,
                    "abs_err": r.abs_err,
                    "rel_err": r.rel_err,
                    "status": "passed" if r.passed else "failed",
                    "detail": r.error,
                }
            )
        for s in m.scalars:
            for key, value in (("s", s.s), ("s_J", s.s_J), *s.norms.model_dump().items()):
                rows.append(
                    {
                        "manifold": m.manifold,
                        "kind": "scalar",
                        "name": key,
                        "chart": s.point.chart_id,
                        "coords": " ".join(f"{c:.17g}" for c in s.point.coords),
                        "lhs": value,
                    }
                )
        for e in m.integrals:
            rows.append(
                {
                    "manifold": m.manifold,
                    "kind": "integral",
                    "name": e.integrand,
                    "t": e.t,
                    "lhs": e.value,
                    "abs_err": e.std_error,
                    "detail": e.method,
                }
            )
        for th in m.theorems:
            rows.append(
                {
                    "manifold": m.manifold,
                    "kind": "theorem",
                    "name": th.theorem,
                    "t": th.t,
                    "lhs": th.integral.value if th.integral else None,
                    "rhs": th.closed_form_integral.value if th.closed_form_integral else None,
                    "status": th.status,
                    "detail": th.reason or th.diagnosis,
                }
            )
    return rows


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return report.model_dump_json(indent=2, by_alias=True)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=_CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(_csv_rows(report))
    return buffer.getvalue()


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text)


def _list() -> int:
    entries = []
    for name in CATALOG:
        manifold = get_manifold(name)
        entries.append(
            {
                "name": manifold.name,
                "dim": manifold.dim,
                "expected_class": manifold.expected_class,
                "homogeneous": manifold.homogeneous,
                "description": manifold.description,
            }
        )
    _emit(json.dumps(entries, indent=2, default=json_custom_default), None)
    return EXIT_PASS


def _export(args: argparse.Namespace) -> int:
    spec = export_spec(get_manifold(args.manifold))
    _emit(spec.model_dump_json(indent=2, by_alias=True), args.out)
    return EXIT_PASS


@log_after_call(log_level=logging.INFO, log_message="run")
def run(command: str, config: RunConfig) -> Report:
    stages = _STAGES[command]
    return build_report(config, [run_manifold(m, config, stages) for m in load_manifolds(config)])


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    handler = configure_logging(args.log_level.upper(), sys.stderr)
    try:
        if args.command == "list":
            return _list()
        if args.command == "export":
            return _export(args)
        config = config_from_args(args)
        report = run(args.command, config)
        _emit(render(report, config.format), config.out)
        return EXIT_PASS if report.passed else EXIT_FAIL
    except InputError as e:
        logger.error("input_error", extra={"exc_str": str(e)})
        sys.stderr.write(f"hermitian-lab: {e}\n")
        return EXIT_INPUT
    except NoUsablePointsError as e:
        logger.error("run_error", extra={"exc_str": str(e)})
        sys.stderr.write(f"hermitian-lab: {e}\n")
        return EXIT_FAIL
    finally:
        logger.removeHandler(handler)


if __name__ == "__main__":
    raise SystemExit(main())
