import inspect
import json
import logging
import pathlib
from io import StringIO
from typing import TYPE_CHECKING, Any

import numpy as np
import pytest

from hermitian_lab.log import (
    SUMMARY_THRESHOLD,
    configure_logging,
    json_custom_default,
    log_after_call,
    logger,
    logger_bind,
    summarise,
)
from hermitian_lab.schemas import ChartPoint
from hermitian_lab.suite import Stage

if TYPE_CHECKING:
    from collections.abc import Generator


class Integrator:
    @log_after_call
    def integrate(self, integrand: str) -> None:
        pass

    this_frame = inspect.currentframe()


def _lines(stream: StringIO) -> list[dict[str, Any]]:
    return [json.loads(line) for line in stream.getvalue().splitlines()]


@pytest.fixture
def buffer() -> Generator[StringIO]:
    stream = StringIO()
    handler = configure_logging(logging.DEBUG, stream)
    try:
        yield stream
    finally:
        logger.removeHandler(handler)
        logger.setLevel(logging.NOTSET)


@pytest.mark.parametrize(
    ("value", "expected"),
    [
        (np.array([[1.0, 2.0], [3.0, 4.0]]), [[1.0, 2.0], [3.0, 4.0]]),
        (np.float64(0.5), 0.5),
        (np.int64(3), 3),
        (np.bool_(True), True),
        (1.0 + 2.0j, [1.0, 2.0]),
        (np.complex128(0.5 - 1j), [0.5, -1.0]),
        ({"W3", "W1"}, ["W1", "W3"]),
        (frozenset({"W4"}), ["W4"]),
        (pathlib.PurePosixPath("spec.json"), "spec.json"),
        (Stage.SCALARS, "scalars"),
        (ChartPoint(coords=(0.1, 0.2)), {"coords": [0.1, 0.2], "chart_id": "main"}),
    ],
)
def test_json_custom_default(value: object, expected: object) -> None:
    assert json_custom_default(value) == expected


def test_json_custom_default_rejects_unknown() -> None:
    with pytest.raises(TypeError, match="object is not JSON serialisable"):
        json_custom_default(object())


def test_unserialisable_record_is_dropped(buffer: StringIO) -> None:
    logger.info("check", extra={"key": object()})
    assert buffer.getvalue() == ""


def test_summarise() -> None:
    small = np.zeros(SUMMARY_THRESHOLD)
    assert summarise(small) is small
    assert summarise(np.zeros((6, 6, 6))) == {"shape": [6, 6, 6], "dtype": "float64"}
    assert summarise(list(range(SUMMARY_THRESHOLD + 1))) == {"length": SUMMARY_THRESHOLD + 1}
    assert summarise("W3") == "W3"


def test_bound_fields(buffer: StringIO) -> None:
    with logger_bind(point=ChartPoint(coords=(0.1, 0.2)), manifold="iwasawa"):
        logger.info("point_failed", extra={"t_values": np.array([0.5, 1.0])})
    (record,) = _lines(buffer)
    assert record["message"] == "point_failed"
    assert record["point"] == {"coords": [0.1, 0.2], "chart_id": "main"}
    assert record["manifold"] == "iwasawa"
    assert record["t_values"] == [0.5, 1.0]


def test_nested_bind_restores_outer_context(buffer: StringIO) -> None:
    with logger_bind(manifold="iwasawa"):
        with logger_bind(t=0.5):
            logger.info("inner")
        logger.info("outer")
    inner, outer = _lines(buffer)
    assert inner["manifold"] == outer["manifold"] == "iwasawa"
    assert inner["t"] == 0.5
    assert "t" not in outer


def test_exception_text(buffer: StringIO) -> None:
    try:
        np.linalg.inv(np.zeros((2, 2)))
    except np.linalg.LinAlgError:
        logger.exception("singular", stack_info=True)
    (record,) = _lines(buffer)
    assert "LinAlgError" in record["exc_text"]
    assert record["stack_info"]


def test_log_after_call_method(buffer: StringIO) -> None:
    assert Integrator.this_frame
    Integrator().integrate("s_minus_sJ")
    (record,) = _lines(buffer)
    assert record["message"] == "call"
    assert record["function"] == {
        "name": "Integrator.integrate",
        "module": __name__,
        "pathname": __file__,
        "firstlineno": Integrator.this_frame.f_lineno - 4,
    }
    assert record["arguments"] == {"integrand": "s_minus_sJ"}
    assert record["exc_str"] is None
    assert record["duration"] >= 0


def test_log_after_call_excluded_fields_and_extractor(buffer: StringIO) -> None:
    @log_after_call(
        log_message="classified",
        excluded_fields={"bundles"},
        result_extractor=lambda label: {"label": label},
    )
    def classify(bundles: list[float], tol: float = 1e-12) -> str:
        return "W3"

    classify([1.0, 2.0])
    (record,) = _lines(buffer)
    assert record["message"] == "classified"
    assert record["arguments"] == {"tol": 1e-12}
    assert record["label"] == "W3"


def test_log_after_call_summarises_arguments(buffer: StringIO) -> None:
    @log_after_call(result_extractor=True)
    def total(values: np.ndarray) -> np.ndarray:
        return values * 2

    total(np.ones(100))
    (record,) = _lines(buffer)
    assert record["arguments"] == {"values": {"shape": [100], "dtype": "float64"}}
    assert record["result"] == {"shape": [100], "dtype": "float64"}


@pytest.mark.parametrize(("log_exceptions", "level", "exc_str"), [(True, "ERROR", "degenerate"), (False, "INFO", None)])
def test_log_after_call_exception(
    buffer: StringIO, log_exceptions: bool, level: str, exc_str: str | None
) -> None:
    @log_after_call(log_exceptions=log_exceptions)
    def evaluate() -> None:
        raise ArithmeticError("degenerate")

    with pytest.raises(ArithmeticError):
        evaluate()
    (record,) = _lines(buffer)
    assert record["levelname"] == level
    assert record["exc_str"] == exc_str


def test_configure_logging_level() -> None:
    stream = StringIO()
    handler = configure_logging("WARNING", stream)
    try:
        logger.info("hidden")
        logger.warning("shown", extra={"value": np.float64(2.0)})
    finally:
        logger.removeHandler(handler)
        logger.setLevel(logging.NOTSET)
    (record,) = _lines(stream)
    assert record["message"] == "shown"
    assert record["value"] == 2.0
