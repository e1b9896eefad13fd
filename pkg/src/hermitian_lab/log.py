"""Package logger with context-bound fields and JSON output.

Fields bound with ``logger_bind`` ride along on every record emitted inside
the block, including records from worker threads that copied the context.
"""

import annotationlib
import contextlib
import contextvars
import inspect
import json
import logging
import pathlib
import time
from dataclasses import dataclass
from enum import Enum
from functools import wraps
from typing import TYPE_CHECKING, Any, TextIO, overload

import numpy as np
import pydantic

if TYPE_CHECKING:
    from collections.abc import Callable, Generator, Iterable, Mapping

LOGGING_CTX: contextvars.ContextVar[dict[str, Any]] = contextvars.ContextVar("LOGGING_CTX")

# arrays and point lists above this size are logged by shape only
SUMMARY_THRESHOLD = 16

logger = logging.getLogger(__name__)


@contextlib.contextmanager
def logger_bind(**fields: Any) -> Generator[None]:
    token = LOGGING_CTX.set({**LOGGING_CTX.get({}), **fields})
    try:
        yield
    finally:
        LOGGING_CTX.reset(token)


class _BoundFields(logging.Filter):
    def filter(self, record: logging.LogRecord) -> bool:
        record.__dict__.update(LOGGING_CTX.get({}))
        return True


logger.addFilter(_BoundFields())


def json_custom_default(value: Any) -> Any:
    """``json.dumps`` fallback for report models and numpy values."""
    match value:
        case pydantic.BaseModel():
            return value.model_dump(mode="json")
        case np.ndarray():
            return value.tolist()
        case np.integer() | np.floating() | np.bool_():
            return value.item()
        case complex() | np.complexfloating():
            return [value.real, value.imag]
        case pathlib.PurePath() | Enum():
            return str(value)
        case set() | frozenset():
            return sorted(value)
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


def summarise(value: Any) -> Any:
    """Large arrays and point lists shrink to their shape before logging."""
    match value:
        case np.ndarray() if value.size > SUMMARY_THRESHOLD:
            return {"shape": list(value.shape), "dtype": str(value.dtype)}
        case list() | tuple() if len(value) > SUMMARY_THRESHOLD:
            return {"length": len(value)}
    return value


@dataclass(frozen=True, slots=True)
class _CallSite:
    signature: inspect.Signature
    function: dict[str, Any]
    excluded: frozenset[str]

    @classmethod
    def of(cls, func: Callable[..., Any], excluded: Iterable[str]) -> _CallSite:
        return cls(
            signature=inspect.signature(func, annotation_format=annotationlib.Format.STRING),
            function={
                "name": func.__qualname__,
                "module": func.__module__,
                "pathname": func.__code__.co_filename,
                "firstlineno": func.__code__.co_firstlineno,
            },
            excluded=frozenset(excluded),
        )

    def arguments(self, args: tuple[Any, ...], kwargs: Mapping[str, Any]) -> dict[str, Any]:
        bound = self.signature.bind(*args, **kwargs)
        bound.apply_defaults()
        return {
            name: summarise(value)
            for name, value in bound.arguments.items()
            if name not in self.excluded
        }


def _result_field[T](result: T) -> dict[str, Any]:
    return {"result": summarise(result)}


@overload
def log_after_call[**P, T](func: Callable[P, T]) -> Callable[P, T]: ...


@overload
def log_after_call[**P, T](
    *,
    log_level: int = logging.INFO,
    log_message: str = "call",
    log_exceptions: bool = False,
    excluded_fields: Iterable[str] = ("self",),
    result_extractor: Callable[[T], dict[str, Any]] | bool = False,
) -> Callable[[Callable[P, T]], Callable[P, T]]: ...


def log_after_call[**P, T](  # noqa: PLR0913
    func: Callable[P, T] | None = None,
    log_level: int = logging.INFO,
    log_message: str = "call",
    log_exceptions: bool = False,
    excluded_fields: Iterable[str] = ("self",),
    result_extractor: Callable[[T], dict[str, Any]] | bool = False,
) -> Callable[P, T] | Callable[[Callable[P, T]], Callable[P, T]]:
    """Log one record per call with its arguments, duration and optional result fields.

    A raised exception is logged at ERROR with its text when ``log_exceptions``
    is set, otherwise at ``log_level`` with ``exc_str`` left empty.
    """
    extract: Callable[[T], dict[str, Any]] | None
    if callable(result_extractor):
        extract = result_extractor
    else:
        extract = _result_field if result_extractor else None

    def decorator(func: Callable[P, T]) -> Callable[P, T]:
        site = _CallSite.of(func, excluded_fields)

        @wraps(func)
        def wrapper(*args: P.args, **kwargs: P.kwargs) -> T:
            extra: dict[str, Any] = {
                "function": site.function,
                "arguments": site.arguments(args, kwargs),
                "exc_str": None,
            }
            level = log_level
            started = time.monotonic()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                if log_exceptions:
                    extra["exc_str"] = str(e)
                    level = logging.ERROR
                raise
            else:
                if extract is not None:
                    extra.update(extract(result))
                return result
            finally:
                extra["duration"] = time.monotonic() - started
                logger.log(level, log_message, exc_info=level == logging.ERROR, extra=extra)

        return wrapper

    return decorator if func is None else decorator(func)


_DROPPED_RECORD_FIELDS = frozenset({"exc_info", "args", "msg"})


class JsonFormatter(logging.Formatter):
    """One JSON object per record, bound context and ``extra`` fields included."""

    def format(self, record: logging.LogRecord) -> str:
        record.message = record.getMessage()
        if record.exc_info and record.exc_text is None:
            record.exc_text = self.formatException(record.exc_info)
        if record.stack_info:
            record.stack_info = self.formatStack(record.stack_info)
        payload = {k: v for k, v in vars(record).items() if k not in _DROPPED_RECORD_FIELDS}
        return json.dumps(payload, default=json_custom_default)


def configure_logging(level: int | str, stream: TextIO | None = None) -> logging.Handler:
    """Attach a JSON handler to the package logger; the caller removes it when done."""
    handler = logging.StreamHandler(stream)
    handler.setFormatter(JsonFormatter())
    logger.addHandler(handler)
    logger.setLevel(level)
    return handler
