import annotationlib
import contextvars
import inspect
from concurrent.futures import ThreadPoolExecutor
from functools import wraps
from typing import TYPE_CHECKING, Any

from opentelemetry.trace import format_span_id, format_trace_id, get_current_span

from hermitian_lab.log import logger, logger_bind

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence
    from contextlib import AbstractContextManager

    from hermitian_lab.schemas import ChartPoint


def context_manager_middleware[**P, T](
    cm: Callable[P, AbstractContextManager[Any]],
) -> Callable[[Callable[P, T]], Callable[P, T]]:
    def decorator(func: Callable[P, T]) -> Callable[P, T]:
        @wraps(func)
        def wrapper(*args: P.args, **kwargs: P.kwargs) -> T:
            with cm(*args, **kwargs):
                return func(*args, **kwargs)

        return wrapper

    return decorator


def traced_logger_bind(**kwargs: Any) -> AbstractContextManager[None]:
    """``logger_bind`` plus the ids of the current span, when one is recording."""
    ctx = get_current_span().get_span_context()
    return logger_bind(
        **kwargs,
        trace_id=format_trace_id(ctx.trace_id),
        span_id=format_span_id(ctx.span_id),
        trace_sampled=ctx.trace_flags.sampled,
    )


def manifold_run[**P, T](
    func: Callable[P, T],
) -> Callable[P, T]:
    """Bind the manifold name of the first argument to every log record of the run."""
    sig = inspect.signature(func, annotation_format=annotationlib.Format.STRING)
    first = next(iter(sig.parameters))

    def bind_extractor(*args: P.args, **kwargs: P.kwargs) -> AbstractContextManager[None]:
        manifold = sig.bind(*args, **kwargs).arguments[first]
        return traced_logger_bind(manifold=getattr(manifold, "name", str(manifold)))

    return context_manager_middleware(bind_extractor)(func)


def parallel_points[T](
    *,
    max_workers: int,
    on_error: Callable[[ChartPoint, Exception], T],
) -> Callable[[Callable[[ChartPoint], T]], Callable[[Sequence[ChartPoint]], list[T]]]:
    """Fan a per-point function out over a thread pool.

    A point whose evaluation raises is turned into ``on_error(point, exc)`` and
    the remaining points still run. The logging context of the caller is
    copied into every worker.
    """

    def decorator(
        func: Callable[[ChartPoint], T],
    ) -> Callable[[Sequence[ChartPoint]], list[T]]:
        def single_point_processor(ctx: contextvars.Context, point: ChartPoint) -> T:
            try:
                return ctx.run(func, point)
            except Exception as e:
                logger.warning(
                    "point_failed",
                    extra={"point": point, "exc_str": str(e)},
                )
                return on_error(point, e)

        @wraps(func)
        def wrapper(points: Sequence[ChartPoint]) -> list[T]:
            with ThreadPoolExecutor(max_workers=max_workers) as executor:
                return list(
                    executor.map(
                        single_point_processor,
                        [contextvars.copy_context() for _ in points],
                        points,
                    )
                )

        return wrapper

    return decorator
