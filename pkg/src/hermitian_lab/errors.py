from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    import pydantic


class ApplicationError(Exception):
    pass


class InputError(ApplicationError):
    """Raised for malformed user input: spec files, expressions, options."""


class ExpressionSyntaxError(InputError):
    def __init__(self, source: str, offset: int, reason: str) -> None:
        self.source = source
        self.offset = offset
        self.reason = reason
        super().__init__(f"{reason} at byte offset {offset} in {source!r}")


class UnknownIdentifierError(InputError):
    def __init__(self, name: str, offset: int) -> None:
        self.name = name
        self.offset = offset
        super().__init__(f"Unknown identifier {name!r} at byte offset {offset}")


class IndexOutOfRangeError(InputError):
    def __init__(self, name: str, offset: int, dim: int) -> None:
        self.name = name
        self.offset = offset
        self.dim = dim
        super().__init__(
            f"Coordinate {name!r} at byte offset {offset} exceeds dimension {dim}"
        )


class SpecFileError(InputError):
    def __init__(self, detail: str, extensions: Any = None) -> None:
        self.detail = detail
        self.extensions = extensions
        super().__init__(detail)


class SpecValidationError(SpecFileError):
    def __init__(self, error: pydantic.ValidationError) -> None:
        super().__init__(detail=str(error), extensions=error.errors())


class UnknownManifoldError(InputError):
    def __init__(self, name: str, known: list[str]) -> None:
        self.name = name
        super().__init__(f"Unknown manifold {name!r}, expected one of {known}")


class DegenerateValueError(ApplicationError):
    """Raised when a jet function is evaluated outside its domain.

    Covers ``log`` and ``sqrt`` of non-positive values, division by zero and
    non-integer powers of non-positive bases.
    """

    def __init__(self, operation: str, value: float) -> None:
        self.operation = operation
        self.value = value
        super().__init__(f"{operation} is degenerate at {value!r}")


class OrderError(ApplicationError):
    def __init__(self, required: int, available: int) -> None:
        self.required = required
        self.available = available
        super().__init__(f"Jet order {required} required, only {available} available")


class DomainError(ApplicationError):
    def __init__(self, coords: Any, detail: str) -> None:
        self.coords = coords
        super().__init__(f"{detail}: {coords!r}")


class ChartError(ApplicationError):
    pass


class StructureError(ApplicationError):
    """Raised when (h, J) fails to be an almost Hermitian structure at a point,
    or when an operation needs a property the structure does not have."""

    def __init__(self, detail: str, residual: float | None = None) -> None:
        self.detail = detail
        self.residual = residual
        suffix = "" if residual is None else f" (residual {residual:.3e})"
        super().__init__(f"{detail}{suffix}")


class DegenerateFrameError(StructureError):
    def __init__(self, found: int, required: int) -> None:
        super().__init__(
            f"Adapted frame construction found {found} of {required} vector pairs"
        )


class HypothesisError(ApplicationError):
    """Raised when an integral theorem is requested outside its hypotheses."""

    def __init__(self, theorem: str, reason: str) -> None:
        self.theorem = theorem
        self.reason = reason
        super().__init__(f"{theorem}: {reason}")


class NoUsablePointsError(ApplicationError):
    """Raised when every sampled point of a manifold failed to evaluate."""

    def __init__(self, manifold: str, attempted: int) -> None:
        self.manifold = manifold
        self.attempted = attempted
        super().__init__(f"None of the {attempted} sample points of {manifold!r} could be evaluated")
