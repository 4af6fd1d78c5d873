class SemigraphError(Exception):
    """Base class for all package errors."""


class ConversionError(SemigraphError):
    def __init__(self, message: str, lineno: int | None = None):
        super().__init__(message)
        self.lineno = lineno


class FormatError(SemigraphError):
    """On-disk data disagrees with the index or the format definition."""


class ContractViolation(SemigraphError):
    """A caller broke an API precondition (unsorted batch, bad payload, ...)."""


class PageCacheError(SemigraphError):
    """A backing-file read failed; ``requests`` lists the affected requests."""

    def __init__(self, message: str, requests=()):
        super().__init__(message)
        self.requests = list(requests)


class EngineError(SemigraphError):
    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class OracleSizeError(SemigraphError):
    """Graph too large for a reference implementation."""
