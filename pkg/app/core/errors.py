"""
Harness Exceptions

Every failure the harness reports on purpose derives from HarnessError so the
CLI can map it to an exit code. Localizer parse failures are NOT exceptions;
they travel as ParseFailure values (see app.schemas.localizer).
"""

from typing import Optional


class HarnessError(Exception):
    """Base class for all harness errors."""


class ConfigError(HarnessError):
    """Invalid run configuration (maps to exit code 2)."""


class DataError(HarnessError):
    """
    Malformed or missing input data.

    Carries the offending file and, when known, the 1-based line number.
    """

    def __init__(self, path, reason: str, line: Optional[int] = None):
        self.path = str(path)
        self.line = line
        self.reason = reason
        location = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{location}: {reason}")


class SplitLoadError(HarnessError):
    """A dataset split could not be loaded at all (e.g. no sequences)."""


class DegenerateBoxError(HarnessError, ValueError):
    """An operation that needs a box with positive area got a degenerate one."""


class EmptyCropError(HarnessError, ValueError):
    """Crop region has no pixels inside the image."""

    def __init__(self, message: str = "empty crop"):
        super().__init__(message)


class LocalizerError(HarnessError):
    """A localizer call failed after retries. The raw response body is kept."""

    def __init__(self, message: str, raw_body: Optional[str] = None):
        self.raw_body = raw_body
        super().__init__(message)


class LocalizerTransportError(LocalizerError):
    """Network failure, HTTP error status, or malformed response envelope."""

    def __init__(self, message: str, status_code: Optional[int] = None,
                 raw_body: Optional[str] = None):
        self.status_code = status_code
        super().__init__(message, raw_body=raw_body)


class LocalizerTimeoutError(LocalizerError):
    """The endpoint did not answer within the configured timeout."""


class EvaluationError(HarnessError):
    """Results and ground truth cannot be matched for a sequence."""

    def __init__(self, sequence: str, reason: str):
        self.sequence = sequence
        super().__init__(f"{sequence}: {reason}")
