"""
Localizer Interface

A localizer answers one (template, frame, instruction) query with a box.
Backends must tolerate concurrent localize() calls from several sequence
workers.
"""

from abc import ABC, abstractmethod

from app.schemas.localizer import LocalizerRequest, LocalizerResponse


class Localizer(ABC):
    """
    Backend interface.

    localize() returns a LocalizerResponse for every answer the backend got,
    including unparsable ones (response.box is None). Transport problems that
    survive retries raise LocalizerTransportError / LocalizerTimeoutError.
    """

    name: str = "localizer"

    @abstractmethod
    def localize(self, request: LocalizerRequest) -> LocalizerResponse:
        ...

    def close(self) -> None:
        """Release network resources; no-op for offline backends."""

    def __enter__(self) -> "Localizer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
