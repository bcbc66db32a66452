"""
Remote Localizer

Client for an OpenAI-compatible chat-completions endpoint serving a
vision-language model (vLLM, SGLang, hosted APIs).

One request per frame: a single user message holding the instruction text,
the template image and the frame image, in that order, images as base64 PNG
data URLs. Transport faults are retried with exponential backoff; answers the
parser cannot read are returned as-is and never retried.

Usage:
    from app.localizer import RemoteLocalizer
    from app.schemas.localizer import EndpointConfig

    with RemoteLocalizer(EndpointConfig.from_settings()) as localizer:
        response = localizer.localize(request)
"""

import base64
import io
import json
import threading
import time
from typing import Callable, Optional

import httpx
from PIL import Image
from tenacity import (
    RetryCallState,
    Retrying,
    retry_if_exception,
    stop_after_attempt,
    wait_exponential,
)

from app.core.errors import LocalizerTimeoutError, LocalizerTransportError
from app.core.logging import get_logger
from app.localizer.base import Localizer
from app.localizer.parser import parse_box
from app.schemas.localizer import (
    EndpointConfig,
    LocalizerRequest,
    LocalizerResponse,
    ParseFailure,
)

logger = get_logger(__name__)

RETRYABLE_STATUS = {408, 429}


def to_data_url(image: Image.Image) -> str:
    """Lossless PNG data URL; identical pixels give identical strings."""
    buffer = io.BytesIO()
    image.save(buffer, format="PNG")
    return "data:image/png;base64," + base64.b64encode(buffer.getvalue()).decode("ascii")


def build_payload(request: LocalizerRequest, endpoint: EndpointConfig) -> dict:
    """Chat-completions body for one query."""
    payload = {
        "model": endpoint.model,
        "messages": [
            {
                "role": "user",
                "content": [
                    {"type": "text", "text": request.instruction},
                    {"type": "image_url", "image_url": {"url": to_data_url(request.template)}},
                    {"type": "image_url", "image_url": {"url": to_data_url(request.frame)}},
                ],
            }
        ],
    }
    if endpoint.temperature is not None:
        payload["temperature"] = endpoint.temperature
    return payload


def encode_payload(request: LocalizerRequest, endpoint: EndpointConfig) -> bytes:
    """Byte-stable JSON encoding of the request body (no auth material)."""
    body = build_payload(request, endpoint)
    return json.dumps(body, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def extract_content(envelope: dict) -> str:
    """
    Text of the first choice.

    Raises:
        KeyError, IndexError, TypeError: On a malformed envelope
    """
    content = envelope["choices"][0]["message"]["content"]
    if content is None:
        return ""
    if isinstance(content, list):
        # Some servers return content parts even for plain text answers
        return "".join(part.get("text", "") for part in content if isinstance(part, dict))
    if not isinstance(content, str):
        raise TypeError(f"unexpected content type {type(content).__name__}")
    return content


def is_retryable(error: BaseException) -> bool:
    """Timeouts, network errors, 408/429 and 5xx are worth another attempt."""
    if isinstance(error, LocalizerTimeoutError):
        return True
    if isinstance(error, LocalizerTransportError):
        code = error.status_code
        return code is None or code in RETRYABLE_STATUS or code >= 500
    return False


class RemoteLocalizer(Localizer):
    """
    Thread-safe chat-completions client.

    A bounded semaphore caps in-flight HTTP calls across every worker sharing
    this instance. `client` and `sleep` are injectable for tests.
    """

    name = "remote"

    def __init__(
        self,
        endpoint: EndpointConfig,
        client: Optional[httpx.Client] = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint
        self._owns_client = client is None
        self._client = client or httpx.Client(timeout=endpoint.timeout)
        self._slots = threading.BoundedSemaphore(endpoint.max_in_flight)
        self._sleep = sleep

    def close(self) -> None:
        if self._owns_client:
            self._client.close()

    # ===== Wire =====

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.endpoint.api_key is not None:
            headers["Authorization"] = f"Bearer {self.endpoint.api_key.get_secret_value()}"
        return headers

    def _post_once(self, body: bytes) -> str:
        try:
            with self._slots:
                response = self._client.post(
                    self.endpoint.chat_url,
                    content=body,
                    headers=self._headers(),
                    timeout=self.endpoint.timeout,
                )
        except httpx.TimeoutException as e:
            raise LocalizerTimeoutError(
                f"no answer from {self.endpoint.chat_url} within {self.endpoint.timeout}s"
            ) from e
        except httpx.HTTPError as e:
            raise LocalizerTransportError(f"request to {self.endpoint.chat_url} failed: {e}") from e

        if response.status_code >= 400:
            raise LocalizerTransportError(
                f"endpoint answered HTTP {response.status_code}",
                status_code=response.status_code,
                raw_body=response.text,
            )

        try:
            return extract_content(response.json())
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise LocalizerTransportError(
                f"malformed chat-completion envelope: {e}",
                status_code=response.status_code,
                raw_body=response.text,
            ) from e

    def _log_retry(self, state: RetryCallState) -> None:
        error = state.outcome.exception() if state.outcome else None
        logger.warning(
            "localizer_retry",
            attempt=state.attempt_number,
            delay=state.next_action.sleep if state.next_action else None,
            status=getattr(error, "status_code", None),
            error=str(error),
        )

    def _send(self, body: bytes) -> str:
        backoff = self.endpoint.backoff_seconds
        retrying = Retrying(
            stop=stop_after_attempt(self.endpoint.max_attempts),
            wait=wait_exponential(multiplier=backoff, min=backoff, max=backoff * 4),
            retry=retry_if_exception(is_retryable),
            before_sleep=self._log_retry,
            sleep=self._sleep,
            reraise=True,
        )
        for attempt in retrying:
            with attempt:
                return self._post_once(body)
        raise AssertionError("unreachable")  # pragma: no cover

    # ===== Localizer =====

    def localize(self, request: LocalizerRequest) -> LocalizerResponse:
        """
        Query the endpoint and parse the answer.

        Raises:
            LocalizerTimeoutError: Every attempt timed out
            LocalizerTransportError: Network/HTTP failure after retries, or a
                non-retryable status / malformed envelope
        """
        body = encode_payload(request, self.endpoint)
        started = time.perf_counter()
        raw_text = self._send(body)
        latency_ms = (time.perf_counter() - started) * 1000.0

        parsed = parse_box(raw_text, request.frame_size)
        if isinstance(parsed, ParseFailure):
            logger.info(
                "parse_failure",
                sequence=request.sequence_name,
                frame=request.frame_index,
                reason=parsed.reason,
                excerpt=raw_text[:200],
            )
            return LocalizerResponse(raw_text=raw_text, failure=parsed.reason, latency_ms=latency_ms)
        return LocalizerResponse(raw_text=raw_text, box=parsed, latency_ms=latency_ms)
