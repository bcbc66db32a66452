"""
Localizer Schemas

What goes to a localizer backend, what comes back, and how to reach the
remote endpoint.
"""

from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, SecretStr, model_validator

from app.schemas.geometry import BBox, ImageSize


class LocalizerRequest(BaseModel):
    """
    The (T, L', I_t') triple for one frame.

    sequence_name / frame_index identify the frame for offline backends
    (oracle, scripted replay); the remote backend ignores them.
    """
    template: Any
    frame: Any
    instruction: str = Field(..., min_length=1)
    frame_size: ImageSize
    sequence_name: Optional[str] = None
    frame_index: Optional[int] = None  # 1-based
    # Offset of `frame` inside the full frame (non-zero for local-crop queries)
    frame_origin: tuple[int, int] = (0, 0)

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @model_validator(mode="after")
    def non_empty_images(self) -> "LocalizerRequest":
        for label, image in (("template", self.template), ("frame", self.frame)):
            if image is None or image.width < 1 or image.height < 1:
                raise ValueError(f"{label} image must be non-empty")
        return self


class ParseFailure(BaseModel):
    """No usable box could be read from the model output."""
    reason: str

    model_config = ConfigDict(frozen=True)


class LocalizerResponse(BaseModel):
    """Raw model text plus the box parsed (and clamped) from it."""
    raw_text: str
    box: Optional[BBox] = None
    failure: Optional[str] = None
    latency_ms: float = 0.0

    model_config = ConfigDict(frozen=True)

    @property
    def parsed(self) -> bool:
        return self.box is not None


class EndpointConfig(BaseModel):
    """Connection and retry settings for the remote chat-completions endpoint."""
    base_url: str = Field(..., min_length=1)
    model: str = Field(..., min_length=1)
    api_key: Optional[SecretStr] = Field(None, exclude=True)
    timeout: float = Field(120.0, gt=0)
    max_attempts: int = Field(3, ge=1)
    backoff_seconds: float = Field(0.5, ge=0)
    temperature: Optional[float] = 0.0
    max_in_flight: int = Field(4, ge=1)

    @property
    def chat_url(self) -> str:
        return self.base_url.rstrip("/") + "/chat/completions"

    @classmethod
    def from_settings(cls, **overrides) -> "EndpointConfig":
        from app.config import settings

        values = {
            "base_url": settings.LOCALIZER_BASE_URL,
            "model": settings.LOCALIZER_MODEL,
            "api_key": settings.LOCALIZER_API_KEY,
            "timeout": settings.LOCALIZER_TIMEOUT,
            "max_attempts": settings.LOCALIZER_MAX_ATTEMPTS,
            "backoff_seconds": settings.LOCALIZER_BACKOFF_SECONDS,
            "temperature": settings.LOCALIZER_TEMPERATURE,
            "max_in_flight": settings.LOCALIZER_MAX_IN_FLIGHT,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class TranscriptRecord(BaseModel):
    """One line of a transcript log; also the replay script format."""
    sequence: str
    frame_index: int  # 1-based
    raw_text: str
    box: Optional[list[float]] = None
    latency_ms: float = 0.0
    failure: Optional[str] = None
    prompt_box: Optional[list[float]] = None  # rectangle actually drawn
    prompt_clause: bool = False
    search_mode: str = "global"
    source_digest: Optional[str] = None
    request_digest: Optional[str] = None
    prediction: Optional[list[float]] = None
