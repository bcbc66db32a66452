"""
Tracker Schemas

Recursive tracker state, per-run tracking configuration, and the per-step
record handed to observers (transcript writer, trace dumper).
"""

import enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.schemas.geometry import BBox, ImageSize
from app.schemas.localizer import LocalizerResponse
from app.schemas.prompting import InstructionTemplate, PromptStyle


class FallbackPolicy(str, enum.Enum):
    """What the tracker predicts when the localizer yields no box."""
    REPEAT_LAST = "repeat_last"


class SearchMode(str, enum.Enum):
    """GLOBAL sends the full (prompted) frame; LOCAL sends an enlarged crop."""
    GLOBAL = "global"
    LOCAL = "local"


class TrackConfig(BaseModel):
    """Everything a tracker needs besides the sequence itself."""
    vp_enabled: bool = True
    prompt_style: PromptStyle = Field(default_factory=PromptStyle)
    template: InstructionTemplate = Field(default_factory=InstructionTemplate)
    fallback_policy: FallbackPolicy = FallbackPolicy.REPEAT_LAST
    search_mode: SearchMode = SearchMode.GLOBAL
    search_factor: float = Field(2.0, gt=0.0)
    localizer: Any

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("localizer")
    @classmethod
    def is_localizer(cls, v):
        if not callable(getattr(v, "localize", None)):
            raise ValueError("localizer must provide localize(request)")
        return v


class TrackerState(BaseModel):
    """T, L and B_{t-1}, advanced one frame at a time."""
    template: Any
    description: str = Field(..., min_length=1)
    last_box: BBox
    last_box_valid: bool = True
    frame_index: int = Field(1, ge=1)  # 1-based index of the last processed frame

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class StepRecord(BaseModel):
    """What happened on one frame; observers turn this into logs or dumps."""
    sequence_name: Optional[str] = None
    frame_index: int
    source_frame: Any
    request_frame: Optional[Any] = None
    instruction: Optional[str] = None
    prompt_box: Optional[BBox] = None  # rectangle drawn (already enlarged)
    prompt_clause: bool = False
    search_mode: SearchMode = SearchMode.GLOBAL
    search_region: Optional[BBox] = None
    frame_size: Optional[ImageSize] = None
    response: Optional[LocalizerResponse] = None
    error: Optional[str] = None
    prediction: BBox
    is_init: bool = False

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
