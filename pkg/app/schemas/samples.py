"""
Training Sample Schemas

Generator configuration and the per-sample record written to the manifest.
"""

import enum
from typing import Optional

from pydantic import BaseModel, Field, model_validator

from app.schemas.geometry import BBox

MANIFEST_SCHEMA_VERSION = 1


class SourceDataset(str, enum.Enum):
    TNL2K = "tnl2k"
    TNLLT = "tnllt"


class JitterConfig(BaseModel):
    """Noise applied to the earlier ground-truth box used as a positive prompt."""
    center_sigma: float = Field(0.1, ge=0.0)  # relative to box width / height
    scale_range: tuple[float, float] = (0.8, 1.25)

    @model_validator(mode="after")
    def ordered_range(self) -> "JitterConfig":
        lo, hi = self.scale_range
        if lo <= 0 or hi < lo:
            raise ValueError("scale_range must satisfy 0 < low <= high")
        return self


class GenConfig(BaseModel):
    """Knobs of the sample generator."""
    total_count: int = Field(1000, ge=1)
    mix_ratio: float = Field(0.7, ge=0.0, le=1.0)  # share of TNL2K
    negative_fraction: float = Field(0.2, ge=0.0, le=1.0)
    max_temporal_gap: int = Field(30, ge=1)
    jitter: JitterConfig = Field(default_factory=JitterConfig)
    seed: int = 0
    max_placement_attempts: int = Field(100, ge=1)


class SampleImages(BaseModel):
    """Image files of one sample, relative to the output directory."""
    template_crop: str
    prompted_frame: str


class SampleRecord(BaseModel):
    """One training example."""
    sample_id: str
    source_dataset: SourceDataset
    sequence_name: str
    template_frame_index: int = 1
    search_frame_index: int = Field(..., ge=2)  # 1-based
    prompt_box: Optional[BBox] = None
    target_box: BBox
    is_negative_prompt: bool = False
    instruction: str
    image_paths: SampleImages
    prompt_source_frame_index: Optional[int] = None  # 1-based frame the prompt came from
    regenerated_as_positive: bool = False  # negative placement gave up

    @model_validator(mode="after")
    def negative_has_prompt(self) -> "SampleRecord":
        if self.is_negative_prompt and self.prompt_box is None:
            raise ValueError("negative-prompt samples must carry a prompt box")
        return self


class GenerationSummary(BaseModel):
    """What generate() wrote."""
    manifest_path: str
    count: int
    negatives: int
    per_dataset: dict[str, int]
    regenerated_as_positive: int
    seed: int
