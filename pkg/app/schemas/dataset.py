"""
Dataset Schemas

Sequence model, on-disk layout description and prediction tracks.
"""

from enum import Enum
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.schemas.geometry import BBox, ImageSize


class FrameSort(str, Enum):
    """How frame filenames are ordered."""
    NATURAL = "natural"
    LEXICOGRAPHIC = "lexicographic"


class LayoutConfig(BaseModel):
    """
    Where a sequence directory keeps its frames and annotations.

    Two presets ship with the harness ("tnl2k" and "tnllt"); anything else
    can be described in a key=value file (see app.dataset.layouts).
    """
    name: str = "custom"
    image_dir: str = Field(..., min_length=1)
    groundtruth_file: str = Field(..., min_length=1)
    language_file: str = Field(..., min_length=1)
    absence_files: list[str] = Field(default_factory=list)
    image_extensions: list[str] = Field(default_factory=lambda: [".jpg", ".jpeg", ".png"])
    sort: FrameSort = FrameSort.NATURAL

    model_config = ConfigDict(frozen=True)

    @field_validator("image_extensions")
    @classmethod
    def normalize_extensions(cls, v: list[str]) -> list[str]:
        exts = [e.strip().lower() for e in v if e.strip()]
        if not exts:
            raise ValueError("image_extensions must not be empty")
        return [e if e.startswith(".") else f".{e}" for e in exts]


class Sequence(BaseModel):
    """One annotated video: frames, per-frame ground truth and one description."""
    name: str = Field(..., min_length=1)
    frames: list[Path] = Field(..., min_length=1)
    groundtruth: list[BBox]
    absent: list[bool]
    description: str = Field(..., min_length=1)
    image_size: ImageSize

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_alignment(self) -> "Sequence":
        n = len(self.frames)
        if len(self.groundtruth) != n or len(self.absent) != n:
            raise ValueError(
                f"row-count mismatch: {n} frames, {len(self.groundtruth)} boxes, "
                f"{len(self.absent)} absence flags"
            )
        if self.groundtruth[0].is_degenerate or self.absent[0]:
            raise ValueError("frame 1 must carry a valid, present target box")
        if not self.description.strip():
            raise ValueError("description must not be blank")
        return self

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def present_indices(self) -> list[int]:
        """0-based indices of frames where the target is visible."""
        return [i for i, a in enumerate(self.absent) if not a]


class ResultTrack(BaseModel):
    """Predicted boxes for every frame of one sequence."""
    sequence_name: str = Field(..., min_length=1)
    boxes: list[BBox]

    model_config = ConfigDict(frozen=True)


class SequenceLoadFailure(BaseModel):
    """A sequence directory that could not be loaded, and why."""
    name: str
    error: str


class SplitLoadResult(BaseModel):
    """Outcome of loading a split: the good sequences plus named failures."""
    sequences: list[Sequence]
    failures: list[SequenceLoadFailure] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures
