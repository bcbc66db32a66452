"""
Pydantic Schemas

Value types shared across the harness modules.
"""

from app.schemas.geometry import BBox, ImageSize
from app.schemas.dataset import (
    FrameSort,
    LayoutConfig,
    ResultTrack,
    Sequence,
    SequenceLoadFailure,
    SplitLoadResult,
)
from app.schemas.prompting import InstructionTemplate, PromptStyle
from app.schemas.localizer import (
    EndpointConfig,
    LocalizerRequest,
    LocalizerResponse,
    ParseFailure,
    TranscriptRecord,
)
from app.schemas.tracker import (
    FallbackPolicy,
    SearchMode,
    StepRecord,
    TrackConfig,
    TrackerState,
)
from app.schemas.metrics import EvalResult, MetricCurve, SequenceScores
from app.schemas.samples import GenConfig, SampleRecord, SourceDataset

__all__ = [
    # Geometry
    "BBox",
    "ImageSize",

    # Dataset
    "FrameSort",
    "LayoutConfig",
    "ResultTrack",
    "Sequence",
    "SequenceLoadFailure",
    "SplitLoadResult",

    # Prompting
    "InstructionTemplate",
    "PromptStyle",

    # Localizer
    "EndpointConfig",
    "LocalizerRequest",
    "LocalizerResponse",
    "ParseFailure",
    "TranscriptRecord",

    # Tracker
    "FallbackPolicy",
    "SearchMode",
    "StepRecord",
    "TrackConfig",
    "TrackerState",

    # Metrics
    "EvalResult",
    "MetricCurve",
    "SequenceScores",

    # Samples
    "GenConfig",
    "SampleRecord",
    "SourceDataset",
]
