"""
Metrics Schemas

One-pass evaluation results: per-sequence scores, aggregates and curves.
"""

from pydantic import BaseModel, Field


class MetricCurve(BaseModel):
    """A thresholded score curve and the scalar reported from it."""
    value: float = Field(..., ge=0.0, le=1.0)
    thresholds: list[float]
    curve: list[float]
    n_eval_frames: int = Field(..., ge=1)


class SequenceScores(BaseModel):
    """Scores of one sequence."""
    auc: float = Field(..., ge=0.0, le=1.0)
    pr: float = Field(..., ge=0.0, le=1.0)
    npr: float = Field(..., ge=0.0, le=1.0)
    success_50: float = Field(..., ge=0.0, le=1.0)
    n_eval_frames: int = Field(..., ge=1)


class AggregateScores(BaseModel):
    """Unweighted means over sequences."""
    auc: float = Field(..., ge=0.0, le=1.0)
    pr: float = Field(..., ge=0.0, le=1.0)
    npr: float = Field(..., ge=0.0, le=1.0)
    success_50: float = Field(..., ge=0.0, le=1.0)
    n_sequences: int = Field(..., ge=1)


class Curves(BaseModel):
    """Mean curves over sequences (21 / 51 / 51 points)."""
    success_thresholds: list[float]
    success: list[float]
    precision_thresholds: list[float]
    precision: list[float]
    norm_precision_thresholds: list[float]
    norm_precision: list[float]


class EvalResult(BaseModel):
    """Full evaluation report; serialized as the machine-readable document."""
    per_sequence: dict[str, SequenceScores]
    aggregate: AggregateScores
    curves: Curves
    sequence_curves: dict[str, Curves] = Field(default_factory=dict)


class AblationDelta(BaseModel):
    """Aggregate difference between two runs on the same sequences."""
    run: AggregateScores
    baseline: AggregateScores
    delta: dict[str, float]
