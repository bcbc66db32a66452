"""
One-Pass Evaluation

Success (IoU) AUC, center-error precision and normalized precision, computed
over the frames where the target is present and annotated.

Threshold grids:
    success            IoU >= tau      tau in {0, 0.05, ..., 1.0}    (21 points)
    precision          error <= theta  theta in {0, 1, ..., 50} px   (51 points)
    norm. precision    error <= theta  theta in {0, 0.01, ..., 0.5}  (51 points)

AUC is the mean of the success curve, PR the precision curve at 20 px, NPR
the mean of the normalized-precision curve.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Optional

import numpy as np

from app.core.errors import EvaluationError
from app.geometry import center_error, iou, normalized_center_error
from app.schemas.dataset import ResultTrack, Sequence
from app.schemas.geometry import BBox
from app.schemas.metrics import (
    AblationDelta,
    AggregateScores,
    Curves,
    EvalResult,
    MetricCurve,
    SequenceScores,
)

SUCCESS_THRESHOLDS = np.arange(21) / 20
PRECISION_THRESHOLDS = np.arange(51, dtype=np.float64)
NORM_PRECISION_THRESHOLDS = np.arange(51) / 100
PRECISION_REPORT_PX = 20
SUCCESS_REPORT_INDEX = 10  # tau = 0.5

SCORE_FIELDS = ("auc", "pr", "npr", "success_50")


def evaluated_pairs(
    preds: list[BBox], gts: list[BBox], absent: list[bool], name: Optional[str] = None
) -> list[tuple[BBox, BBox]]:
    """
    (prediction, ground truth) pairs that count toward the metrics.

    Raises:
        EvaluationError: Length mismatch or no evaluable frame
    """
    label = name or "track"
    if not (len(preds) == len(gts) == len(absent)):
        raise EvaluationError(
            label,
            f"length mismatch: {len(preds)} predictions, {len(gts)} ground-truth boxes, "
            f"{len(absent)} absence flags",
        )
    pairs = [(p, g) for p, g, a in zip(preds, gts, absent) if not a and not g.is_degenerate]
    if not pairs:
        raise EvaluationError(label, "no evaluable frames")
    return pairs


def _fraction_curve(values: np.ndarray, thresholds: np.ndarray, at_least: bool) -> np.ndarray:
    if at_least:
        hits = values[None, :] >= thresholds[:, None]
    else:
        hits = values[None, :] <= thresholds[:, None]
    return hits.mean(axis=1)


def success_auc(preds, gts, absent, name: Optional[str] = None) -> MetricCurve:
    """Success curve over IoU thresholds and its mean (AUC)."""
    pairs = evaluated_pairs(preds, gts, absent, name)
    overlaps = np.array([iou(p, g) for p, g in pairs], dtype=np.float64)
    curve = _fraction_curve(overlaps, SUCCESS_THRESHOLDS, at_least=True)
    return MetricCurve(
        value=float(curve.mean()),
        thresholds=SUCCESS_THRESHOLDS.tolist(),
        curve=curve.tolist(),
        n_eval_frames=len(pairs),
    )


def _center_error_or_inf(pred: BBox, gt: BBox, normalized: bool) -> float:
    # A degenerate prediction never lands within any threshold
    if pred.is_degenerate:
        return float("inf")
    return normalized_center_error(pred, gt) if normalized else center_error(pred, gt)


def precision(preds, gts, absent, threshold: int = PRECISION_REPORT_PX, name: Optional[str] = None) -> MetricCurve:
    """Center-error precision curve; the reported value is the curve at `threshold` px."""
    if not 0 <= threshold <= 50:
        raise ValueError("precision threshold must be within 0..50 px")
    pairs = evaluated_pairs(preds, gts, absent, name)
    errors = np.array([_center_error_or_inf(p, g, normalized=False) for p, g in pairs])
    curve = _fraction_curve(errors, PRECISION_THRESHOLDS, at_least=False)
    return MetricCurve(
        value=float(curve[int(threshold)]),
        thresholds=PRECISION_THRESHOLDS.tolist(),
        curve=curve.tolist(),
        n_eval_frames=len(pairs),
    )


def normalized_precision(preds, gts, absent, name: Optional[str] = None) -> MetricCurve:
    """Normalized center-error curve over 0..0.5 and its mean."""
    pairs = evaluated_pairs(preds, gts, absent, name)
    errors = np.array([_center_error_or_inf(p, g, normalized=True) for p, g in pairs])
    curve = _fraction_curve(errors, NORM_PRECISION_THRESHOLDS, at_least=False)
    return MetricCurve(
        value=float(curve.mean()),
        thresholds=NORM_PRECISION_THRESHOLDS.tolist(),
        curve=curve.tolist(),
        n_eval_frames=len(pairs),
    )


def score_sequence(track: ResultTrack, seq: Sequence) -> tuple[SequenceScores, Curves]:
    """All three metrics for one sequence."""
    if len(track.boxes) != len(seq):
        raise EvaluationError(seq.name, f"length mismatch: {len(track.boxes)} results for {len(seq)} frames")

    sr = success_auc(track.boxes, seq.groundtruth, seq.absent, seq.name)
    pr = precision(track.boxes, seq.groundtruth, seq.absent, name=seq.name)
    npr = normalized_precision(track.boxes, seq.groundtruth, seq.absent, seq.name)

    scores = SequenceScores(
        auc=sr.value,
        pr=pr.value,
        npr=npr.value,
        success_50=sr.curve[SUCCESS_REPORT_INDEX],
        n_eval_frames=sr.n_eval_frames,
    )
    curves = Curves(
        success_thresholds=sr.thresholds,
        success=sr.curve,
        precision_thresholds=pr.thresholds,
        precision=pr.curve,
        norm_precision_thresholds=npr.thresholds,
        norm_precision=npr.curve,
    )
    return scores, curves


def _mean_curves(curves: list[Curves]) -> Curves:
    first = curves[0]
    return Curves(
        success_thresholds=first.success_thresholds,
        success=np.mean([c.success for c in curves], axis=0).tolist(),
        precision_thresholds=first.precision_thresholds,
        precision=np.mean([c.precision for c in curves], axis=0).tolist(),
        norm_precision_thresholds=first.norm_precision_thresholds,
        norm_precision=np.mean([c.norm_precision for c in curves], axis=0).tolist(),
    )


def evaluate(tracks: Iterable[ResultTrack], sequences: Iterable[Sequence], workers: int = 1) -> EvalResult:
    """
    Per-sequence scores and their unweighted mean.

    Raises:
        EvaluationError: A sequence without results, results without a
            sequence, a length mismatch, or a sequence with no evaluable frame
    """
    sequences = list(sequences)
    by_name = {}
    for track in tracks:
        if track.sequence_name in by_name:
            raise EvaluationError(track.sequence_name, "duplicate results")
        by_name[track.sequence_name] = track

    if not sequences:
        raise EvaluationError("split", "nothing to evaluate")

    known = {seq.name for seq in sequences}
    extra = sorted(set(by_name) - known)
    if extra:
        raise EvaluationError(extra[0], "results without a matching sequence")

    for seq in sequences:
        if seq.name not in by_name:
            raise EvaluationError(seq.name, "no results for this sequence")

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        scored = list(pool.map(lambda s: score_sequence(by_name[s.name], s), sequences))

    per_sequence = {seq.name: scores for seq, (scores, _) in zip(sequences, scored)}
    sequence_curves = {seq.name: curves for seq, (_, curves) in zip(sequences, scored)}

    aggregate = AggregateScores(
        **{f: float(np.mean([getattr(s, f) for s in per_sequence.values()])) for f in SCORE_FIELDS},
        n_sequences=len(per_sequence),
    )
    return EvalResult(
        per_sequence=per_sequence,
        aggregate=aggregate,
        curves=_mean_curves([c for _, c in scored]),
        sequence_curves=sequence_curves,
    )


def compare(run: EvalResult, baseline: EvalResult) -> AblationDelta:
    """
    Aggregate delta run - baseline (e.g. with visual prompt minus without).

    Raises:
        EvaluationError: If the two results cover different sequences
    """
    if set(run.per_sequence) != set(baseline.per_sequence):
        missing = sorted(set(run.per_sequence) ^ set(baseline.per_sequence))
        raise EvaluationError(missing[0], "sequence missing from one side of the comparison")
    delta = {f: getattr(run.aggregate, f) - getattr(baseline.aggregate, f) for f in SCORE_FIELDS}
    return AblationDelta(run=run.aggregate, baseline=baseline.aggregate, delta=delta)
