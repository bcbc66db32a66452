# app/metrics/__init__.py
from app.metrics.ope import (
    NORM_PRECISION_THRESHOLDS,
    PRECISION_THRESHOLDS,
    SUCCESS_THRESHOLDS,
    compare,
    evaluate,
    normalized_precision,
    precision,
    score_sequence,
    success_auc,
)
from app.metrics.report import format_delta, format_table, write_curves, write_report

__all__ = [
    "NORM_PRECISION_THRESHOLDS",
    "PRECISION_THRESHOLDS",
    "SUCCESS_THRESHOLDS",
    "compare",
    "evaluate",
    "format_delta",
    "format_table",
    "normalized_precision",
    "precision",
    "score_sequence",
    "success_auc",
    "write_curves",
    "write_report",
]
