"""
Evaluation Reports

Human-readable table for the terminal, report.json for machines, and CSV
curve exports for plotting.

report.json schema (see app.schemas.metrics.EvalResult):

    {
      "per_sequence": {"<name>": {"auc", "pr", "npr", "success_50", "n_eval_frames"}},
      "aggregate": {"auc", "pr", "npr", "success_50", "n_sequences"},
      "curves": {"success_thresholds", "success", "precision_thresholds",
                 "precision", "norm_precision_thresholds", "norm_precision"},
      "sequence_curves": {"<name>": <curves>}
    }
"""

import csv
from pathlib import Path
from typing import Optional, Union

from app.schemas.metrics import AblationDelta, Curves, EvalResult

REPORT_FILE = "report.json"
DELTA_FILE = "ablation.json"
CURVE_FILES = {
    "success": ("success_thresholds", "success"),
    "precision": ("precision_thresholds", "precision"),
    "norm_precision": ("norm_precision_thresholds", "norm_precision"),
}


def _pct(value: float) -> str:
    return f"{100.0 * value:6.1f}"


def format_table(result: EvalResult) -> str:
    """Per-sequence rows then the aggregate, scores in percent."""
    width = max([len("sequence"), len("AGGREGATE")] + [len(n) for n in result.per_sequence])
    header = f"{'sequence':<{width}}  {'AUC':>6}  {'PR':>6}  {'NPR':>6}  {'SR@.5':>6}  {'frames':>6}"
    lines = [header, "-" * len(header)]
    for name, s in result.per_sequence.items():
        lines.append(
            f"{name:<{width}}  {_pct(s.auc)}  {_pct(s.pr)}  {_pct(s.npr)}  {_pct(s.success_50)}  {s.n_eval_frames:>6}"
        )
    a = result.aggregate
    lines.append("-" * len(header))
    lines.append(
        f"{'AGGREGATE':<{width}}  {_pct(a.auc)}  {_pct(a.pr)}  {_pct(a.npr)}  {_pct(a.success_50)}  {a.n_sequences:>6}"
    )
    return "\n".join(lines)


def format_delta(delta: AblationDelta, run_label: str = "run", baseline_label: str = "baseline") -> str:
    """Two-row comparison plus the signed difference."""
    width = max(len(run_label), len(baseline_label), len("delta"))
    rows = [
        f"{'':<{width}}  {'AUC':>6}  {'PR':>6}  {'NPR':>6}  {'SR@.5':>6}",
        f"{run_label:<{width}}  {_pct(delta.run.auc)}  {_pct(delta.run.pr)}  {_pct(delta.run.npr)}  {_pct(delta.run.success_50)}",
        f"{baseline_label:<{width}}  {_pct(delta.baseline.auc)}  {_pct(delta.baseline.pr)}  "
        f"{_pct(delta.baseline.npr)}  {_pct(delta.baseline.success_50)}",
    ]
    d = delta.delta
    rows.append(
        f"{'delta':<{width}}  {100 * d['auc']:+6.1f}  {100 * d['pr']:+6.1f}  {100 * d['npr']:+6.1f}  {100 * d['success_50']:+6.1f}"
    )
    return "\n".join(rows)


def write_curves(curves: Curves, out_dir: Union[str, Path], prefix: str = "") -> list[Path]:
    """One CSV (threshold,value) per curve."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (threshold_field, value_field) in CURVE_FILES.items():
        path = out_dir / f"{prefix}{name}.csv"
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["threshold", "value"])
            for t, v in zip(getattr(curves, threshold_field), getattr(curves, value_field)):
                writer.writerow([f"{t:g}", f"{v:.6f}"])
        written.append(path)
    return written


def write_report(
    result: EvalResult,
    out_dir: Union[str, Path],
    delta: Optional[AblationDelta] = None,
    per_sequence_curves: bool = False,
) -> list[Path]:
    """Write report.json, the mean-curve CSVs and (optionally) the ablation delta."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    report_path = out_dir / REPORT_FILE
    report_path.write_text(result.model_dump_json(indent=2) + "\n", encoding="utf-8")
    written = [report_path]
    written += write_curves(result.curves, out_dir / "curves")

    if per_sequence_curves:
        for name, curves in result.sequence_curves.items():
            written += write_curves(curves, out_dir / "curves" / "sequences", prefix=f"{name}_")

    if delta is not None:
        delta_path = out_dir / DELTA_FILE
        delta_path.write_text(delta.model_dump_json(indent=2) + "\n", encoding="utf-8")
        written.append(delta_path)
    return written
