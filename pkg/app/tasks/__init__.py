"""
Celery Tasks

Per-sequence tracking jobs.
"""

from app.tasks.tracking import build_localizer, run_sequence_job, track_sequence_task

__all__ = ["build_localizer", "run_sequence_job", "track_sequence_task"]
