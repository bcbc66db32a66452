"""
Celery Application

Distributed execution of per-sequence tracking jobs.

Usage:
    celery -A app.celery_app worker --loglevel=info
    python -m app track --executor celery ...
"""

from celery import Celery
from app.config import settings

# Create Celery app
celery_app = Celery(
    "vptrack",
    broker=settings.CELERY_BROKER_URL,
    backend=settings.CELERY_RESULT_BACKEND,
)

# Configure Celery
celery_app.conf.update(
    task_serializer="json",
    accept_content=["json"],
    result_serializer="json",
    timezone="UTC",
    enable_utc=True,
    task_track_started=settings.CELERY_TASK_TRACK_STARTED,
    task_time_limit=settings.CELERY_TASK_TIME_LIMIT,
    task_soft_time_limit=settings.CELERY_TASK_TIME_LIMIT - 60,
    worker_prefetch_multiplier=1,  # one sequence at a time per worker process
    worker_max_tasks_per_child=100,
)

# Auto-discover tasks
celery_app.autodiscover_tasks(["app.tasks"])
