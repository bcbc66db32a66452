# app/tracker/__init__.py
from app.tracker.trace import TraceDumper
from app.tracker.tracker import Observer, StepCounter, init_tracker, step, track_sequence

__all__ = ["Observer", "StepCounter", "TraceDumper", "init_tracker", "step", "track_sequence"]
