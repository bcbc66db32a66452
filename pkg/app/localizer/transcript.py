"""
Transcripts

Line-delimited JSON log of every localizer query: raw answer, parsed box,
latency, plus what was actually sent (drawn rectangle, instruction clause,
pixel digests). The same file drives ScriptedLocalizer replays.
"""

import json
import threading
from pathlib import Path
from typing import Optional, Union

from pydantic import ValidationError

from app.core.errors import DataError
from app.geometry import image_digest
from app.schemas.localizer import TranscriptRecord
from app.schemas.tracker import StepRecord


def _box_list(box) -> Optional[list[float]]:
    return box.to_list() if box is not None else None


def to_transcript_record(step: StepRecord) -> TranscriptRecord:
    """Flatten a tracker step into a transcript line."""
    response = step.response
    failure = step.error or (response.failure if response is not None else None)
    return TranscriptRecord(
        sequence=step.sequence_name or "",
        frame_index=step.frame_index,
        raw_text=response.raw_text if response is not None else "",
        box=_box_list(response.box) if response is not None else None,
        latency_ms=response.latency_ms if response is not None else 0.0,
        failure=failure,
        prompt_box=_box_list(step.prompt_box),
        prompt_clause=step.prompt_clause,
        search_mode=step.search_mode.value,
        source_digest=image_digest(step.source_frame),
        request_digest=image_digest(step.request_frame) if step.request_frame is not None else None,
        prediction=step.prediction.to_list(),
    )


class TranscriptWriter:
    """
    Tracker observer appending one JSON line per queried frame.

    Safe to share between sequence workers; the initialization step (frame 1,
    no query) is not logged.
    """

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._file = open(self.path, "a", encoding="utf-8", newline="\n")

    def __call__(self, step: StepRecord) -> None:
        if step.is_init:
            return
        line = to_transcript_record(step).model_dump_json()
        with self._lock:
            self._file.write(line + "\n")
            self._file.flush()

    def close(self) -> None:
        with self._lock:
            if not self._file.closed:
                self._file.close()

    def __enter__(self) -> "TranscriptWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def load_transcript(path: Union[str, Path]) -> list[TranscriptRecord]:
    """
    Read every record of a transcript file.

    Raises:
        DataError: Missing file or a malformed line (with its line number)
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(path, "transcript not found")

    records = []
    for i, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(TranscriptRecord.model_validate(json.loads(line)))
        except (json.JSONDecodeError, ValidationError) as e:
            raise DataError(path, f"malformed transcript record: {e}", i) from None
    return records
