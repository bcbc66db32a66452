"""
Offline Localizers

OracleLocalizer answers with the ground truth of the requested frame
(optionally shifted); ScriptedLocalizer replays raw answers from a transcript
so the parser and the tracker fallback run end-to-end without a model.

Both identify the frame by (request.sequence_name, request.frame_index) and
ignore the images.
"""

from pathlib import Path
from typing import Iterable, Union

from app.geometry import clamp_box
from app.localizer.base import Localizer
from app.localizer.parser import format_box, parse_box
from app.localizer.transcript import load_transcript
from app.schemas.dataset import Sequence
from app.schemas.geometry import BBox
from app.schemas.localizer import LocalizerRequest, LocalizerResponse, ParseFailure


class OracleLocalizer(Localizer):
    """
    Perfect (or constantly biased) localizer backed by a ground-truth table.

    Boxes skip the text grammar and are clamped straight into the frame that
    was sent, so fractional ground truth survives unchanged. Absent frames and
    unknown frames come back unparsed.
    """

    name = "oracle"

    def __init__(self, groundtruth: dict[str, list[BBox]], offset: tuple[float, float] = (0.0, 0.0)):
        self._groundtruth = {name: list(boxes) for name, boxes in groundtruth.items()}
        self.offset = offset

    @classmethod
    def from_sequences(cls, sequences: Iterable[Sequence], offset=(0.0, 0.0)) -> "OracleLocalizer":
        table = {}
        for seq in sequences:
            table[seq.name] = [
                BBox.empty() if absent else box
                for box, absent in zip(seq.groundtruth, seq.absent)
            ]
        return cls(table, offset=offset)

    def localize(self, request: LocalizerRequest) -> LocalizerResponse:
        boxes = self._groundtruth.get(request.sequence_name or "")
        index = request.frame_index
        if boxes is None or index is None or not 1 <= index <= len(boxes):
            return LocalizerResponse(raw_text="", failure="no ground truth for this frame")

        gt = boxes[index - 1]
        if gt.is_degenerate:
            return LocalizerResponse(raw_text="target not visible", failure="target absent")

        ox, oy = request.frame_origin
        dx, dy = self.offset
        box = clamp_box(gt.translate(dx - ox, dy - oy), request.frame_size)
        if box.is_degenerate:
            return LocalizerResponse(raw_text="target not visible", failure="target outside the query image")
        return LocalizerResponse(raw_text=format_box(box), box=box)


class ScriptedLocalizer(Localizer):
    """
    Replays raw model answers keyed by (sequence, frame index).

    Every answer goes through parse_box, so garbage in the script turns into a
    parse failure exactly as a live model's garbage would. Missing entries are
    answered with an empty string.
    """

    name = "scripted"

    def __init__(self, script: dict[tuple[str, int], str]):
        self._script = dict(script)

    @classmethod
    def from_transcript(cls, path: Union[str, Path]) -> "ScriptedLocalizer":
        return cls({(r.sequence, r.frame_index): r.raw_text for r in load_transcript(path)})

    def __len__(self) -> int:
        return len(self._script)

    def localize(self, request: LocalizerRequest) -> LocalizerResponse:
        raw_text = self._script.get((request.sequence_name or "", request.frame_index or 0), "")
        parsed = parse_box(raw_text, request.frame_size)
        if isinstance(parsed, ParseFailure):
            return LocalizerResponse(raw_text=raw_text, failure=parsed.reason)
        return LocalizerResponse(raw_text=raw_text, box=parsed)
