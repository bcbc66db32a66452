"""
Trace Dumps

Tracker observer that writes, for every frame of one sequence:

    prompted/<frame>.png    image actually sent (frame 1: prompt drawn at B_1)
    requests/<frame>.json   instruction, drawn rectangle, search region, digests
    responses/<frame>.txt   raw localizer answer (frame 1: B_1, marked as init)
    overlays/<frame>.png    ground truth (green) vs prediction (blue)
    steps.jsonl             one transcript record per queried frame
"""

import json
from pathlib import Path
from typing import Optional, Union

from app.geometry import image_digest
from app.localizer.parser import format_box
from app.localizer.transcript import to_transcript_record
from app.prompting import overlay, render_prompt
from app.schemas.geometry import BBox
from app.schemas.prompting import PromptStyle
from app.schemas.tracker import StepRecord

INIT_MARKER = "# initialization: ground-truth B_1, no query sent"


class TraceDumper:
    """Per-frame debugging dump of one tracking run."""

    def __init__(
        self,
        out_dir: Union[str, Path],
        groundtruth: list[BBox],
        absent: Optional[list[bool]] = None,
        style: Optional[PromptStyle] = None,
        vp_enabled: bool = True,
    ):
        self.out_dir = Path(out_dir)
        self.groundtruth = groundtruth
        self.absent = absent or [False] * len(groundtruth)
        self.style = style or PromptStyle()
        self.vp_enabled = vp_enabled
        for sub in ("prompted", "requests", "responses", "overlays"):
            (self.out_dir / sub).mkdir(parents=True, exist_ok=True)
        self._steps = open(self.out_dir / "steps.jsonl", "w", encoding="utf-8", newline="\n")

    def _path(self, sub: str, index: int, suffix: str) -> Path:
        return self.out_dir / sub / f"{index:06d}{suffix}"

    def __call__(self, step: StepRecord) -> None:
        i = step.frame_index
        if step.is_init:
            sent = (
                render_prompt(step.source_frame, step.prediction, self.style)
                if self.vp_enabled else step.source_frame
            )
            raw = f"{INIT_MARKER}\n{format_box(step.prediction)}\n"
        else:
            sent = step.request_frame
            raw = step.response.raw_text if step.response is not None else ""
            self._steps.write(to_transcript_record(step).model_dump_json() + "\n")

        sent.save(self._path("prompted", i, ".png"))
        self._path("responses", i, ".txt").write_text(raw, encoding="utf-8")

        request = {
            "frame_index": i,
            "is_init": step.is_init,
            "instruction": step.instruction,
            "prompt_box": step.prompt_box.to_list() if step.prompt_box is not None else None,
            "prompt_clause": step.prompt_clause,
            "search_mode": step.search_mode.value,
            "search_region": step.search_region.to_list() if step.search_region is not None else None,
            "sent_size": [sent.width, sent.height],
            "source_digest": image_digest(step.source_frame),
            "sent_digest": image_digest(sent),
            "parsed_box": (
                step.response.box.to_list()
                if step.response is not None and step.response.box is not None else None
            ),
            "failure": step.error or (step.response.failure if step.response is not None else None),
            "prediction": step.prediction.to_list(),
        }
        self._path("requests", i, ".json").write_text(json.dumps(request, indent=2) + "\n", encoding="utf-8")

        gt = None
        if i - 1 < len(self.groundtruth) and not self.absent[i - 1]:
            gt = self.groundtruth[i - 1]
        overlay(step.source_frame, gt, step.prediction).save(self._path("overlays", i, ".png"))

    def close(self) -> None:
        if not self._steps.closed:
            self._steps.close()

    def __enter__(self) -> "TraceDumper":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
