"""
Global Tracker

The recursive tracking loop:

    T    = Crop(I_1, B_1)                 (init_tracker)
    I_t' = VP(I_t, B_{t-1})               (render_prompt, when a box is trusted)
    B_t  = Localizer(T, L', I_t')         (step)

When the localizer yields no usable box the tracker repeats B_{t-1} and
queries the next frame without a rectangle and with the whole-image
instruction, until a box is parsed again.

Usage:
    from app.tracker import track_sequence
    from app.schemas.tracker import TrackConfig

    track = track_sequence(sequence, TrackConfig(localizer=OracleLocalizer.from_sequences([sequence])))
"""

import time
from typing import Callable, Iterable, Optional

from PIL import Image

from app.core.errors import DataError, EmptyCropError, LocalizerError, LocalizerTimeoutError
from app.core.logging import get_logger
from app.geometry import clamp_box, enlarge, load_frame, pixel_region, region_box
from app.prompting import build_instruction, extract_template, prompt_rectangle, render_prompt
from app.schemas.dataset import ResultTrack, Sequence
from app.schemas.geometry import BBox, ImageSize
from app.schemas.localizer import LocalizerRequest
from app.schemas.tracker import SearchMode, StepRecord, TrackConfig, TrackerState

logger = get_logger(__name__)

Observer = Callable[[StepRecord], None]


def _notify(observers: Iterable[Observer], record: StepRecord) -> None:
    for observer in observers:
        observer(record)


def init_tracker(
    first_frame: Image.Image,
    b1: BBox,
    description: str,
    cfg: TrackConfig,
    sequence_name: Optional[str] = None,
    observers: Iterable[Observer] = (),
) -> TrackerState:
    """
    Crop the template and seed the state with B_1.

    Raises:
        DegenerateBoxError: If b1 has zero area
        EmptyCropError: If b1 lies outside the frame
    """
    template = extract_template(first_frame, b1)
    state = TrackerState(template=template, description=description, last_box=b1)

    size = ImageSize.of(first_frame)
    _notify(observers, StepRecord(
        sequence_name=sequence_name,
        frame_index=1,
        source_frame=first_frame,
        prompt_box=prompt_rectangle(size, b1, cfg.prompt_style) if cfg.vp_enabled else None,
        frame_size=size,
        prediction=b1,
        is_init=True,
    ))
    return state


def _local_region(state: TrackerState, size: ImageSize, cfg: TrackConfig):
    """Integer crop region around the previous box, or None to use the full frame."""
    if not state.last_box_valid or state.last_box.is_degenerate:
        return None
    try:
        return pixel_region(enlarge(state.last_box, cfg.search_factor, size), size)
    except EmptyCropError:
        return None


def step(
    state: TrackerState,
    frame: Image.Image,
    cfg: TrackConfig,
    sequence_name: Optional[str] = None,
    observers: Iterable[Observer] = (),
) -> tuple[TrackerState, BBox]:
    """
    Advance the tracker by one frame.

    Never raises for localizer trouble: parse failures and transport errors
    both produce the repeat-last prediction and latch the next query to
    promptless global search.

    Returns:
        (new state, prediction for this frame)
    """
    frame_index = state.frame_index + 1
    size = ImageSize.of(frame)

    prompt_box = None
    origin = (0, 0)
    region = None
    if cfg.search_mode == SearchMode.LOCAL:
        region = _local_region(state, size, cfg)
        if region is not None:
            request_frame = frame.crop(region)
            origin = (region[0], region[1])
        else:
            request_frame = frame
        use_prompt = False
    else:
        if cfg.vp_enabled and state.last_box_valid:
            prompt_box = prompt_rectangle(size, state.last_box, cfg.prompt_style)
        use_prompt = prompt_box is not None
        request_frame = render_prompt(frame, state.last_box, cfg.prompt_style) if use_prompt else frame

    instruction = build_instruction(cfg.template, state.description, vp_enabled=use_prompt)
    request = LocalizerRequest(
        template=state.template,
        frame=request_frame,
        instruction=instruction,
        frame_size=ImageSize.of(request_frame),
        sequence_name=sequence_name,
        frame_index=frame_index,
        frame_origin=origin,
    )

    response = None
    error = None
    try:
        response = cfg.localizer.localize(request)
    except LocalizerError as e:
        kind = "timeout" if isinstance(e, LocalizerTimeoutError) else "transport"
        error = f"{kind}: {e}"
        logger.warning(
            "localizer_failed",
            sequence=sequence_name,
            frame=frame_index,
            kind=kind,
            error=str(e),
            raw_body=(e.raw_body or "")[:200],
        )

    if response is not None and response.box is not None:
        box = response.box
        if origin != (0, 0):
            box = clamp_box(box.translate(origin[0], origin[1]), size)
        prediction = box
        new_state = state.model_copy(
            update={"last_box": box, "last_box_valid": True, "frame_index": frame_index}
        )
    else:
        prediction = state.last_box
        if state.last_box_valid:
            logger.info("fallback_latched", sequence=sequence_name, frame=frame_index)
        new_state = state.model_copy(update={"last_box_valid": False, "frame_index": frame_index})

    _notify(observers, StepRecord(
        sequence_name=sequence_name,
        frame_index=frame_index,
        source_frame=frame,
        request_frame=request_frame,
        instruction=instruction,
        prompt_box=prompt_box,
        prompt_clause=use_prompt,
        search_mode=cfg.search_mode,
        search_region=region_box(region) if region is not None else None,
        frame_size=size,
        response=response,
        error=error,
        prediction=prediction,
    ))
    return new_state, prediction


def _read_frame(path) -> Image.Image:
    try:
        return load_frame(path)
    except OSError as e:
        raise DataError(path, f"unreadable frame: {e}") from e


class StepCounter:
    """Observer tallying failed queries of one sequence."""

    def __init__(self):
        self.parse_failures = 0
        self.transport_failures = 0
        self.queries = 0

    def __call__(self, record: StepRecord) -> None:
        if record.is_init:
            return
        self.queries += 1
        if record.error is not None:
            self.transport_failures += 1
        elif record.response is not None and record.response.box is None:
            self.parse_failures += 1


def track_sequence(
    seq: Sequence,
    cfg: TrackConfig,
    observers: Iterable[Observer] = (),
    frame_loader: Callable[..., Image.Image] = _read_frame,
) -> ResultTrack:
    """
    Run one-pass tracking over a whole sequence.

    boxes[0] is the given B_1; every later frame gets exactly one prediction.

    Raises:
        DataError: A frame file cannot be read
    """
    observers = list(observers)
    counter = StepCounter()
    observers.append(counter)

    started = time.perf_counter()
    logger.info("sequence_started", sequence=seq.name, frames=len(seq))

    state = init_tracker(
        frame_loader(seq.frames[0]), seq.groundtruth[0], seq.description, cfg,
        sequence_name=seq.name, observers=observers,
    )
    boxes = [seq.groundtruth[0]]
    for path in seq.frames[1:]:
        state, prediction = step(state, frame_loader(path), cfg, sequence_name=seq.name, observers=observers)
        boxes.append(prediction)

    logger.info(
        "sequence_finished",
        sequence=seq.name,
        frames=len(boxes),
        parse_failures=counter.parse_failures,
        transport_failures=counter.transport_failures,
        seconds=round(time.perf_counter() - started, 3),
    )
    return ResultTrack(sequence_name=seq.name, boxes=boxes)
