"""
Sample Drawing

One training example per call, drawn from a single random.Random stream:

1. dataset ~ Bernoulli(mix_ratio) (TNL2K vs TNLLT), sequence uniform within it
2. search frame uniform among present frames after frame 1
3. positive prompt: jittered ground truth of the nearest present frame at or
   before (search - g), g ~ U{1..max_temporal_gap}
   negative prompt (probability negative_fraction): target-sized box placed by
   rejection sampling so that neither it nor its drawn (enlarged) rectangle
   overlaps the target

The target label is the search frame's ground truth snapped to whole pixels,
so it reads back exactly through the answer grammar.
"""

import random
from functools import lru_cache
from pathlib import Path
from typing import Optional

from app.core.errors import ConfigError, SplitLoadError
from app.core.logging import get_logger
from app.dataset.loader import read_image_size
from app.geometry import clamp_box, enlarge, iou, quantize
from app.prompting import build_instruction
from app.schemas.dataset import Sequence
from app.schemas.geometry import BBox, ImageSize
from app.schemas.prompting import InstructionTemplate, PromptStyle
from app.schemas.samples import GenConfig, SampleImages, SampleRecord, SourceDataset

logger = get_logger(__name__)

# Upper bound on resampling sequences without a usable search frame
MAX_RESAMPLES = 1000


@lru_cache(maxsize=65536)
def frame_size(path: Path) -> ImageSize:
    """Frame size from the image header, cached per path."""
    return read_image_size(path)


def sample_paths(sample_id: str) -> SampleImages:
    return SampleImages(
        template_crop=f"images/{sample_id}_template.png",
        prompted_frame=f"images/{sample_id}_search.png",
    )


def _required(cfg: GenConfig) -> list[SourceDataset]:
    needed = []
    if cfg.mix_ratio > 0:
        needed.append(SourceDataset.TNL2K)
    if cfg.mix_ratio < 1:
        needed.append(SourceDataset.TNLLT)
    return needed


def _check_pools(pools: dict[SourceDataset, list[Sequence]], cfg: GenConfig) -> None:
    for dataset in _required(cfg):
        if not pools.get(dataset):
            raise ConfigError(f"mix_ratio {cfg.mix_ratio} needs at least one {dataset.value} sequence")


def search_candidates(seq: Sequence) -> list[int]:
    """0-based frames after frame 1 where the target is present and annotated."""
    return [i for i in seq.present_indices if i >= 1 and not seq.groundtruth[i].is_degenerate]


def check_pools(pools: dict[SourceDataset, list[Sequence]], cfg: GenConfig) -> None:
    """
    Make sure every dataset the mix draws from can yield a sample.

    Raises:
        ConfigError: The mix needs a dataset that has no sequences
        SplitLoadError: No sequence of a needed dataset has a usable search frame
    """
    _check_pools(pools, cfg)
    for dataset in _required(cfg):
        if not any(search_candidates(seq) for seq in pools[dataset]):
            raise SplitLoadError(
                f"no {dataset.value} sequence has a present, annotated frame after frame 1"
            )


def _jitter(box: BBox, cfg: GenConfig, rng: random.Random) -> tuple[float, float, float, float]:
    """Center noise and scale applied to a box; returns (x, y, w, h)."""
    lo, hi = cfg.jitter.scale_range
    s = rng.uniform(lo, hi)
    dx = rng.gauss(0.0, cfg.jitter.center_sigma * box.w)
    dy = rng.gauss(0.0, cfg.jitter.center_sigma * box.h)
    nw, nh = box.w * s, box.h * s
    return box.x + dx + (box.w - nw) / 2, box.y + dy + (box.h - nh) / 2, nw, nh


def _source_frame(seq: Sequence, search: int, gap: int) -> int:
    """Nearest usable frame at or before search - gap (0-based; frame 0 always qualifies)."""
    index = max(0, search - gap)
    while index > 0 and (seq.absent[index] or seq.groundtruth[index].is_degenerate):
        index -= 1
    return index


def place_positive(
    seq: Sequence, search: int, size: ImageSize, cfg: GenConfig, rng: random.Random
) -> tuple[Optional[BBox], int]:
    """Jittered earlier ground truth as the prompt; returns (prompt, 0-based source frame)."""
    gap = rng.randint(1, cfg.max_temporal_gap)
    source = _source_frame(seq, search, gap)
    gt = seq.groundtruth[source]

    x, y, w, h = _jitter(gt, cfg, rng)
    prompt = clamp_box(BBox(x=x, y=y, w=w, h=h), size)
    if prompt.is_degenerate:
        prompt = clamp_box(gt, size)
    return (None if prompt.is_degenerate else prompt), source


def place_negative(
    target: BBox,
    true_box: BBox,
    size: ImageSize,
    cfg: GenConfig,
    style: PromptStyle,
    rng: random.Random,
) -> Optional[BBox]:
    """
    A target-sized box whose drawn rectangle does not touch the target.

    Returns None after cfg.max_placement_attempts rejections.
    """
    lo, hi = cfg.jitter.scale_range
    s = rng.uniform(lo, hi)
    w = min(target.w * s, float(size.width))
    h = min(target.h * s, float(size.height))

    for _ in range(cfg.max_placement_attempts):
        x = rng.uniform(0.0, size.width - w)
        y = rng.uniform(0.0, size.height - h)
        candidate = BBox(x=x, y=y, w=w, h=h)
        if candidate.is_degenerate:
            continue
        drawn = enlarge(candidate, style.enlarge_factor, size)
        if (
            iou(candidate, target) == 0.0
            and iou(candidate, true_box) == 0.0
            and iou(drawn, target) == 0.0
            and iou(drawn, true_box) == 0.0
        ):
            return candidate
    return None


def draw_sample(
    pools: dict[SourceDataset, list[Sequence]],
    cfg: GenConfig,
    rng: random.Random,
    sample_id: str,
    style: Optional[PromptStyle] = None,
    template: Optional[InstructionTemplate] = None,
) -> SampleRecord:
    """
    Draw one sample record (no image is written here).

    Raises:
        ConfigError: A dataset the mix needs is empty
        SplitLoadError: Repeated draws found no usable search frame
    """
    style = style or PromptStyle()
    template = template or InstructionTemplate()
    _check_pools(pools, cfg)

    for _ in range(MAX_RESAMPLES):
        dataset = SourceDataset.TNL2K if rng.random() < cfg.mix_ratio else SourceDataset.TNLLT
        seq = rng.choice(pools[dataset])
        candidates = search_candidates(seq)
        if not candidates:
            continue  # fewer than two present frames
        search = rng.choice(candidates)
        size = frame_size(seq.frames[search])
        target = quantize(seq.groundtruth[search], size)
        if target.is_degenerate:
            continue
        break
    else:
        raise SplitLoadError(f"no usable search frame after {MAX_RESAMPLES} draws")

    negative = rng.random() < cfg.negative_fraction
    regenerated = False
    prompt = None
    source = None
    if negative:
        prompt = place_negative(target, seq.groundtruth[search], size, cfg, style, rng)
        if prompt is None:
            logger.warning(
                "negative_placement_failed",
                sample=sample_id,
                sequence=seq.name,
                frame=search + 1,
                attempts=cfg.max_placement_attempts,
            )
            negative = False
            regenerated = True
    if not negative:
        prompt, source = place_positive(seq, search, size, cfg, rng)

    return SampleRecord(
        sample_id=sample_id,
        source_dataset=dataset,
        sequence_name=seq.name,
        template_frame_index=1,
        search_frame_index=search + 1,
        prompt_box=prompt,
        target_box=target,
        is_negative_prompt=negative,
        instruction=build_instruction(template, seq.description, vp_enabled=prompt is not None),
        image_paths=sample_paths(sample_id),
        prompt_source_frame_index=None if source is None else source + 1,
        regenerated_as_positive=regenerated,
    )
