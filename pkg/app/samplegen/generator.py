"""
Training Sample Generator

Draws all records first (one seeded stream, fixed order), then renders the
template crops and prompted search frames in a thread pool, then writes the
manifest. Output names are keyed by sample id, so the manifest and every
image are byte-identical across runs with the same seed.

Manifest line (UTF-8 JSON, one per sample):

    {
      "schema_version": 1,
      "sample_id": ..., "source_dataset": ..., ... SampleRecord fields ...,
      "images": ["images/<id>_template.png", "images/<id>_search.png"],
      "messages": [
        {"role": "system", "content": "..."},
        {"role": "user", "content": "<instruction>\\n<image>\\n<image>"},
        {"role": "assistant", "content": "{\\"bbox_2d\\": [x1, y1, x2, y2]}"}
      ]
    }

Usage:
    from app.samplegen import generate

    summary = generate(GenConfig(total_count=100, seed=7), {SourceDataset.TNL2K: root_a,
                       SourceDataset.TNLLT: root_b}, out_dir)
"""

import json
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Union

from app.core.errors import DataError, SplitLoadError
from app.core.logging import get_logger
from app.dataset import load_layout, load_split
from app.geometry import load_frame
from app.localizer.parser import format_box
from app.prompting import extract_template, render_prompt
from app.samplegen.sampler import check_pools, draw_sample
from app.schemas.dataset import LayoutConfig, Sequence
from app.schemas.prompting import InstructionTemplate, PromptStyle
from app.schemas.samples import (
    MANIFEST_SCHEMA_VERSION,
    GenConfig,
    GenerationSummary,
    SampleRecord,
    SourceDataset,
)

logger = get_logger(__name__)

MANIFEST_FILE = "manifest.jsonl"
SYSTEM_PROMPT = "You are a visual object tracker. You locate one target object in video frames."
IMAGE_TOKEN = "<image>"


def manifest_line(record: SampleRecord) -> str:
    """Conversation-format JSON line for one record."""
    line = {"schema_version": MANIFEST_SCHEMA_VERSION, **record.model_dump(mode="json")}
    line["images"] = [record.image_paths.template_crop, record.image_paths.prompted_frame]
    line["messages"] = [
        {"role": "system", "content": SYSTEM_PROMPT},
        {"role": "user", "content": f"{record.instruction}\n{IMAGE_TOKEN}\n{IMAGE_TOKEN}"},
        {"role": "assistant", "content": format_box(record.target_box)},
    ]
    return json.dumps(line, ensure_ascii=False)


def render_sample(record: SampleRecord, seq: Sequence, out_dir: Path, style: PromptStyle) -> None:
    """Write the template crop and the prompted search frame of one record."""
    template = extract_template(load_frame(seq.frames[0]), seq.groundtruth[0])
    frame = load_frame(seq.frames[record.search_frame_index - 1])
    if record.prompt_box is not None:
        frame = render_prompt(frame, record.prompt_box, style)

    template.save(out_dir / record.image_paths.template_crop, format="PNG")
    frame.save(out_dir / record.image_paths.prompted_frame, format="PNG")


def load_pools(
    dataset_roots: dict[SourceDataset, Union[str, Path]],
    layouts: Optional[dict[SourceDataset, LayoutConfig]] = None,
    workers: int = 1,
) -> dict[SourceDataset, list[Sequence]]:
    """
    Load every source split.

    Raises:
        SplitLoadError: A split is missing or any of its sequences failed to load
    """
    pools = {}
    for dataset, root in dataset_roots.items():
        layout = (layouts or {}).get(dataset) or load_layout(dataset.value)
        result = load_split(root, layout, workers=workers)
        if result.failures:
            names = ", ".join(f.name for f in result.failures)
            raise SplitLoadError(f"{root}: {len(result.failures)} sequence(s) failed to load: {names}")
        pools[dataset] = result.sequences
    return pools


def generate(
    cfg: GenConfig,
    dataset_roots: dict[SourceDataset, Union[str, Path]],
    out_dir: Union[str, Path],
    layouts: Optional[dict[SourceDataset, LayoutConfig]] = None,
    style: Optional[PromptStyle] = None,
    template: Optional[InstructionTemplate] = None,
    workers: int = 4,
) -> GenerationSummary:
    """
    Generate cfg.total_count samples under out_dir.

    Raises:
        DataError: out_dir cannot be created or written
        SplitLoadError: Dataset loading failed or a needed dataset has no usable search frame
        ConfigError: The configured mix needs a dataset that has no sequences
    """
    out_dir = Path(out_dir)
    style = style or PromptStyle()
    template = template or InstructionTemplate()

    pools = load_pools(dataset_roots, layouts, workers=workers)
    check_pools(pools, cfg)

    try:
        (out_dir / "images").mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DataError(out_dir, f"output directory is not writable: {e}") from e

    lookup = {(ds, seq.name): seq for ds, seqs in pools.items() for seq in seqs}

    rng = random.Random(cfg.seed)
    width = max(6, len(str(cfg.total_count)))
    records = [
        draw_sample(pools, cfg, rng, f"{i:0{width}d}", style=style, template=template)
        for i in range(cfg.total_count)
    ]

    def _render(record: SampleRecord) -> None:
        render_sample(record, lookup[(record.source_dataset, record.sequence_name)], out_dir, style)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        list(pool.map(_render, records))

    manifest_path = out_dir / MANIFEST_FILE
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(manifest_line(record) + "\n")

    per_dataset = Counter(r.source_dataset.value for r in records)
    summary = GenerationSummary(
        manifest_path=str(manifest_path),
        count=len(records),
        negatives=sum(r.is_negative_prompt for r in records),
        per_dataset=dict(sorted(per_dataset.items())),
        regenerated_as_positive=sum(r.regenerated_as_positive for r in records),
        seed=cfg.seed,
    )
    logger.info("samples_generated", **summary.model_dump())
    return summary
