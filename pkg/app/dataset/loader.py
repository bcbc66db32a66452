"""
Sequence Loader

Reads TNL2K/TNLLT-style sequence directories into immutable Sequence values.

A frame is absent when its ground-truth row is degenerate (or NaN) OR an
absence-flag file marks it. A sequence is returned only if it satisfies every
Sequence invariant; otherwise loading fails with a DataError naming the file
and line.
"""

import math
import re
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Union

from PIL import Image, UnidentifiedImageError
from pydantic import ValidationError

from app.core.errors import DataError, SplitLoadError
from app.core.logging import get_logger
from app.schemas.dataset import (
    FrameSort,
    LayoutConfig,
    Sequence,
    SequenceLoadFailure,
    SplitLoadResult,
)
from app.schemas.geometry import BBox, ImageSize

logger = get_logger(__name__)

_FIELD_SPLIT = re.compile(r"[,\t ]+")
_DIGITS = re.compile(r"(\d+)")


def natural_key(name: str) -> list:
    """Sort key that orders 'frame2' before 'frame10'."""
    return [int(part) if part.isdigit() else part.lower() for part in _DIGITS.split(name)]


def list_frames(image_dir: Path, layout: LayoutConfig) -> list[Path]:
    """Image files of a sequence in playback order."""
    if not image_dir.is_dir():
        raise DataError(image_dir, "image directory not found")

    frames = [
        p for p in image_dir.iterdir()
        if p.is_file() and p.suffix.lower() in layout.image_extensions
    ]
    if layout.sort == FrameSort.NATURAL:
        frames.sort(key=lambda p: natural_key(p.name))
    else:
        frames.sort(key=lambda p: p.name)

    if not frames:
        raise DataError(image_dir, "no frame images found")
    return frames


def parse_groundtruth_line(text: str, path: Path, line_no: int) -> BBox:
    """
    Parse one 'x,y,w,h' row (comma, tab or space separated).

    Rows containing NaN are read as the degenerate box (absent target).
    """
    fields = [f for f in _FIELD_SPLIT.split(text.strip()) if f]
    if len(fields) != 4:
        raise DataError(path, f"expected 4 values, got {len(fields)}: {text.strip()!r}", line_no)
    try:
        values = [float(f) for f in fields]
    except ValueError:
        raise DataError(path, f"unparsable row: {text.strip()!r}", line_no) from None

    if any(math.isnan(v) for v in values):
        return BBox.empty()
    if any(math.isinf(v) for v in values):
        raise DataError(path, f"non-finite value in row: {text.strip()!r}", line_no)

    x, y, w, h = values
    if w < 0 or h < 0:
        raise DataError(path, f"negative box size: {text.strip()!r}", line_no)
    return BBox(x=x, y=y, w=w, h=h)


def read_groundtruth(path: Path) -> list[BBox]:
    """All rows of a ground-truth file; trailing blank lines are ignored."""
    if not path.is_file():
        raise DataError(path, "ground-truth file not found")

    lines = path.read_text(encoding="utf-8").splitlines()
    while lines and not lines[-1].strip():
        lines.pop()

    boxes = []
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            raise DataError(path, "blank row", i)
        boxes.append(parse_groundtruth_line(line, path, i))
    return boxes


def read_absence_flags(path: Path, n_frames: int) -> list[bool]:
    """
    Flags from an absence file: either one row of comma-separated 0/1 values or
    one value per line.
    """
    tokens = [t for t in re.split(r"[,\s]+", path.read_text(encoding="utf-8")) if t]
    if len(tokens) != n_frames:
        raise DataError(path, f"row-count mismatch: {len(tokens)} flags for {n_frames} frames")

    flags = []
    for i, token in enumerate(tokens, start=1):
        if token not in ("0", "1"):
            raise DataError(path, f"absence flag must be 0 or 1, got {token!r} (entry {i})")
        flags.append(token == "1")
    return flags


def read_description(path: Path) -> str:
    """First line of the language file, trimmed."""
    if not path.is_file():
        raise DataError(path, "language file not found")
    lines = path.read_text(encoding="utf-8").splitlines()
    description = lines[0].strip() if lines else ""
    if not description:
        raise DataError(path, "empty language description", 1)
    return description


def read_image_size(path: Path) -> ImageSize:
    """Frame size from the image header (pixels are not decoded)."""
    try:
        with Image.open(path) as im:
            return ImageSize(width=im.width, height=im.height)
    except (OSError, UnidentifiedImageError) as e:
        raise DataError(path, f"unreadable image: {e}") from e


def load_sequence(directory: Union[str, Path], layout: LayoutConfig) -> Sequence:
    """
    Load one sequence directory.

    Raises:
        DataError: Missing files, row-count mismatch, unparsable rows, or a
            first frame without a valid box
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(directory, "sequence directory not found")

    frames = list_frames(directory / layout.image_dir, layout)
    gt_path = directory / layout.groundtruth_file
    groundtruth = read_groundtruth(gt_path)
    if len(groundtruth) != len(frames):
        raise DataError(
            gt_path,
            f"row-count mismatch: {len(groundtruth)} rows for {len(frames)} frames",
        )

    absent = [b.is_degenerate for b in groundtruth]
    for name in layout.absence_files:
        flag_path = directory / name
        if not flag_path.is_file():
            continue  # optional by definition
        flags = read_absence_flags(flag_path, len(frames))
        absent = [a or f for a, f in zip(absent, flags)]

    if groundtruth[0].is_degenerate or absent[0]:
        raise DataError(gt_path, "frame 1 must carry a valid, present target box", 1)

    description = read_description(directory / layout.language_file)

    try:
        return Sequence(
            name=directory.name,
            frames=frames,
            groundtruth=groundtruth,
            absent=absent,
            description=description,
            image_size=read_image_size(frames[0]),
        )
    except ValidationError as e:
        raise DataError(directory, f"invalid sequence: {e}") from e


def load_split(
    root: Union[str, Path],
    layout: LayoutConfig,
    workers: int = 1,
    names: Optional[list[str]] = None,
) -> SplitLoadResult:
    """
    Load every sequence directory under root, in lexicographic order.

    Per-sequence failures are collected into the result instead of aborting.

    Raises:
        SplitLoadError: If root is missing or holds no sequence directories
    """
    root = Path(root)
    if not root.is_dir():
        raise SplitLoadError(f"{root}: dataset root not found")

    dirs = sorted((d for d in root.iterdir() if d.is_dir()), key=lambda d: d.name)
    if names is not None:
        wanted = set(names)
        dirs = [d for d in dirs if d.name in wanted]
    if not dirs:
        raise SplitLoadError(f"{root}: no sequences")

    def _load(d: Path):
        try:
            return load_sequence(d, layout)
        except DataError as e:
            return SequenceLoadFailure(name=d.name, error=str(e))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        outcomes = list(pool.map(_load, dirs))

    sequences = [o for o in outcomes if isinstance(o, Sequence)]
    failures = [o for o in outcomes if isinstance(o, SequenceLoadFailure)]
    for failure in failures:
        logger.warning("sequence_load_failed", sequence=failure.name, error=failure.error)

    logger.info("split_loaded", root=str(root), sequences=len(sequences), failures=len(failures))
    return SplitLoadResult(sequences=sequences, failures=failures)
