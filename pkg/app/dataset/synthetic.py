"""
Synthetic Split Generator

Writes a small deterministic split (a coloured rectangle drifting over a noisy
background) in either preset layout. Tests and smoke runs use it instead of a
real benchmark download.

Usage:
    from app.dataset.synthetic import make_synthetic_split

    root = make_synthetic_split(tmp_path / "split", n_sequences=3, n_frames=10)
"""

from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image

from app.dataset.layouts import PRESETS
from app.schemas.dataset import LayoutConfig
from app.schemas.geometry import BBox, ImageSize

DESCRIPTIONS = [
    "the blue box sliding to the right",
    "the teal square near the top",
    "the small green block moving down",
    "the purple patch in the middle",
    "the orange tile drifting left",
]

# Channel values stay below 201 so no synthetic pixel is pure prompt red.
_MAX_CHANNEL = 200
_TARGET_COLORS = [(20, 60, 200), (30, 170, 160), (40, 180, 40), (150, 40, 170), (200, 120, 30)]


def synthetic_track(
    index: int, n_frames: int, size: ImageSize, target: tuple[int, int] = (24, 18)
) -> list[BBox]:
    """Integer ground-truth boxes of sequence `index`, bouncing inside the frame."""
    tw, th = target
    span_x = size.width - tw
    span_y = size.height - th
    x0, y0 = (7 * index + 5) % span_x, (11 * index + 3) % span_y
    vx, vy = 3 + index % 3, 2 + (index + 1) % 2

    boxes = []
    for t in range(n_frames):
        x = _bounce(x0 + vx * t, span_x)
        y = _bounce(y0 + vy * t, span_y)
        boxes.append(BBox(x=x, y=y, w=tw, h=th))
    return boxes


def _bounce(pos: int, span: int) -> int:
    period = 2 * span
    p = pos % period
    return p if p <= span else period - p


def render_frame(size: ImageSize, box: Optional[BBox], color, rng: np.random.Generator) -> Image.Image:
    """Noisy background with the target painted in (omitted when box is None)."""
    pixels = rng.integers(0, 120, size=(size.height, size.width, 3), dtype=np.uint8)
    if box is not None:
        x, y = int(box.x), int(box.y)
        pixels[y:y + int(box.h), x:x + int(box.w)] = np.minimum(color, _MAX_CHANNEL)
    return Image.fromarray(pixels)


def make_synthetic_split(
    root: Union[str, Path],
    n_sequences: int = 3,
    n_frames: int = 10,
    size: ImageSize = ImageSize(width=160, height=120),
    layout: Union[str, LayoutConfig] = "tnl2k",
    seed: int = 0,
    absent_span: Optional[tuple[int, int]] = None,
    name_prefix: str = "seq",
) -> Path:
    """
    Write `n_sequences` sequence directories under root.

    absent_span is a 1-based inclusive frame range (must start after frame 1)
    during which the target is hidden. With a layout that has absence files the
    span is flagged there and the ground truth keeps the real box; otherwise
    the ground-truth rows are written as 0,0,0,0.
    """
    if isinstance(layout, str):
        layout = PRESETS[layout]
    if absent_span is not None and absent_span[0] < 2:
        raise ValueError("absent_span must start at frame 2 or later")

    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    ext = ".png" if ".png" in layout.image_extensions else layout.image_extensions[0]

    for i in range(n_sequences):
        seq_dir = root / f"{name_prefix}_{i + 1:02d}"
        img_dir = seq_dir / layout.image_dir
        img_dir.mkdir(parents=True, exist_ok=True)

        boxes = synthetic_track(i, n_frames, size)
        hidden = [
            absent_span is not None and absent_span[0] <= t + 1 <= absent_span[1]
            for t in range(n_frames)
        ]
        color = _TARGET_COLORS[i % len(_TARGET_COLORS)]

        for t, box in enumerate(boxes):
            frame = render_frame(size, None if hidden[t] else box, color, rng)
            frame.save(img_dir / f"{t + 1:08d}{ext}")

        rows = []
        for box, is_hidden in zip(boxes, hidden):
            if is_hidden and not layout.absence_files:
                rows.append("0,0,0,0")
            else:
                rows.append(f"{int(box.x)},{int(box.y)},{int(box.w)},{int(box.h)}")
        (seq_dir / layout.groundtruth_file).write_text("\n".join(rows) + "\n", encoding="utf-8")

        for k, flag_file in enumerate(layout.absence_files):
            # Only the first flag file carries the span; the others are all zero
            flags = [("1" if (h and k == 0) else "0") for h in hidden]
            (seq_dir / flag_file).write_text(",".join(flags) + "\n", encoding="utf-8")

        (seq_dir / layout.language_file).write_text(
            DESCRIPTIONS[i % len(DESCRIPTIONS)] + "\n", encoding="utf-8"
        )

    return root
