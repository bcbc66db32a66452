"""
Visual Prompt Rendering

Template extraction and the location-aware rectangle drawn on the full frame.

Usage:
    from app.prompting import extract_template, render_prompt

    template = extract_template(first_frame, sequence.groundtruth[0])
    prompted = render_prompt(frame, state.last_box, PromptStyle())
"""

from typing import Optional

from PIL import Image, ImageDraw

from app.core.errors import DegenerateBoxError, EmptyCropError
from app.geometry import crop, enlarge, pixel_region
from app.schemas.geometry import BBox, ImageSize
from app.schemas.prompting import PromptStyle

Region = tuple[int, int, int, int]


def extract_template(first_frame: Image.Image, b1: BBox) -> Image.Image:
    """
    Exact crop of the first-frame box; no enlargement, no resizing.

    Raises:
        DegenerateBoxError: If b1 has zero area
        EmptyCropError: If b1 lies outside the frame
    """
    if b1.is_degenerate:
        raise DegenerateBoxError("template box must have positive area")
    return crop(first_frame, b1)


def prompt_rectangle(frame_size: ImageSize, prev_box: BBox, style: PromptStyle) -> Optional[BBox]:
    """
    The rectangle render_prompt would stroke for prev_box, or None when nothing
    would be drawn (degenerate box, or nothing left after clamping).
    """
    if prev_box.is_degenerate:
        return None
    rect = enlarge(prev_box, style.enlarge_factor, frame_size)
    if rect.is_degenerate:
        return None
    try:
        pixel_region(rect, frame_size)
    except EmptyCropError:
        return None
    return rect


def stroke_region(image: Image.Image, region: Region, color, width: int) -> None:
    """
    Stroke the border band of an integer region in place.

    The band runs inward from the region edge: pixels of the region not in
    [x0+width, x1-width) x [y0+width, y1-width). Regions too small to hold two
    bands are filled.
    """
    x0, y0, x1, y1 = region
    if x1 <= x0 or y1 <= y0:
        return
    color = tuple(color)
    draw = ImageDraw.Draw(image)
    if 2 * width >= min(x1 - x0, y1 - y0):
        draw.rectangle([x0, y0, x1 - 1, y1 - 1], fill=color)
        return

    # ImageDraw rectangles are corner-inclusive
    t = width
    draw.rectangle([x0, y0, x1 - 1, y0 + t - 1], fill=color)
    draw.rectangle([x0, y1 - t, x1 - 1, y1 - 1], fill=color)
    draw.rectangle([x0, y0 + t, x0 + t - 1, y1 - t - 1], fill=color)
    draw.rectangle([x1 - t, y0 + t, x1 - 1, y1 - t - 1], fill=color)


def render_prompt(frame: Image.Image, prev_box: BBox, style: PromptStyle) -> Image.Image:
    """
    Copy of the frame with a hollow rectangle around the enlarged previous box.

    A degenerate previous box yields an unmodified copy (global search with no
    prompt). Dimensions never change.
    """
    out = frame.convert("RGB") if frame.mode != "RGB" else frame.copy()

    size = ImageSize.of(out)
    rect = prompt_rectangle(size, prev_box, style)
    if rect is None:
        return out

    stroke_region(out, pixel_region(rect, size), style.color, style.stroke_for(size.width, size.height))
    return out


def draw_box(image: Image.Image, box: BBox, color, width: int = 2) -> Image.Image:
    """Outline a box (no enlargement) on a copy of the image; used for overlays."""
    out = image.convert("RGB") if image.mode != "RGB" else image.copy()
    if box.is_degenerate:
        return out
    try:
        region = pixel_region(box, ImageSize.of(out))
    except EmptyCropError:
        return out
    stroke_region(out, region, color, width)
    return out


def overlay(frame: Image.Image, groundtruth: Optional[BBox], prediction: BBox) -> Image.Image:
    """Ground truth in green, prediction in blue; same size as the frame."""
    out = frame
    if groundtruth is not None:
        out = draw_box(out, groundtruth, (0, 255, 0))
    return draw_box(out, prediction, (0, 0, 255))
