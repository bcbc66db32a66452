"""
Box Grammar

Reads and writes the single answer format the instruction asks for:

    {"bbox_2d": [x1, y1, x2, y2]}

in absolute pixel coordinates of the full frame. The reader is lenient about
surrounding prose, code fences, swapped corners and single-quoted keys; it
never raises.
"""

import json
import math
import re
from typing import Any, Optional, Union

from app.geometry import clamp_box, contains
from app.schemas.geometry import BBox, ImageSize
from app.schemas.localizer import ParseFailure

BBOX_KEY = "bbox_2d"
PER_MILLE = 1000.0

_NUMBER = r"-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?"
# Fallback for near-JSON answers (single quotes, trailing commas, '=' instead of ':')
_LOOSE_BBOX = re.compile(
    r"""['"]?bbox_2d['"]?\s*[:=]\s*\[\s*"""
    rf"({_NUMBER})\s*,\s*({_NUMBER})\s*,\s*({_NUMBER})\s*,\s*({_NUMBER})\s*,?\s*\]"
)

_decoder = json.JSONDecoder()


def _corners_of(obj: Any) -> Optional[list[float]]:
    if not isinstance(obj, dict):
        return None
    value = obj.get(BBOX_KEY)
    if not isinstance(value, list) or len(value) != 4:
        return None
    if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
        return None
    try:
        corners = [float(v) for v in value]
    except OverflowError:
        return None
    if not all(math.isfinite(v) for v in corners):
        return None
    return corners


def find_corners(raw_text: str) -> Optional[list[float]]:
    """First [x1, y1, x2, y2] found under a bbox_2d key, or None."""
    start = raw_text.find("{")
    while start != -1:
        try:
            obj, _ = _decoder.raw_decode(raw_text, start)
        except (json.JSONDecodeError, RecursionError):
            obj = None
        corners = _corners_of(obj)
        if corners is not None:
            return corners
        start = raw_text.find("{", start + 1)

    match = _LOOSE_BBOX.search(raw_text)
    if match:
        corners = [float(g) for g in match.groups()]
        if all(math.isfinite(v) for v in corners):
            return corners
    return None


def _use_per_mille(corners: list[float], absolute: BBox, frame_size: ImageSize) -> bool:
    # Only when the numbers fit the 0..1000 grid, the frame is larger than that
    # grid, and the absolute reading does not fit the frame.
    return (
        all(v <= PER_MILLE for v in corners)
        and max(frame_size.width, frame_size.height) > PER_MILLE
        and not contains(frame_size, absolute)
    )


def parse_box(raw_text: str, frame_size: ImageSize) -> Union[BBox, ParseFailure]:
    """
    Extract a box from model output.

    Returns:
        A non-degenerate BBox clamped into the frame, or ParseFailure
    """
    if not isinstance(raw_text, str) or not raw_text.strip():
        return ParseFailure(reason="empty response")

    corners = find_corners(raw_text)
    if corners is None:
        return ParseFailure(reason=f"no {BBOX_KEY} array found")

    x1, y1, x2, y2 = corners
    box = BBox.from_corners(x1, y1, x2, y2)
    if _use_per_mille(corners, box, frame_size):
        sx = frame_size.width / PER_MILLE
        sy = frame_size.height / PER_MILLE
        box = BBox.from_corners(x1 * sx, y1 * sy, x2 * sx, y2 * sy)

    box = clamp_box(box, frame_size)
    if box.is_degenerate:
        return ParseFailure(reason="box has no area inside the frame")
    return box


def format_box(box: BBox) -> str:
    """Render a box in the answer grammar, corners rounded to whole pixels."""
    corners = [round(box.x), round(box.y), round(box.x2), round(box.y2)]
    return json.dumps({BBOX_KEY: corners})
