"""
Box Arithmetic

Pure functions over BBox values. Everything is computed in real arithmetic;
rounding to the pixel grid happens only in app.geometry.images.
"""

import math

from app.core.errors import DegenerateBoxError
from app.schemas.geometry import BBox, ImageSize


def iou(a: BBox, b: BBox) -> float:
    """
    Intersection over union of two boxes.

    A degenerate box has IoU 0 with everything (no error is raised).
    """
    if a.is_degenerate or b.is_degenerate:
        return 0.0

    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0

    inter = iw * ih
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return min(1.0, max(0.0, inter / union))


def center_error(a: BBox, b: BBox) -> float:
    """
    Euclidean distance between box centers, in pixels.

    Raises:
        DegenerateBoxError: If either box is degenerate
    """
    if a.is_degenerate or b.is_degenerate:
        raise DegenerateBoxError("center error is undefined for a degenerate box")
    return math.hypot(a.cx - b.cx, a.cy - b.cy)


def normalized_center_error(pred: BBox, gt: BBox) -> float:
    """
    Center offset measured in units of the ground-truth width and height.

    Raises:
        DegenerateBoxError: If the ground-truth box is degenerate
    """
    if gt.is_degenerate:
        raise DegenerateBoxError("normalized center error needs a non-degenerate ground truth")
    return math.hypot((pred.cx - gt.cx) / gt.w, (pred.cy - gt.cy) / gt.h)


def _clamp_axis(start: float, length: float, limit: int) -> tuple[float, float]:
    # Untouched when already inside so enlarge(b, 1.0) returns b bit-for-bit
    if start >= 0 and start + length <= limit:
        return start, length
    lo = min(max(start, 0.0), float(limit))
    hi = min(max(start + length, 0.0), float(limit))
    return lo, hi - lo


def clamp_box(b: BBox, bounds: ImageSize) -> BBox:
    """Intersect a box with the image rectangle [0, width] x [0, height]."""
    x, w = _clamp_axis(b.x, b.w, bounds.width)
    y, h = _clamp_axis(b.y, b.h, bounds.height)
    return BBox(x=x, y=y, w=w, h=h)


def contains(bounds: ImageSize, b: BBox) -> bool:
    """True if the box lies inside the image rectangle."""
    return b.x >= 0 and b.y >= 0 and b.x2 <= bounds.width and b.y2 <= bounds.height


def enlarge(b: BBox, factor: float, bounds: ImageSize) -> BBox:
    """
    Scale a box about its center, then clamp it to the image.

    The result may be degenerate when the box lies fully outside the image;
    callers decide what that means.

    Raises:
        DegenerateBoxError: If b is degenerate
        ValueError: If factor is not positive
    """
    if factor <= 0:
        raise ValueError(f"enlarge factor must be positive, got {factor}")
    if b.is_degenerate:
        raise DegenerateBoxError("cannot enlarge a degenerate box")

    nw = b.w * factor
    nh = b.h * factor
    grown = BBox(x=b.x - (nw - b.w) / 2, y=b.y - (nh - b.h) / 2, w=nw, h=nh)
    return clamp_box(grown, bounds)


def quantize(b: BBox, bounds: ImageSize) -> BBox:
    """Snap corners to the nearest integer pixel and clamp to the image."""
    x1 = min(max(round(b.x), 0), bounds.width)
    y1 = min(max(round(b.y), 0), bounds.height)
    x2 = min(max(round(b.x2), 0), bounds.width)
    y2 = min(max(round(b.y2), 0), bounds.height)
    return BBox.from_corners(x1, y1, x2, y2)
