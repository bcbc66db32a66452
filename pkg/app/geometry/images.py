"""
Image Regions

Pixel-grid operations on PIL images. Box origins are floored and far edges
ceiled before clamping, so a crop always covers the whole real-valued box.
"""

import hashlib
import math

from PIL import Image

from app.core.errors import EmptyCropError
from app.schemas.geometry import BBox, ImageSize


def pixel_region(b: BBox, bounds: ImageSize) -> tuple[int, int, int, int]:
    """
    Integer region (x0, y0, x1, y1) covered by a box, far edges exclusive.

    Raises:
        EmptyCropError: If the clamped region holds no pixel
    """
    if b.is_degenerate:
        raise EmptyCropError("empty crop: degenerate box")

    x0 = min(max(math.floor(b.x), 0), bounds.width)
    y0 = min(max(math.floor(b.y), 0), bounds.height)
    x1 = min(max(math.ceil(b.x2), 0), bounds.width)
    y1 = min(max(math.ceil(b.y2), 0), bounds.height)
    if x1 <= x0 or y1 <= y0:
        raise EmptyCropError()
    return x0, y0, x1, y1


def crop(image: Image.Image, b: BBox) -> Image.Image:
    """
    Copy the pixels under a box.

    Pixel (i, j) of the result equals source pixel (x0 + i, y0 + j) where
    (x0, y0) is the clamped integer origin.

    Raises:
        EmptyCropError: If the box does not intersect the image
    """
    region = pixel_region(b, ImageSize.of(image))
    return image.crop(region)


def region_box(region: tuple[int, int, int, int]) -> BBox:
    """BBox covering an integer pixel region."""
    x0, y0, x1, y1 = region
    return BBox(x=x0, y=y0, w=x1 - x0, h=y1 - y0)


def image_digest(image: Image.Image) -> str:
    """SHA-256 over mode, size and raw pixels; equal digests mean equal pixels."""
    h = hashlib.sha256()
    h.update(f"{image.mode}:{image.width}x{image.height}:".encode())
    h.update(image.tobytes())
    return h.hexdigest()


def load_frame(path) -> Image.Image:
    """Read a frame as an RGB image, fully loaded into memory."""
    with Image.open(path) as im:
        return im.convert("RGB")
