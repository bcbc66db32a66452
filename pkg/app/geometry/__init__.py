# app/geometry/__init__.py
from app.geometry.boxes import (
    center_error,
    clamp_box,
    contains,
    enlarge,
    iou,
    normalized_center_error,
    quantize,
)
from app.geometry.images import crop, image_digest, load_frame, pixel_region, region_box

__all__ = [
    "center_error",
    "clamp_box",
    "contains",
    "crop",
    "enlarge",
    "image_digest",
    "iou",
    "load_frame",
    "normalized_center_error",
    "pixel_region",
    "quantize",
    "region_box",
]
