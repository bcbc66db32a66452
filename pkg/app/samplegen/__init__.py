# app/samplegen/__init__.py
from app.samplegen.generator import generate, load_pools, manifest_line
from app.samplegen.sampler import (
    check_pools,
    draw_sample,
    place_negative,
    place_positive,
    search_candidates,
)

__all__ = [
    "check_pools",
    "draw_sample",
    "generate",
    "load_pools",
    "manifest_line",
    "place_negative",
    "place_positive",
    "search_candidates",
]
