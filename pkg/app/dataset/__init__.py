# app/dataset/__init__.py
from app.dataset.layouts import PRESETS, dump_layout, load_layout
from app.dataset.loader import load_sequence, load_split, natural_key
from app.dataset.results import read_results, write_results

__all__ = [
    "PRESETS",
    "dump_layout",
    "load_layout",
    "load_sequence",
    "load_split",
    "natural_key",
    "read_results",
    "write_results",
]
