"""
Sequence Directory Layouts

Shipped presets and the key=value layout file reader.

Layout file example (flat key=value, '#' comments allowed):

    image_dir=img
    groundtruth_file=groundtruth.txt
    language_file=nlp.txt
    absence_files=full_occlusion.txt,out_of_view.txt
    image_extensions=.jpg,.png
    sort=natural
"""

from pathlib import Path
from typing import Union

from dotenv import dotenv_values
from pydantic import ValidationError

from app.core.errors import ConfigError
from app.schemas.dataset import FrameSort, LayoutConfig

PRESETS: dict[str, LayoutConfig] = {
    # <seq>/imgs/*.jpg, <seq>/groundtruth.txt, <seq>/language.txt
    "tnl2k": LayoutConfig(
        name="tnl2k",
        image_dir="imgs",
        groundtruth_file="groundtruth.txt",
        language_file="language.txt",
        absence_files=[],
        sort=FrameSort.NATURAL,
    ),
    # Long-term layout: out-of-view and occlusion flags live next to the boxes
    "tnllt": LayoutConfig(
        name="tnllt",
        image_dir="img",
        groundtruth_file="groundtruth.txt",
        language_file="nlp.txt",
        absence_files=["full_occlusion.txt", "out_of_view.txt"],
        sort=FrameSort.NATURAL,
    ),
}

_LIST_KEYS = ("absence_files", "image_extensions")
_KNOWN_KEYS = {"name", "image_dir", "groundtruth_file", "language_file", "sort", *_LIST_KEYS}


def _split_list(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def load_layout(name_or_path: Union[str, Path]) -> LayoutConfig:
    """
    Resolve a preset name or read a layout file.

    Raises:
        ConfigError: Unknown preset, unreadable file, unknown keys or invalid values
    """
    key = str(name_or_path)
    if key in PRESETS:
        return PRESETS[key]

    path = Path(key)
    if not path.is_file():
        raise ConfigError(
            f"layout {key!r} is neither a preset ({', '.join(sorted(PRESETS))}) nor a file"
        )

    raw = dotenv_values(path)
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown layout keys: {', '.join(sorted(unknown))}")

    values: dict = {k: (v or "") for k, v in raw.items()}
    for list_key in _LIST_KEYS:
        if list_key in values:
            values[list_key] = _split_list(values[list_key])
    values.setdefault("name", path.stem)

    try:
        return LayoutConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"{path}: invalid layout: {e}") from e


def dump_layout(layout: LayoutConfig) -> str:
    """Render a layout back to the key=value file format."""
    lines = [
        f"name={layout.name}",
        f"image_dir={layout.image_dir}",
        f"groundtruth_file={layout.groundtruth_file}",
        f"language_file={layout.language_file}",
        f"absence_files={','.join(layout.absence_files)}",
        f"image_extensions={','.join(layout.image_extensions)}",
        f"sort={layout.sort.value}",
    ]
    return "\n".join(lines) + "\n"
