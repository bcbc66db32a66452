"""
Results Files

One 'x,y,w,h' row per frame, fixed two-decimal formatting, UTF-8, LF endings.
"""

from pathlib import Path
from typing import Optional, Union

from pydantic import ValidationError

from app.core.errors import DataError
from app.schemas.dataset import ResultTrack
from app.schemas.geometry import BBox


def format_row(box: BBox) -> str:
    return f"{box.x:.2f},{box.y:.2f},{box.w:.2f},{box.h:.2f}"


def write_results(track: ResultTrack, path: Union[str, Path]) -> Path:
    """Write a track to disk, creating parent directories as needed."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = "".join(format_row(b) + "\n" for b in track.boxes)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(body)
    return path


def read_results(path: Union[str, Path], sequence_name: Optional[str] = None) -> ResultTrack:
    """
    Read a results file back into a ResultTrack.

    The sequence name defaults to the file stem.

    Raises:
        DataError: Missing file or any malformed line (with its line number)
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(path, "results file not found")

    lines = path.read_text(encoding="utf-8").splitlines()
    while lines and not lines[-1].strip():
        lines.pop()

    boxes = []
    for i, line in enumerate(lines, start=1):
        fields = line.strip().split(",")
        if len(fields) != 4:
            raise DataError(path, f"expected 4 comma-separated values: {line!r}", i)
        try:
            x, y, w, h = (float(f) for f in fields)
            boxes.append(BBox(x=x, y=y, w=w, h=h))
        except (ValueError, ValidationError):
            raise DataError(path, f"malformed row: {line!r}", i) from None

    return ResultTrack(sequence_name=sequence_name or path.stem, boxes=boxes)
