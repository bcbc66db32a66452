"""
Prompting Schemas

Visual prompt styling and the instruction template sent with every query.
"""

from pathlib import Path
from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

DESCRIPTION_PLACEHOLDER = "{description}"

# The answer grammar the parser understands; every instruction quotes it verbatim.
OUTPUT_FORMAT = '{"bbox_2d": [x1, y1, x2, y2]}'

DEFAULT_PREAMBLE = (
    "The first image is a template showing the target object as it appeared "
    "in the first frame of a video.\n"
    "The second image is the current frame of the same video.\n"
    "Target description: {description}\n"
    "Locate this target in the current frame."
)

DEFAULT_PROMPT_CLAUSE = (
    "A rectangle has been drawn on the current frame around the target's "
    "previous location. Search inside this rectangle first; if the target is "
    "not inside it, search the whole image."
)

DEFAULT_GLOBAL_CLAUSE = "Search the whole image for the target."

DEFAULT_OUTPUT_CLAUSE = (
    f"Answer with a single line {OUTPUT_FORMAT} giving the target's bounding "
    "box in absolute pixel coordinates of the full current frame image."
)


class PromptStyle(BaseModel):
    """How the previous-location rectangle is drawn."""
    color: tuple[int, int, int] = (255, 0, 0)
    thickness: Union[int, Literal["auto"]] = "auto"
    enlarge_factor: float = Field(2.0, gt=0.0)

    model_config = ConfigDict(frozen=True)

    @field_validator("color")
    @classmethod
    def rgb_range(cls, v: tuple[int, int, int]) -> tuple[int, int, int]:
        if any(c < 0 or c > 255 for c in v):
            raise ValueError("color channels must be in 0..255")
        return v

    @field_validator("thickness")
    @classmethod
    def positive_thickness(cls, v):
        if v != "auto" and v < 1:
            raise ValueError("thickness must be >= 1 or 'auto'")
        return v

    def stroke_for(self, width: int, height: int) -> int:
        """Stroke width in pixels for a frame of the given size."""
        if self.thickness == "auto":
            return max(2, round(0.004 * max(width, height)))
        return int(self.thickness)


class InstructionTemplate(BaseModel):
    """
    Instruction text L' sent alongside the images.

    `text` is the preamble and must contain {description} exactly once. The
    prompt clause is appended only when a rectangle is actually drawn; the
    output clause always closes the instruction.
    """
    text: str = DEFAULT_PREAMBLE
    prompt_clause: str = DEFAULT_PROMPT_CLAUSE
    global_clause: str = DEFAULT_GLOBAL_CLAUSE
    output_clause: str = DEFAULT_OUTPUT_CLAUSE

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_contract(self) -> "InstructionTemplate":
        count = self.text.count(DESCRIPTION_PLACEHOLDER)
        if count != 1:
            raise ValueError(
                f"template must contain {DESCRIPTION_PLACEHOLDER} exactly once (found {count})"
            )
        if OUTPUT_FORMAT not in self.output_clause:
            raise ValueError(f"output clause must state the format {OUTPUT_FORMAT} verbatim")
        return self

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "InstructionTemplate":
        """Load a custom preamble from a UTF-8 text file."""
        text = Path(path).read_text(encoding="utf-8").strip("\n")
        return cls(text=text)
