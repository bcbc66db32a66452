"""
Geometry Schemas

Value types shared by every module: axis-aligned boxes and image extents.
Coordinates follow the dataset convention: origin at the top-left corner,
x to the right, y downwards, boxes stored as (x, y, w, h) in pixels.
"""

import math

from pydantic import BaseModel, ConfigDict, Field, field_validator


class ImageSize(BaseModel):
    """Extent of a frame in pixels."""
    width: int = Field(..., ge=1)
    height: int = Field(..., ge=1)

    model_config = ConfigDict(frozen=True)

    @classmethod
    def of(cls, image) -> "ImageSize":
        """Size of a PIL image."""
        return cls(width=image.width, height=image.height)


class BBox(BaseModel):
    """
    Axis-aligned rectangle (x, y, w, h).

    A box with zero width or height is degenerate and stands for an absent
    target; it is still a valid value.
    """
    x: float
    y: float
    w: float = Field(..., ge=0.0)
    h: float = Field(..., ge=0.0)

    model_config = ConfigDict(frozen=True)

    @field_validator("x", "y", "w", "h")
    @classmethod
    def finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("box coordinates must be finite")
        return v

    @classmethod
    def from_corners(cls, x1: float, y1: float, x2: float, y2: float) -> "BBox":
        """Build from two opposite corners given in any order."""
        return cls(x=min(x1, x2), y=min(y1, y2), w=abs(x2 - x1), h=abs(y2 - y1))

    @classmethod
    def empty(cls) -> "BBox":
        return cls(x=0.0, y=0.0, w=0.0, h=0.0)

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def cx(self) -> float:
        return self.x + self.w / 2

    @property
    def cy(self) -> float:
        return self.y + self.h / 2

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def is_degenerate(self) -> bool:
        return self.w == 0 or self.h == 0

    def translate(self, dx: float, dy: float) -> "BBox":
        return BBox(x=self.x + dx, y=self.y + dy, w=self.w, h=self.h)

    def scale(self, s: float) -> "BBox":
        return BBox(x=self.x * s, y=self.y * s, w=self.w * s, h=self.h * s)

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]
