# app/prompting/__init__.py
from app.prompting.instructions import build_instruction
from app.prompting.render import (
    draw_box,
    extract_template,
    overlay,
    prompt_rectangle,
    render_prompt,
    stroke_region,
)

__all__ = [
    "build_instruction",
    "draw_box",
    "extract_template",
    "overlay",
    "prompt_rectangle",
    "render_prompt",
    "stroke_region",
]
