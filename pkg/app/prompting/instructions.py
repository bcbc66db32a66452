"""
Instruction Assembly

Builds the text L' that accompanies the template and the (prompted) frame.
"""

from app.schemas.prompting import DESCRIPTION_PLACEHOLDER, InstructionTemplate


def build_instruction(template: InstructionTemplate, description: str, vp_enabled: bool) -> str:
    """
    Fill the template for one query.

    The prompt-rectangle clause is included only when vp_enabled is true, i.e.
    when a rectangle is actually drawn on the frame; otherwise the
    whole-image clause is used. The output-format clause always comes last.

    Raises:
        ValueError: If the description is empty
    """
    if not description or not description.strip():
        raise ValueError("description must not be empty")

    preamble = template.text.replace(DESCRIPTION_PLACEHOLDER, description, 1)
    clause = template.prompt_clause if vp_enabled else template.global_clause
    return "\n".join([preamble, clause, template.output_clause])
