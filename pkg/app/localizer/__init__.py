# app/localizer/__init__.py
from app.localizer.base import Localizer
from app.localizer.mock import OracleLocalizer, ScriptedLocalizer
from app.localizer.parser import find_corners, format_box, parse_box
from app.localizer.remote import RemoteLocalizer, build_payload, encode_payload
from app.localizer.transcript import TranscriptWriter, load_transcript

__all__ = [
    "Localizer",
    "OracleLocalizer",
    "RemoteLocalizer",
    "ScriptedLocalizer",
    "TranscriptWriter",
    "build_payload",
    "encode_payload",
    "find_corners",
    "format_box",
    "load_transcript",
    "parse_box",
]
