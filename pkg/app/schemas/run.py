"""
Run Configuration

Everything a `track` / `trace` run needs, validated before anything is
written. Serialized into the run manifest (without the bearer token) so a run
can be replayed.
"""

import enum
import os
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.schemas.dataset import LayoutConfig
from app.schemas.localizer import EndpointConfig
from app.schemas.prompting import InstructionTemplate, PromptStyle
from app.schemas.tracker import SearchMode, TrackConfig


class Backend(str, enum.Enum):
    REMOTE = "remote"
    ORACLE = "oracle"
    SCRIPTED = "scripted"


class Executor(str, enum.Enum):
    LOCAL = "local"
    CELERY = "celery"


class RunConfig(BaseModel):
    """Validated configuration of one tracking run."""
    dataset: Path
    layout: LayoutConfig
    out: Path
    sequences: Optional[list[str]] = None

    backend: Backend = Backend.REMOTE
    endpoint: EndpointConfig
    mock_script: Optional[Path] = None
    oracle_offset: tuple[float, float] = (0.0, 0.0)

    vp_enabled: bool = True
    prompt_style: PromptStyle = Field(default_factory=PromptStyle)
    template_file: Optional[Path] = None
    search_mode: SearchMode = SearchMode.GLOBAL
    search_factor: float = Field(2.0, gt=0.0)

    workers: int = Field(1, ge=1)
    executor: Executor = Executor.LOCAL
    transcript: Optional[Path] = None

    @field_validator("dataset")
    @classmethod
    def dataset_exists(cls, v: Path) -> Path:
        if not v.is_dir():
            raise ValueError(f"dataset root {v} is not a directory")
        return v

    @field_validator("out")
    @classmethod
    def out_is_directory(cls, v: Path) -> Path:
        if v.exists() and not v.is_dir():
            raise ValueError(f"output path {v} exists and is not a directory")
        return v

    @field_validator("template_file", "mock_script")
    @classmethod
    def file_exists(cls, v: Optional[Path]) -> Optional[Path]:
        if v is not None and not v.is_file():
            raise ValueError(f"{v} is not a file")
        return v

    @model_validator(mode="after")
    def backend_inputs(self) -> "RunConfig":
        if self.backend == Backend.SCRIPTED and self.mock_script is None:
            raise ValueError("the scripted backend needs a script (transcript) file")
        if self.template_file is not None:
            self.instruction_template()  # surface placeholder errors now
        return self

    def instruction_template(self) -> InstructionTemplate:
        if self.template_file is None:
            return InstructionTemplate()
        return InstructionTemplate.from_file(self.template_file)

    def track_config(self, localizer) -> TrackConfig:
        return TrackConfig(
            vp_enabled=self.vp_enabled,
            prompt_style=self.prompt_style,
            template=self.instruction_template(),
            search_mode=self.search_mode,
            search_factor=self.search_factor,
            localizer=localizer,
        )


def default_workers(max_in_flight: int, remote: bool) -> int:
    """Host parallelism, capped by the in-flight limit for remote runs."""
    cpus = os.cpu_count() or 1
    return max(1, min(cpus, max_in_flight) if remote else cpus)
