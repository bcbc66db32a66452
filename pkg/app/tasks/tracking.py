"""
Sequence Tracking Jobs

One job tracks one sequence and writes its results file. The CLI runs jobs
in a local thread pool or dispatches them as Celery tasks; both paths return
the same summary dict:

    {"status": "completed" | "failed", "sequence", "frames",
     "parse_failures", "transport_failures", "seconds", "error"}
"""

import time
from typing import Iterable, Optional, Union

from pydantic import SecretStr

from app.celery_app import celery_app
from app.config import settings
from app.core.errors import HarnessError
from app.core.logging import get_logger
from app.dataset import load_sequence, write_results
from app.localizer import (
    Localizer,
    OracleLocalizer,
    RemoteLocalizer,
    ScriptedLocalizer,
    TranscriptWriter,
)
from app.schemas.dataset import Sequence
from app.schemas.run import Backend, RunConfig
from app.tracker import Observer, StepCounter, track_sequence

logger = get_logger(__name__)


def build_localizer(config: RunConfig, sequences: Iterable[Sequence]) -> Localizer:
    """Backend selected by the run config; the oracle is built from `sequences`."""
    if config.backend == Backend.ORACLE:
        return OracleLocalizer.from_sequences(sequences, offset=config.oracle_offset)
    if config.backend == Backend.SCRIPTED:
        return ScriptedLocalizer.from_transcript(config.mock_script)

    endpoint = config.endpoint
    if endpoint.api_key is None and settings.LOCALIZER_API_KEY:
        # Tokens never travel inside serialized configs; workers read their own
        endpoint = endpoint.model_copy(update={"api_key": SecretStr(settings.LOCALIZER_API_KEY)})
    return RemoteLocalizer(endpoint)


def results_path(config: RunConfig, sequence_name: str):
    return config.out / f"{sequence_name}.txt"


def run_sequence_job(
    config: RunConfig,
    sequence: Union[Sequence, str],
    localizer: Optional[Localizer] = None,
    observers: Iterable[Observer] = (),
) -> dict:
    """
    Track one sequence and write `<out>/<name>.txt`.

    Harness errors and I/O errors are reported in the summary instead of
    raised, so one bad sequence does not stop the others.
    """
    name = sequence if isinstance(sequence, str) else sequence.name
    summary = {
        "status": "failed",
        "sequence": name,
        "frames": 0,
        "parse_failures": 0,
        "transport_failures": 0,
        "seconds": 0.0,
        "error": None,
    }
    started = time.perf_counter()
    owned = None
    try:
        seq = sequence if isinstance(sequence, Sequence) else load_sequence(config.dataset / name, config.layout)
        if localizer is None:
            localizer = owned = build_localizer(config, [seq])

        counter = StepCounter()
        track = track_sequence(seq, config.track_config(localizer), observers=[counter, *observers])
        write_results(track, results_path(config, seq.name))

        summary.update(
            status="completed",
            frames=len(track.boxes),
            parse_failures=counter.parse_failures,
            transport_failures=counter.transport_failures,
        )
    except (HarnessError, OSError) as e:
        summary["error"] = str(e)
        logger.error("sequence_failed", sequence=name, error=str(e))
    finally:
        if owned is not None:
            owned.close()
        summary["seconds"] = round(time.perf_counter() - started, 3)
    return summary


@celery_app.task(bind=True, name="track_sequence")
def track_sequence_task(self, config_json: str, sequence_name: str) -> dict:
    """
    Track one sequence on a worker.

    Args:
        config_json: RunConfig serialized with model_dump_json()
        sequence_name: Directory name under the dataset root

    Returns:
        dict: Job summary (see module docstring)
    """
    config = RunConfig.model_validate_json(config_json)
    if config.transcript is None:
        return run_sequence_job(config, sequence_name)
    with TranscriptWriter(config.transcript) as transcript:
        return run_sequence_job(config, sequence_name, observers=[transcript])
