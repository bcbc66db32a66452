"""
VPTrack Command Line

Operator entry points binding the harness modules into runnable commands.

Usage:
    python -m app track --dataset data/TNL2K_test --layout tnl2k --out runs/vp
    python -m app track --dataset data/TNL2K_test --mock-oracle --out runs/oracle
    python -m app track --replay-manifest runs/vp/manifest.json --out runs/vp_again
    python -m app eval --dataset data/TNL2K_test --results runs/vp --baseline runs/novp
    python -m app gensamples --tnl2k data/TNL2K_train --tnllt data/TNLLT_train --count 1000 --out samples
    python -m app trace --dataset data/TNL2K_test --sequence Baseball_game_002 --out traces/bg2

Configuration priority: environment / .env (Settings) < --config FILE
(key=value, same names as the long flags with '_' for '-') < flags.

Exit codes: 0 success, 1 one or more sequences failed, 2 configuration or
usage error (nothing is written in that case).
"""

import argparse
import json
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, Field, ValidationError

from app.config import parse_color, settings
from app.core.errors import ConfigError, DataError, EvaluationError, HarnessError
from app.core.logging import configure_logging, get_logger
from app.dataset import load_layout, load_sequence, load_split, read_results, write_results
from app.localizer import TranscriptWriter
from app.metrics import compare, evaluate, format_delta, format_table, write_report
from app.samplegen import generate
from app.schemas.dataset import ResultTrack, Sequence
from app.schemas.localizer import EndpointConfig
from app.schemas.prompting import InstructionTemplate, PromptStyle
from app.schemas.run import Backend, Executor, RunConfig, default_workers
from app.schemas.samples import GenConfig, JitterConfig, SourceDataset
from app.schemas.tracker import SearchMode
from app.tasks.tracking import build_localizer, run_sequence_job, track_sequence_task
from app.tracker import TraceDumper, track_sequence

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2

MANIFEST_FILE = "manifest.json"
MANIFEST_SCHEMA_VERSION = 1

# Keys accepted in --config files and as flag destinations for track/trace
RUN_KEYS = {
    "dataset", "layout", "out", "sequences", "backend", "mock_script", "oracle_offset",
    "endpoint", "model", "timeout", "max_attempts", "backoff", "max_in_flight",
    "temperature", "vp_enabled", "prompt_color", "prompt_thickness", "enlarge_factor",
    "template", "search_mode", "search_factor", "workers", "executor", "transcript",
}


class RunManifest(BaseModel):
    """`manifest.json` written next to the results files."""
    schema_version: int = MANIFEST_SCHEMA_VERSION
    command: str
    config: dict[str, Any]
    versions: dict[str, Optional[str]]
    started_at: str
    finished_at: str
    seconds: float
    status: str
    sequences: list[dict[str, Any]] = Field(default_factory=list)


# ===== Value Conversion =====

def _list(value) -> Optional[list[str]]:
    if value is None or isinstance(value, list):
        return value
    items = [v.strip() for v in str(value).split(",") if v.strip()]
    return items or None


def _pair(value) -> tuple[float, float]:
    if isinstance(value, (tuple, list)):
        a, b = value
        return float(a), float(b)
    parts = [p.strip() for p in str(value).split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 'A,B', got {value!r}")
    return float(parts[0]), float(parts[1])


def _optional_float(value) -> Optional[float]:
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none")):
        return None
    return float(value)


def _thickness(value):
    if isinstance(value, int) or str(value).strip() == "auto":
        return value if isinstance(value, int) else "auto"
    return int(value)


def _color(value) -> tuple[int, int, int]:
    return tuple(value) if isinstance(value, (tuple, list)) else parse_color(str(value))


def prompt_style_from(values: dict) -> PromptStyle:
    return PromptStyle(
        color=_color(values["prompt_color"]),
        thickness=_thickness(values["prompt_thickness"]),
        enlarge_factor=values["enlarge_factor"],
    )


# ===== Run Configuration =====

def _settings_defaults() -> dict:
    return {
        "layout": "tnl2k",
        "backend": Backend.REMOTE.value,
        "endpoint": settings.LOCALIZER_BASE_URL,
        "model": settings.LOCALIZER_MODEL,
        "timeout": settings.LOCALIZER_TIMEOUT,
        "max_attempts": settings.LOCALIZER_MAX_ATTEMPTS,
        "backoff": settings.LOCALIZER_BACKOFF_SECONDS,
        "max_in_flight": settings.LOCALIZER_MAX_IN_FLIGHT,
        "temperature": settings.LOCALIZER_TEMPERATURE,
        "vp_enabled": True,
        "prompt_color": settings.PROMPT_COLOR,
        "prompt_thickness": settings.PROMPT_THICKNESS,
        "enlarge_factor": settings.PROMPT_ENLARGE_FACTOR,
        "search_mode": SearchMode.GLOBAL.value,
        "search_factor": settings.SEARCH_FACTOR,
        "executor": Executor.LOCAL.value,
    }


def read_config_file(path) -> dict:
    """
    Flat key=value run configuration.

    Raises:
        ConfigError: Missing file or unknown keys
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    values = {k: v for k, v in dotenv_values(path).items() if v is not None}
    unknown = set(values) - RUN_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown keys: {', '.join(sorted(unknown))}")
    return _infer_backend(values, str(path))


def _infer_backend(values: dict, source: str) -> dict:
    # Naming a script selects the scripted backend unless a backend is given
    if values.get("mock_script") is not None:
        backend = values.get("backend")
        if backend is None:
            values["backend"] = Backend.SCRIPTED.value
        elif backend != Backend.SCRIPTED.value:
            raise ConfigError(f"{source}: a mock script cannot be combined with backend {backend!r}")
    return values


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """
    Merge Settings < --config file < flags and validate.

    Raises:
        ConfigError: On any invalid or missing setting
    """
    if getattr(args, "replay_manifest", None):
        return replay_run_config(args)

    values = _settings_defaults()
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    flags = {k: v for k, v in vars(args).items() if k in RUN_KEYS and v is not None}
    values.update(_infer_backend(flags, "command line"))

    for required in ("dataset", "out"):
        if not values.get(required):
            raise ConfigError(f"missing required setting --{required}")

    try:
        endpoint = EndpointConfig(
            base_url=values["endpoint"],
            model=values["model"],
            api_key=settings.LOCALIZER_API_KEY,
            timeout=values["timeout"],
            max_attempts=values["max_attempts"],
            backoff_seconds=values["backoff"],
            temperature=_optional_float(values["temperature"]),
            max_in_flight=values["max_in_flight"],
        )
        backend = Backend(values["backend"])
        workers = values.get("workers") or default_workers(endpoint.max_in_flight, backend == Backend.REMOTE)
        return RunConfig(
            dataset=Path(values["dataset"]),
            layout=load_layout(values["layout"]),
            out=Path(values["out"]),
            sequences=_list(values.get("sequences")),
            backend=backend,
            endpoint=endpoint,
            mock_script=values.get("mock_script"),
            oracle_offset=_pair(values.get("oracle_offset") or (0.0, 0.0)),
            vp_enabled=values["vp_enabled"],
            prompt_style=prompt_style_from(values),
            template_file=values.get("template"),
            search_mode=values["search_mode"],
            search_factor=values["search_factor"],
            workers=workers,
            executor=values["executor"],
            transcript=values.get("transcript"),
        )
    except (ValidationError, ValueError) as e:
        raise ConfigError(f"invalid configuration: {e}") from e


def replay_run_config(args: argparse.Namespace) -> RunConfig:
    """Config snapshot of an earlier run, redirected to a new output directory."""
    path = Path(args.replay_manifest)
    if not path.is_file():
        raise ConfigError(f"manifest {path} not found")
    if not args.out:
        raise ConfigError("missing required setting --out")
    try:
        manifest = RunManifest.model_validate_json(path.read_text(encoding="utf-8"))
        data = dict(manifest.config)
        data["out"] = args.out
        data["transcript"] = args.transcript  # never append to the original run's transcript
        return RunConfig.model_validate(data)
    except (ValidationError, ValueError) as e:
        raise ConfigError(f"{path}: cannot replay: {e}") from e


def _versions() -> dict[str, Optional[str]]:
    versions = {"vptrack": settings.APP_VERSION, "python": platform.python_version()}
    for package in ("pydantic", "pillow", "numpy", "httpx", "tenacity", "celery"):
        try:
            versions[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            versions[package] = None
    return versions


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _failed_summary(name: str, error: str) -> dict:
    return {
        "status": "failed", "sequence": name, "frames": 0, "parse_failures": 0,
        "transport_failures": 0, "seconds": 0.0, "error": error,
    }


def _unexpected_failure(name: str, error: Exception) -> dict:
    logger.error("sequence_job_crashed", sequence=name, error=repr(error))
    return _failed_summary(name, f"{type(error).__name__}: {error}")


def _load_for_run(config: RunConfig):
    if config.sequences:
        unknown = [n for n in config.sequences if not (config.dataset / n).is_dir()]
        if unknown:
            raise ConfigError(f"unknown sequences: {', '.join(unknown)}")
    return load_split(config.dataset, config.layout, workers=config.workers, names=config.sequences)


# ===== Commands =====

def execute(config: RunConfig, sequences: list[Sequence]) -> list[dict]:
    """
    Run every sequence with the configured executor; one summary each.

    A sequence that fails in any way (task error, result timeout, unexpected
    exception) becomes a failed summary; the other sequences still run.
    """
    if config.executor == Executor.CELERY:
        payload = config.model_dump_json()
        pending = {}
        summaries = []
        for seq in sequences:
            try:
                pending[seq.name] = track_sequence_task.delay(payload, seq.name)
            except Exception as e:
                summaries.append(_unexpected_failure(seq.name, e))
        for name, result in pending.items():
            try:
                summaries.append(result.get(timeout=settings.CELERY_TASK_TIME_LIMIT))
            except Exception as e:
                summaries.append(_unexpected_failure(name, e))
        return summaries

    localizer = build_localizer(config, sequences)
    transcript = TranscriptWriter(config.transcript) if config.transcript else None
    observers = [transcript] if transcript else []

    def job(seq: Sequence) -> dict:
        try:
            return run_sequence_job(config, seq, localizer, observers)
        except Exception as e:
            return _unexpected_failure(seq.name, e)

    try:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(job, sequences))
    finally:
        localizer.close()
        if transcript is not None:
            transcript.close()


def cmd_track(args: argparse.Namespace) -> int:
    """Track every sequence of a split and write results plus a run manifest."""
    config = build_run_config(args)
    split = _load_for_run(config)

    started_at = _now()
    started = time.perf_counter()
    config.out.mkdir(parents=True, exist_ok=True)
    if config.transcript:
        config.transcript.parent.mkdir(parents=True, exist_ok=True)
        config.transcript.write_text("", encoding="utf-8")

    summaries = execute(config, split.sequences)
    summaries += [_failed_summary(f.name, f.error) for f in split.failures]
    summaries.sort(key=lambda s: s["sequence"])

    failed = [s for s in summaries if s["status"] != "completed"]
    manifest = RunManifest(
        command="track",
        config=json.loads(config.model_dump_json()),
        versions=_versions(),
        started_at=started_at,
        finished_at=_now(),
        seconds=round(time.perf_counter() - started, 3),
        status="completed" if not failed else "partial",
        sequences=summaries,
    )
    (config.out / MANIFEST_FILE).write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")

    print(f"tracked {len(summaries) - len(failed)}/{len(summaries)} sequences -> {config.out}")
    for s in failed:
        print(f"FAILED {s['sequence']}: {s['error']}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_PARTIAL


def _collect_tracks(results_dir: Path, sequences: list[Sequence]) -> tuple[dict[str, ResultTrack], dict[str, str]]:
    tracks, problems = {}, {}
    for seq in sequences:
        try:
            track = read_results(results_dir / f"{seq.name}.txt", seq.name)
        except DataError as e:
            problems[seq.name] = str(e)
            continue
        if len(track.boxes) != len(seq):
            problems[seq.name] = f"{len(track.boxes)} results for {len(seq)} frames"
            continue
        tracks[seq.name] = track
    return tracks, problems


def cmd_eval(args: argparse.Namespace) -> int:
    """Score a results directory (and optionally a baseline) against a split."""
    layout = load_layout(args.layout)
    results_dir = Path(args.results)
    if not results_dir.is_dir():
        raise ConfigError(f"results directory {results_dir} not found")
    baseline_dir = Path(args.baseline) if args.baseline else None
    if baseline_dir is not None and not baseline_dir.is_dir():
        raise ConfigError(f"baseline directory {baseline_dir} not found")
    if not Path(args.dataset).is_dir():
        raise ConfigError(f"dataset root {args.dataset} is not a directory")

    split = load_split(args.dataset, layout, workers=args.workers, names=_list(args.sequences))
    problems = {f.name: f"load failed: {f.error}" for f in split.failures}

    tracks, track_problems = _collect_tracks(results_dir, split.sequences)
    problems.update(track_problems)
    baseline_tracks = {}
    if baseline_dir is not None:
        baseline_tracks, baseline_problems = _collect_tracks(baseline_dir, split.sequences)
        problems.update({n: f"baseline: {p}" for n, p in baseline_problems.items()})

    usable = [s for s in split.sequences if s.name in tracks and (baseline_dir is None or s.name in baseline_tracks)]
    for name, problem in sorted(problems.items()):
        print(f"MISMATCH {name}: {problem}", file=sys.stderr)
    if not usable:
        print("no sequence could be evaluated", file=sys.stderr)
        return EXIT_PARTIAL

    try:
        result = evaluate([tracks[s.name] for s in usable], usable, workers=args.workers)
        delta = None
        if baseline_dir is not None:
            delta = compare(result, evaluate([baseline_tracks[s.name] for s in usable], usable, workers=args.workers))
    except EvaluationError as e:
        print(f"MISMATCH {e}", file=sys.stderr)
        return EXIT_PARTIAL

    out_dir = Path(args.out) if args.out else results_dir
    write_report(result, out_dir, delta=delta, per_sequence_curves=args.per_sequence_curves)

    print(format_table(result))
    if delta is not None:
        print()
        print(format_delta(delta, run_label=results_dir.name, baseline_label=baseline_dir.name))
    return EXIT_OK if not problems else EXIT_PARTIAL


def cmd_gensamples(args: argparse.Namespace) -> int:
    """Generate fine-tuning samples from one or two source splits."""
    roots = {}
    layouts = {}
    for dataset, root, layout_name in (
        (SourceDataset.TNL2K, args.tnl2k, args.tnl2k_layout),
        (SourceDataset.TNLLT, args.tnllt, args.tnllt_layout),
    ):
        if root is None:
            continue
        if not Path(root).is_dir():
            raise ConfigError(f"{dataset.value} root {root} is not a directory")
        roots[dataset] = Path(root)
        layouts[dataset] = load_layout(layout_name)

    values = _settings_defaults()
    values.update({k: v for k, v in vars(args).items() if k in RUN_KEYS and v is not None})
    try:
        scale = _pair(args.scale_range) if args.scale_range else JitterConfig().scale_range
        cfg = GenConfig(
            total_count=args.count,
            mix_ratio=args.mix,
            negative_fraction=args.neg_frac,
            max_temporal_gap=args.max_gap,
            jitter=JitterConfig(center_sigma=args.center_sigma, scale_range=scale),
            seed=args.seed,
        )
        style = prompt_style_from(values)
        template = InstructionTemplate.from_file(args.template) if args.template else InstructionTemplate()
    except (ValidationError, ValueError, OSError) as e:
        raise ConfigError(f"invalid configuration: {e}") from e

    if cfg.mix_ratio > 0 and SourceDataset.TNL2K not in roots:
        raise ConfigError("--mix > 0 needs --tnl2k")
    if cfg.mix_ratio < 1 and SourceDataset.TNLLT not in roots:
        raise ConfigError("--mix < 1 needs --tnllt")

    summary = generate(cfg, roots, args.out, layouts=layouts, style=style, template=template, workers=args.workers)
    print(summary.model_dump_json(indent=2))
    return EXIT_OK


def cmd_trace(args: argparse.Namespace) -> int:
    """Track one sequence and dump every request, response and overlay."""
    config = build_run_config(args)
    if not (config.dataset / args.sequence).is_dir():
        raise ConfigError(f"unknown sequence: {args.sequence}")
    seq = load_sequence(config.dataset / args.sequence, config.layout)

    config.out.mkdir(parents=True, exist_ok=True)
    localizer = build_localizer(config, [seq])
    dumper = TraceDumper(
        config.out,
        seq.groundtruth,
        seq.absent,
        style=config.prompt_style,
        vp_enabled=config.vp_enabled and config.search_mode == SearchMode.GLOBAL,
    )
    observers = [dumper]
    transcript = TranscriptWriter(config.transcript) if config.transcript else None
    if transcript is not None:
        observers.append(transcript)
    try:
        track = track_sequence(seq, config.track_config(localizer), observers=observers)
    finally:
        dumper.close()
        localizer.close()
        if transcript is not None:
            transcript.close()

    write_results(track, config.out / f"{seq.name}.txt")
    print(f"traced {len(track.boxes)} frames of {seq.name} -> {config.out}")
    return EXIT_OK


# ===== Parser =====

def _add_prompt_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prompt-color", dest="prompt_color", help="R,G,B of the drawn rectangle")
    p.add_argument("--prompt-thickness", dest="prompt_thickness", help="'auto' or stroke width in px")
    p.add_argument("--enlarge-factor", dest="enlarge_factor", type=float,
                   help="scale applied to the previous box before drawing")
    p.add_argument("--template", help="plain-text instruction preamble with {description}")


def _add_run_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", help="split root: one directory per sequence")
    p.add_argument("--layout", help="preset (tnl2k, tnllt) or key=value layout file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--config", help="key=value run configuration file")

    backend = p.add_mutually_exclusive_group()
    backend.add_argument("--mock-oracle", dest="backend", action="store_const", const=Backend.ORACLE.value,
                         help="answer with ground truth (offline)")
    backend.add_argument("--mock-script", dest="mock_script",
                         help="replay raw answers from a transcript file (offline)")
    p.add_argument("--oracle-offset", dest="oracle_offset", help="DX,DY shift applied by the oracle")

    p.add_argument("--endpoint", help="chat-completions base URL (e.g. http://host:8000/v1)")
    p.add_argument("--model", help="model name sent to the endpoint")
    p.add_argument("--timeout", type=float, help="seconds per attempt")
    p.add_argument("--max-attempts", dest="max_attempts", type=int)
    p.add_argument("--backoff", type=float, help="first retry delay in seconds (doubles)")
    p.add_argument("--max-in-flight", dest="max_in_flight", type=int)
    p.add_argument("--temperature", help="sampling temperature; 'none' omits the field")

    p.add_argument("--no-vp", dest="vp_enabled", action="store_const", const=False,
                   help="ablation: never draw the rectangle nor mention it")
    _add_prompt_arguments(p)
    p.add_argument("--search-mode", dest="search_mode", choices=[m.value for m in SearchMode])
    p.add_argument("--search-factor", dest="search_factor", type=float,
                   help="crop scale for --search-mode local")
    p.add_argument("--workers", type=int)
    p.add_argument("--transcript", help="append one JSON line per query to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vptrack", description="Global vision-language tracking harness")
    parser.add_argument("--log-level", dest="log_level", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    track = sub.add_parser("track", help="run the tracker over a split")
    _add_run_arguments(track)
    track.add_argument("--sequences", help="comma-separated subset of sequence names")
    track.add_argument("--executor", choices=[e.value for e in Executor])
    track.add_argument("--replay-manifest", dest="replay_manifest",
                       help="re-run with the configuration stored in a run manifest")
    track.set_defaults(handler=cmd_track)

    ev = sub.add_parser("eval", help="score results against ground truth")
    ev.add_argument("--dataset", required=True)
    ev.add_argument("--layout", default="tnl2k")
    ev.add_argument("--results", required=True, help="directory of <sequence>.txt files")
    ev.add_argument("--baseline", help="second results directory to compare against")
    ev.add_argument("--out", help="report directory (default: the results directory)")
    ev.add_argument("--sequences")
    ev.add_argument("--per-sequence-curves", dest="per_sequence_curves", action="store_true")
    ev.add_argument("--workers", type=int, default=1)
    ev.set_defaults(handler=cmd_eval)

    gen = sub.add_parser("gensamples", help="generate visual-prompt fine-tuning samples")
    gen.add_argument("--tnl2k", help="TNL2K-style split root")
    gen.add_argument("--tnllt", help="TNLLT-style split root")
    gen.add_argument("--tnl2k-layout", dest="tnl2k_layout", default="tnl2k")
    gen.add_argument("--tnllt-layout", dest="tnllt_layout", default="tnllt")
    gen.add_argument("--count", type=int, default=1000)
    gen.add_argument("--mix", type=float, default=0.7, help="share of TNL2K samples")
    gen.add_argument("--neg-frac", dest="neg_frac", type=float, default=0.2)
    gen.add_argument("--max-gap", dest="max_gap", type=int, default=30)
    gen.add_argument("--center-sigma", dest="center_sigma", type=float, default=0.1)
    gen.add_argument("--scale-range", dest="scale_range", help="LOW,HIGH (default 0.8,1.25)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--workers", type=int, default=4)
    _add_prompt_arguments(gen)
    gen.set_defaults(handler=cmd_gensamples)

    trace = sub.add_parser("trace", help="dump every step of one sequence")
    _add_run_arguments(trace)
    trace.add_argument("--sequence", required=True)
    trace.set_defaults(handler=cmd_trace, executor=None, sequences=None, replay_manifest=None)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except HarnessError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
