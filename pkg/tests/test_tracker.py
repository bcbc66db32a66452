"""
Tests for the recursive tracker.

Covers:
- init: template crop and the init step record
- oracle backend reproduces the ground truth (and a constant shift)
- parse-failure / transport-failure fallback and the promptless latch
- prompt placement: the drawn rectangle is always enlarge(B_{t-1})
- VP disabled sends frames untouched
- local-crop search mode
- absent spans, unreadable frames, transcript replay, trace dumps
"""

from unittest.mock import MagicMock

import pytest
from PIL import Image

from app.core.errors import DataError, DegenerateBoxError, LocalizerTimeoutError, LocalizerTransportError
from app.dataset import PRESETS, load_sequence
from app.dataset.synthetic import make_synthetic_split
from app.geometry import clamp_box, enlarge, load_frame
from app.localizer import OracleLocalizer, ScriptedLocalizer, TranscriptWriter, format_box, load_transcript
from app.localizer.base import Localizer
from app.prompting import render_prompt
from app.schemas.geometry import BBox
from app.schemas.tracker import SearchMode, TrackConfig
from app.tracker import StepCounter, TraceDumper, init_tracker, step, track_sequence
from app.tracker.trace import INIT_MARKER


def perfect_script(seq, overrides=None) -> ScriptedLocalizer:
    script = {(seq.name, k): format_box(seq.groundtruth[k - 1]) for k in range(2, len(seq) + 1)}
    script.update({(seq.name, k): raw for k, raw in (overrides or {}).items()})
    return ScriptedLocalizer(script)


class FailingAt(Localizer):
    """Oracle answers except for one frame, where it raises the given error."""

    def __init__(self, inner: Localizer, frame_index: int, error: Exception):
        self.inner = inner
        self.frame_index = frame_index
        self.error = error

    def localize(self, request):
        if request.frame_index == self.frame_index:
            raise self.error
        return self.inner.localize(request)


def run(seq, localizer, **cfg):
    records = []
    track = track_sequence(seq, TrackConfig(localizer=localizer, **cfg), observers=[records.append])
    return track, records


def queried(records):
    return {r.frame_index: r for r in records if not r.is_init}


# ---------------------------------------------------------------------------
# Initialization
# ---------------------------------------------------------------------------

class TestInit:
    def test_template_is_exact_crop(self, sequences):
        seq = sequences[0]
        frame = load_frame(seq.frames[0])
        b1 = seq.groundtruth[0]
        state = init_tracker(frame, b1, seq.description, TrackConfig(localizer=MagicMock()))

        assert state.template.size == (24, 18)
        assert state.template.tobytes() == frame.crop((int(b1.x), int(b1.y), int(b1.x2), int(b1.y2))).tobytes()
        assert state.last_box == b1
        assert state.last_box_valid
        assert state.frame_index == 1

    def test_init_record(self, sequences):
        seq = sequences[0]
        records = []
        init_tracker(load_frame(seq.frames[0]), seq.groundtruth[0], seq.description,
                     TrackConfig(localizer=MagicMock()), sequence_name=seq.name, observers=[records.append])
        assert len(records) == 1
        assert records[0].is_init
        assert records[0].prediction == seq.groundtruth[0]
        assert records[0].response is None

    def test_degenerate_b1(self, sequences):
        frame = load_frame(sequences[0].frames[0])
        with pytest.raises(DegenerateBoxError):
            init_tracker(frame, BBox.empty(), "x", TrackConfig(localizer=MagicMock()))

    def test_localizer_must_have_localize(self):
        with pytest.raises(ValueError):
            TrackConfig(localizer=object())


# ---------------------------------------------------------------------------
# Oracle runs
# ---------------------------------------------------------------------------

class TestOracle:
    def test_reproduces_groundtruth(self, sequences):
        oracle = OracleLocalizer.from_sequences(sequences)
        for seq in sequences:
            track, _ = run(seq, oracle)
            assert track.sequence_name == seq.name
            assert track.boxes == seq.groundtruth

    def test_constant_shift(self, sequences):
        seq = sequences[1]
        track, _ = run(seq, OracleLocalizer.from_sequences(sequences, offset=(3, 4)))
        expected = [seq.groundtruth[0]] + [clamp_box(g.translate(3, 4), seq.image_size) for g in seq.groundtruth[1:]]
        assert track.boxes == expected

    def test_one_prediction_per_frame(self, sequences):
        seq = sequences[2]
        track, records = run(seq, OracleLocalizer.from_sequences(sequences))
        assert len(track.boxes) == len(seq)
        assert [r.frame_index for r in records] == list(range(1, len(seq) + 1))

    def test_deterministic(self, sequences):
        seq = sequences[0]
        a, _ = run(seq, perfect_script(seq, {5: "nope"}))
        b, _ = run(seq, perfect_script(seq, {5: "nope"}))
        assert a == b


# ---------------------------------------------------------------------------
# Fallback and latch
# ---------------------------------------------------------------------------

class TestFallback:
    def test_garbage_repeats_last_box_and_drops_prompt(self, sequences):
        seq = sequences[0]
        track, records = run(seq, perfect_script(seq, {4: "I lost the target, sorry."}))
        steps = queried(records)

        assert track.boxes[3] == track.boxes[2] == seq.groundtruth[2]
        assert steps[4].response.box is None
        assert steps[4].prompt_box is not None  # frame 3 was still trusted

        latched = steps[5]
        assert latched.prompt_box is None
        assert not latched.prompt_clause
        assert latched.request_frame.tobytes() == latched.source_frame.tobytes()
        assert TrackConfig(localizer=MagicMock()).template.global_clause in latched.instruction

        # parsed again at frame 5, so frame 6 is prompted
        assert track.boxes[4] == seq.groundtruth[4]
        assert steps[6].prompt_box is not None

    def test_consecutive_failures_keep_repeating(self, sequences):
        seq = sequences[0]
        track, records = run(seq, perfect_script(seq, {3: "", 4: "???", 5: "{}"}))
        assert track.boxes[1] == track.boxes[2] == track.boxes[3] == track.boxes[4]
        steps = queried(records)
        assert all(steps[k].prompt_box is None for k in (4, 5, 6))

    def test_transport_error(self, sequences):
        seq = sequences[1]
        oracle = OracleLocalizer.from_sequences(sequences)
        localizer = FailingAt(oracle, 3, LocalizerTransportError("HTTP 500", status_code=500, raw_body="boom"))
        counter = StepCounter()

        track = track_sequence(seq, TrackConfig(localizer=localizer), observers=[counter])

        assert track.boxes[2] == track.boxes[1]
        assert track.boxes[3] == seq.groundtruth[3]
        assert counter.transport_failures == 1
        assert counter.parse_failures == 0
        assert counter.queries == len(seq) - 1

    def test_timeout_is_labelled(self, sequences):
        seq = sequences[1]
        localizer = FailingAt(OracleLocalizer.from_sequences(sequences), 2, LocalizerTimeoutError("slow"))
        track, records = run(seq, localizer)
        steps = queried(records)
        assert steps[2].error.startswith("timeout")
        assert steps[3].prompt_box is None
        assert track.boxes[1] == seq.groundtruth[0]

    def test_absent_span_is_survived(self, tmp_path):
        root = make_synthetic_split(tmp_path / "s", n_sequences=1, n_frames=10, absent_span=(4, 6))
        seq = load_sequence(root / "seq_01", PRESETS["tnl2k"])

        track, records = run(seq, OracleLocalizer.from_sequences([seq]))

        assert len(track.boxes) == 10
        assert track.boxes[3] == track.boxes[4] == track.boxes[5] == seq.groundtruth[2]
        assert track.boxes[6] == seq.groundtruth[6]
        assert queried(records)[7].prompt_box is None


# ---------------------------------------------------------------------------
# Visual prompt
# ---------------------------------------------------------------------------

class TestPromptPlacement:
    def test_rectangle_is_enlarged_previous_box(self, sequences):
        seq = sequences[2]
        cfg = TrackConfig(localizer=OracleLocalizer.from_sequences(sequences, offset=(2, -1)))
        records = []
        track = track_sequence(seq, cfg, observers=[records.append])

        for record in records:
            if record.is_init or record.prompt_box is None:
                continue
            prev = track.boxes[record.frame_index - 2]
            assert record.prompt_box == enlarge(prev, cfg.prompt_style.enlarge_factor, seq.image_size)
            assert record.prompt_clause
            expected = render_prompt(record.source_frame, prev, cfg.prompt_style)
            assert record.request_frame.tobytes() == expected.tobytes()

    def test_vp_disabled_sends_raw_frames(self, sequences):
        seq = sequences[0]
        track, records = run(seq, OracleLocalizer.from_sequences(sequences), vp_enabled=False)
        assert track.boxes == seq.groundtruth
        for record in queried(records).values():
            assert record.prompt_box is None
            assert not record.prompt_clause
            assert record.request_frame.tobytes() == record.source_frame.tobytes()

    def test_vp_enabled_changes_pixels(self, sequences):
        seq = sequences[0]
        _, records = run(seq, OracleLocalizer.from_sequences(sequences))
        for record in queried(records).values():
            assert record.prompt_clause
            assert record.request_frame.tobytes() != record.source_frame.tobytes()


class TestLocalSearch:
    def test_oracle_in_crop_coordinates(self, sequences):
        seq = sequences[0]
        track, records = run(seq, OracleLocalizer.from_sequences(sequences), search_mode=SearchMode.LOCAL)

        assert track.boxes == seq.groundtruth
        for record in queried(records).values():
            assert record.search_region is not None
            assert record.request_frame.size == (int(record.search_region.w), int(record.search_region.h))
            assert record.request_frame.width < seq.image_size.width
            assert not record.prompt_clause

    def test_full_frame_after_failure(self, sequences):
        seq = sequences[0]
        script = perfect_script(seq, {3: "lost"})
        _, records = run(seq, script, search_mode=SearchMode.LOCAL)
        steps = queried(records)
        assert steps[4].search_region is None
        assert steps[4].request_frame.size == (seq.image_size.width, seq.image_size.height)


# ---------------------------------------------------------------------------
# Frames, transcripts and traces
# ---------------------------------------------------------------------------

class TestSequenceIO:
    def test_unreadable_frame(self, split_root):
        seq = load_sequence(split_root / "seq_01", PRESETS["tnl2k"])
        seq.frames[2].write_bytes(b"not an image")
        with pytest.raises(DataError, match="unreadable frame"):
            track_sequence(seq, TrackConfig(localizer=OracleLocalizer.from_sequences([seq])))

    def test_transcript_replay_reproduces_track(self, sequences, tmp_path):
        seq = sequences[1]
        path = tmp_path / "transcript.jsonl"
        with TranscriptWriter(path) as writer:
            original = track_sequence(
                seq, TrackConfig(localizer=OracleLocalizer.from_sequences(sequences, offset=(2, 1))),
                observers=[writer],
            )

        records = load_transcript(path)
        assert len(records) == len(seq) - 1
        assert all(r.sequence == seq.name for r in records)

        replayed = track_sequence(seq, TrackConfig(localizer=ScriptedLocalizer.from_transcript(path)))
        assert replayed.boxes == original.boxes

    def test_trace_dump(self, sequences, tmp_path):
        seq = sequences[0]
        out = tmp_path / "trace"
        with TraceDumper(out, seq.groundtruth, seq.absent) as dumper:
            track_sequence(seq, TrackConfig(localizer=perfect_script(seq, {3: "garbage"})), observers=[dumper])

        for sub, suffix in (("prompted", ".png"), ("overlays", ".png"), ("responses", ".txt"), ("requests", ".json")):
            assert len(list((out / sub).glob(f"*{suffix}"))) == len(seq)
        assert (out / "responses" / "000001.txt").read_text().startswith(INIT_MARKER)
        assert (out / "responses" / "000003.txt").read_text() == "garbage"
        assert len((out / "steps.jsonl").read_text().splitlines()) == len(seq) - 1

        raw4 = load_frame(seq.frames[3])
        with Image.open(out / "prompted" / "000004.png") as sent:
            assert sent.convert("RGB").tobytes() == raw4.tobytes()
        with Image.open(out / "overlays" / "000004.png") as ov:
            assert ov.size == (seq.image_size.width, seq.image_size.height)
