"""
Tests for sequence loading, layouts and results files.

Covers:
- load_sequence on both preset layouts (NaN / zero rows, absence flags)
- row-count mismatch and malformed rows reported with file and line
- natural frame ordering
- load_split ordering, per-sequence failures and empty roots
- results write/read round-trip and malformed-line errors
"""

import random

import numpy as np
import pytest
from PIL import Image

from app.core.errors import ConfigError, DataError, SplitLoadError
from app.dataset import (
    PRESETS,
    dump_layout,
    load_layout,
    load_sequence,
    load_split,
    natural_key,
    read_results,
    write_results,
)
from app.dataset.loader import parse_groundtruth_line
from app.dataset.results import format_row
from app.dataset.synthetic import DESCRIPTIONS, make_synthetic_split, synthetic_track
from app.schemas.dataset import ResultTrack
from app.schemas.geometry import BBox, ImageSize


def write_sequence(seq_dir, boxes, description="a target", ext=".jpg", names=None):
    """Hand-build a tnl2k-layout sequence directory."""
    img_dir = seq_dir / "imgs"
    img_dir.mkdir(parents=True)
    names = names or [f"{i + 1:04d}{ext}" for i in range(len(boxes))]
    for name in names:
        Image.new("RGB", (64, 48), (10, 20, 30)).save(img_dir / name)
    (seq_dir / "groundtruth.txt").write_text("\n".join(boxes) + "\n", encoding="utf-8")
    (seq_dir / "language.txt").write_text(description + "\n", encoding="utf-8")
    return seq_dir


# ---------------------------------------------------------------------------
# Ground-truth rows
# ---------------------------------------------------------------------------

class TestGroundtruthRows:
    @pytest.mark.parametrize("text", ["10,20,30,40", "10\t20\t30\t40", "10 20 30 40", "10, 20, 30, 40"])
    def test_separators(self, text, tmp_path):
        assert parse_groundtruth_line(text, tmp_path / "gt.txt", 1) == BBox(x=10, y=20, w=30, h=40)

    def test_nan_row_is_absent(self, tmp_path):
        assert parse_groundtruth_line("NaN,NaN,NaN,NaN", tmp_path / "gt.txt", 3).is_degenerate

    def test_negative_size_names_line(self, tmp_path):
        with pytest.raises(DataError) as exc:
            parse_groundtruth_line("1,2,-3,4", tmp_path / "gt.txt", 7)
        assert exc.value.line == 7
        assert "gt.txt:7" in str(exc.value)

    def test_wrong_field_count(self, tmp_path):
        with pytest.raises(DataError, match="expected 4 values"):
            parse_groundtruth_line("1,2,3", tmp_path / "gt.txt", 1)


# ---------------------------------------------------------------------------
# load_sequence
# ---------------------------------------------------------------------------

class TestLoadSequence:
    def test_synthetic_sequence(self, split_root):
        seq = load_sequence(split_root / "seq_01", PRESETS["tnl2k"])
        assert seq.name == "seq_01"
        assert len(seq) == 10
        assert seq.description == DESCRIPTIONS[0]
        assert seq.image_size == ImageSize(width=160, height=120)
        assert seq.groundtruth == synthetic_track(0, 10, seq.image_size)
        assert not any(seq.absent)

    def test_load_is_deterministic(self, split_root):
        a = load_sequence(split_root / "seq_02", PRESETS["tnl2k"])
        b = load_sequence(split_root / "seq_02", PRESETS["tnl2k"])
        assert a == b

    def test_zero_rows_mark_absent(self, tmp_path):
        root = make_synthetic_split(tmp_path / "s", n_sequences=1, n_frames=8, absent_span=(4, 5))
        seq = load_sequence(root / "seq_01", PRESETS["tnl2k"])
        assert seq.absent == [False, False, False, True, True, False, False, False]
        assert seq.groundtruth[3].is_degenerate

    def test_nan_rows_mark_absent(self, tmp_path):
        seq_dir = write_sequence(tmp_path / "nan", ["1,1,10,10", "NaN,NaN,NaN,NaN", "2,2,10,10"])
        seq = load_sequence(seq_dir, PRESETS["tnl2k"])
        assert seq.absent == [False, True, False]

    def test_absence_flags(self, lt_split_root):
        seq = load_sequence(lt_split_root / "seq_01", PRESETS["tnllt"])
        assert [i + 1 for i, a in enumerate(seq.absent) if a] == [5, 6]
        # boxes stay real; only the flag file hides the target
        assert not seq.groundtruth[4].is_degenerate
        assert 4 not in seq.present_indices

    def test_row_count_mismatch(self, split_root):
        gt = split_root / "seq_01" / "groundtruth.txt"
        lines = gt.read_text().splitlines()
        gt.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(DataError, match="row-count mismatch"):
            load_sequence(split_root / "seq_01", PRESETS["tnl2k"])

    def test_flag_count_mismatch(self, lt_split_root):
        (lt_split_root / "seq_01" / "out_of_view.txt").write_text("0,0,0\n")
        with pytest.raises(DataError, match="row-count mismatch"):
            load_sequence(lt_split_root / "seq_01", PRESETS["tnllt"])

    def test_malformed_row_reports_line(self, tmp_path):
        seq_dir = write_sequence(tmp_path / "bad", ["1,1,10,10", "1,1,ten,10"])
        with pytest.raises(DataError) as exc:
            load_sequence(seq_dir, PRESETS["tnl2k"])
        assert exc.value.line == 2
        assert exc.value.path.endswith("groundtruth.txt")

    def test_first_frame_must_be_present(self, tmp_path):
        seq_dir = write_sequence(tmp_path / "first", ["0,0,0,0", "1,1,10,10"])
        with pytest.raises(DataError, match="frame 1"):
            load_sequence(seq_dir, PRESETS["tnl2k"])

    def test_natural_frame_order(self, tmp_path):
        names = ["1.jpg", "10.jpg", "2.jpg"]
        seq_dir = write_sequence(tmp_path / "nat", ["1,1,5,5"] * 3, names=names)
        seq = load_sequence(seq_dir, PRESETS["tnl2k"])
        assert [p.name for p in seq.frames] == ["1.jpg", "2.jpg", "10.jpg"]

    def test_natural_key(self):
        assert sorted(["frame10", "frame2", "Frame1"], key=natural_key) == ["Frame1", "frame2", "frame10"]


# ---------------------------------------------------------------------------
# load_split
# ---------------------------------------------------------------------------

class TestLoadSplit:
    def test_lexicographic_order(self, tmp_path):
        root = tmp_path / "split"
        make_synthetic_split(root, n_sequences=1, n_frames=3, name_prefix="b")
        make_synthetic_split(root, n_sequences=1, n_frames=3, name_prefix="a")
        result = load_split(root, PRESETS["tnl2k"])
        assert [s.name for s in result.sequences] == ["a_01", "b_01"]

    def test_failures_are_collected(self, tmp_path):
        root = make_synthetic_split(tmp_path / "split", n_sequences=10, n_frames=3)
        (root / "seq_04" / "groundtruth.txt").write_text("1,1,5,5\n")
        result = load_split(root, PRESETS["tnl2k"], workers=4)
        assert len(result.sequences) == 9
        assert [f.name for f in result.failures] == ["seq_04"]
        assert "row-count mismatch" in result.failures[0].error
        assert not result.ok

    def test_name_filter(self, split_root):
        result = load_split(split_root, PRESETS["tnl2k"], names=["seq_03", "seq_01"])
        assert [s.name for s in result.sequences] == ["seq_01", "seq_03"]

    def test_empty_root(self, tmp_path):
        (tmp_path / "empty").mkdir()
        with pytest.raises(SplitLoadError, match="no sequences"):
            load_split(tmp_path / "empty", PRESETS["tnl2k"])

    def test_missing_root(self, tmp_path):
        with pytest.raises(SplitLoadError):
            load_split(tmp_path / "nope", PRESETS["tnl2k"])


# ---------------------------------------------------------------------------
# Layouts
# ---------------------------------------------------------------------------

class TestLayouts:
    def test_presets(self):
        assert load_layout("tnl2k").image_dir == "imgs"
        assert load_layout("tnllt").absence_files == ["full_occlusion.txt", "out_of_view.txt"]

    def test_layout_file_round_trip(self, tmp_path):
        path = tmp_path / "custom.layout"
        path.write_text(dump_layout(PRESETS["tnllt"]))
        assert load_layout(path) == PRESETS["tnllt"]

    def test_layout_file_defaults(self, tmp_path):
        path = tmp_path / "mine.layout"
        path.write_text("# frames live in frames/\nimage_dir=frames\ngroundtruth_file=gt.txt\nlanguage_file=desc.txt\n")
        layout = load_layout(path)
        assert layout.name == "mine"
        assert layout.image_extensions == [".jpg", ".jpeg", ".png"]

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "bad.layout"
        path.write_text("image_dir=x\ngroundtruth_file=g\nlanguage_file=l\ncolour=red\n")
        with pytest.raises(ConfigError, match="colour"):
            load_layout(path)

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            load_layout("lasot")


# ---------------------------------------------------------------------------
# Results files
# ---------------------------------------------------------------------------

class TestResults:
    def test_row_format(self):
        assert format_row(BBox(x=1, y=2.5, w=3.333, h=40)) == "1.00,2.50,3.33,40.00"

    def test_round_trip_within_rounding(self, tmp_path):
        rng = random.Random(8)
        boxes = [
            BBox(x=rng.uniform(-50, 500), y=rng.uniform(-50, 500), w=rng.uniform(0, 200), h=rng.uniform(0, 200))
            for _ in range(100)
        ]
        path = write_results(ResultTrack(sequence_name="s", boxes=boxes), tmp_path / "out" / "s.txt")
        back = read_results(path)
        assert back.sequence_name == "s"
        assert len(back.boxes) == 100
        got = np.array([b.to_list() for b in back.boxes])
        want = np.array([b.to_list() for b in boxes])
        assert np.all(np.abs(got - want) <= 0.005 + 1e-9)

    def test_lf_line_endings(self, tmp_path):
        path = write_results(ResultTrack(sequence_name="s", boxes=[BBox(x=1, y=2, w=3, h=4)] * 2), tmp_path / "s.txt")
        assert path.read_bytes() == b"1.00,2.00,3.00,4.00\n1.00,2.00,3.00,4.00\n"

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "s.txt"
        path.write_text("1,2,3,4\n1,2,three,4\n")
        with pytest.raises(DataError) as exc:
            read_results(path)
        assert exc.value.line == 2

    def test_negative_size_is_malformed(self, tmp_path):
        path = tmp_path / "s.txt"
        path.write_text("1,2,-3,4\n")
        with pytest.raises(DataError):
            read_results(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            read_results(tmp_path / "absent.txt")
