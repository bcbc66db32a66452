"""
Tests for one-pass evaluation.

Covers:
- AUC / PR / NPR examples with hand-computed values
- absent and degenerate ground-truth frames are skipped
- curves match a loop-based recount on random tracks
- monotone curves, translation/scale invariance, order-free aggregation
- evaluate() matching errors and compare()
- report writing
"""

import csv
import json
import random
from pathlib import Path

import pytest

from app.core.errors import EvaluationError
from app.geometry import center_error, iou, normalized_center_error
from app.metrics import (
    compare,
    evaluate,
    format_delta,
    format_table,
    normalized_precision,
    precision,
    success_auc,
    write_report,
)
from app.schemas.dataset import ResultTrack, Sequence
from app.schemas.geometry import BBox, ImageSize
from app.schemas.metrics import EvalResult


def box(x, y, w, h) -> BBox:
    return BBox(x=x, y=y, w=w, h=h)


def make_seq(name, gts, absent=None) -> Sequence:
    """Sequence value for scoring only; frame files are never opened."""
    return Sequence(
        name=name,
        frames=[Path(f"/nonexistent/{name}/{i:04d}.jpg") for i in range(len(gts))],
        groundtruth=gts,
        absent=absent or [False] * len(gts),
        description="target",
        image_size=ImageSize(width=640, height=480),
    )


def random_track(rng: random.Random, n: int):
    gts, preds = [], []
    for _ in range(n):
        g = box(rng.randint(0, 300), rng.randint(0, 300), rng.randint(5, 80), rng.randint(5, 80))
        if rng.random() < 0.1:
            p = box(g.x, g.y, 0, 0)
        else:
            p = box(g.x + rng.randint(-40, 40), g.y + rng.randint(-40, 40),
                    max(1, g.w + rng.randint(-20, 20)), max(1, g.h + rng.randint(-20, 20)))
        gts.append(g)
        preds.append(p)
    absent = [rng.random() < 0.15 for _ in range(n)]
    absent[0] = False
    return preds, gts, absent


# ---------------------------------------------------------------------------
# Hand-computed examples
# ---------------------------------------------------------------------------

class TestExamples:
    def test_perfect_track(self):
        gts = [box(10, 10, 20, 20)] * 5
        absent = [False] * 5
        assert success_auc(gts, gts, absent).value == 1.0
        assert precision(gts, gts, absent).value == 1.0
        assert normalized_precision(gts, gts, absent).value == 1.0

    def test_half_hits_half_misses(self):
        gts = [box(0, 0, 10, 10)] * 4
        preds = [box(0, 0, 10, 10)] * 2 + [box(100, 100, 10, 10)] * 2
        result = success_auc(preds, gts, [False] * 4)
        assert result.value == pytest.approx(11 / 21)
        assert result.curve[0] == 1.0
        assert result.curve[10] == 0.5

    def test_disjoint_track(self):
        gts = [box(0, 0, 10, 10)] * 3
        preds = [box(50, 50, 10, 10)] * 3
        assert success_auc(preds, gts, [False] * 3).value == pytest.approx(1 / 21)

    def test_precision_offset_25px(self):
        gts = [box(0, 0, 50, 50)] * 6
        preds = [g.translate(25, 0) for g in gts]
        result = precision(preds, gts, [False] * 6)
        assert result.value == 0.0
        assert result.curve[24] == 0.0
        assert result.curve[25] == 1.0

    def test_precision_mixed_offsets(self):
        gts = [box(0, 0, 50, 50)] * 10
        preds = [g.translate(5, 0) for g in gts[:6]] + [g.translate(100, 0) for g in gts[6:]]
        assert precision(preds, gts, [False] * 10).value == pytest.approx(0.6)

    def test_normalized_precision_quarter_width(self):
        gts = [box(0, 0, 20, 20)] * 4
        preds = [g.translate(5, 0) for g in gts]
        assert normalized_precision(preds, gts, [False] * 4).value == pytest.approx(26 / 51)

    def test_normalized_precision_beyond_range(self):
        gts = [box(0, 0, 10, 10)] * 4
        preds = [g.translate(6, 0) for g in gts]
        assert normalized_precision(preds, gts, [False] * 4).value == 0.0

    def test_degenerate_prediction_misses_everything(self):
        gts = [box(0, 0, 10, 10)] * 2
        preds = [box(0, 0, 10, 10), box(5, 5, 0, 0)]
        assert precision(preds, gts, [False, False]).value == 0.5
        assert normalized_precision(preds, gts, [False, False]).value == pytest.approx(0.5)

    def test_curve_shapes(self):
        gts = [box(0, 0, 10, 10)]
        assert len(success_auc(gts, gts, [False]).curve) == 21
        assert len(precision(gts, gts, [False]).curve) == 51
        assert len(normalized_precision(gts, gts, [False]).thresholds) == 51


class TestSkippedFrames:
    def test_absent_frames_do_not_count(self):
        gts = [box(0, 0, 10, 10)] * 4
        preds = [box(0, 0, 10, 10), box(90, 90, 5, 5), box(90, 90, 5, 5), box(0, 0, 10, 10)]
        result = success_auc(preds, gts, [False, True, True, False])
        assert result.value == 1.0
        assert result.n_eval_frames == 2

    def test_degenerate_groundtruth_is_skipped(self):
        gts = [box(0, 0, 10, 10), box(0, 0, 0, 0)]
        preds = [box(0, 0, 10, 10), box(40, 40, 10, 10)]
        assert precision(preds, gts, [False, False]).n_eval_frames == 1

    def test_no_evaluable_frames(self):
        gts = [box(0, 0, 10, 10)] * 2
        with pytest.raises(EvaluationError, match="no evaluable frames"):
            success_auc(gts, gts, [True, True], name="all_gone")

    def test_length_mismatch(self):
        with pytest.raises(EvaluationError, match="length mismatch"):
            precision([box(0, 0, 1, 1)], [box(0, 0, 1, 1)] * 2, [False] * 2)


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------

class TestProperties:
    def test_curves_match_recount(self):
        rng = random.Random(31)
        for _ in range(200):
            preds, gts, absent = random_track(rng, rng.randint(1, 20))
            pairs = [(p, g) for p, g, a in zip(preds, gts, absent) if not a]
            n = len(pairs)

            success = [sum(1 for p, g in pairs if iou(p, g) >= k / 20) / n for k in range(21)]
            errors = [float("inf") if p.is_degenerate else center_error(p, g) for p, g in pairs]
            prec = [sum(1 for e in errors if e <= float(k)) / n for k in range(51)]
            nerrors = [float("inf") if p.is_degenerate else normalized_center_error(p, g) for p, g in pairs]
            nprec = [sum(1 for e in nerrors if e <= k / 100) / n for k in range(51)]

            assert success_auc(preds, gts, absent).curve == success
            assert precision(preds, gts, absent).curve == prec
            assert normalized_precision(preds, gts, absent).curve == nprec
            assert success_auc(preds, gts, absent).value == pytest.approx(sum(success) / 21, abs=1e-12)
            assert precision(preds, gts, absent).value == prec[20]
            assert normalized_precision(preds, gts, absent).value == pytest.approx(sum(nprec) / 51, abs=1e-12)

    def test_monotone_curves(self):
        rng = random.Random(4)
        for _ in range(100):
            preds, gts, absent = random_track(rng, 15)
            s = success_auc(preds, gts, absent).curve
            p = precision(preds, gts, absent).curve
            q = normalized_precision(preds, gts, absent).curve
            assert all(a >= b for a, b in zip(s, s[1:]))
            assert all(a <= b for a, b in zip(p, p[1:]))
            assert all(a <= b for a, b in zip(q, q[1:]))
            assert s[0] == 1.0

    def test_translation_and_scale_invariance(self):
        rng = random.Random(6)
        preds, gts, absent = random_track(rng, 30)
        auc = success_auc(preds, gts, absent).value
        npr = normalized_precision(preds, gts, absent).value

        shifted = ([p.translate(17, -9) for p in preds], [g.translate(17, -9) for g in gts])
        assert success_auc(*shifted, absent).value == pytest.approx(auc)
        assert normalized_precision(*shifted, absent).value == pytest.approx(npr)

        scaled = ([p.scale(4) for p in preds], [g.scale(4) for g in gts])
        assert success_auc(*scaled, absent).value == pytest.approx(auc)
        assert normalized_precision(*scaled, absent).value == pytest.approx(npr)


# ---------------------------------------------------------------------------
# evaluate / compare
# ---------------------------------------------------------------------------

class TestEvaluate:
    def setup_sequences(self):
        a = make_seq("alpha", [box(0, 0, 10, 10)] * 4)
        b = make_seq("beta", [box(5, 5, 20, 20)] * 6)
        return a, b

    def test_unweighted_mean(self):
        a, b = self.setup_sequences()
        tracks = [
            ResultTrack(sequence_name="alpha", boxes=a.groundtruth),
            ResultTrack(sequence_name="beta", boxes=[box(200, 200, 20, 20)] * 6),
        ]
        result = evaluate(tracks, [a, b])
        assert result.per_sequence["alpha"].auc == 1.0
        assert result.per_sequence["beta"].auc == pytest.approx(1 / 21)
        assert result.aggregate.auc == pytest.approx(11 / 21)
        assert result.aggregate.n_sequences == 2
        assert result.aggregate.success_50 == pytest.approx(0.5)
        assert len(result.curves.success) == 21

    def test_order_does_not_matter(self):
        rng = random.Random(12)
        seqs, tracks = [], []
        for i in range(6):
            preds, gts, absent = random_track(rng, 12)
            seqs.append(make_seq(f"s{i}", gts, absent))
            tracks.append(ResultTrack(sequence_name=f"s{i}", boxes=preds))
        forward = evaluate(tracks, seqs)
        backward = evaluate(list(reversed(tracks)), list(reversed(seqs)), workers=3)
        for field in ("auc", "pr", "npr", "success_50"):
            assert getattr(backward.aggregate, field) == pytest.approx(getattr(forward.aggregate, field), abs=1e-12)

    def test_missing_results(self):
        a, b = self.setup_sequences()
        with pytest.raises(EvaluationError) as exc:
            evaluate([ResultTrack(sequence_name="alpha", boxes=a.groundtruth)], [a, b])
        assert exc.value.sequence == "beta"

    def test_extra_results(self):
        a, _ = self.setup_sequences()
        tracks = [
            ResultTrack(sequence_name="alpha", boxes=a.groundtruth),
            ResultTrack(sequence_name="gamma", boxes=a.groundtruth),
        ]
        with pytest.raises(EvaluationError, match="gamma"):
            evaluate(tracks, [a])

    def test_duplicate_results(self):
        a, _ = self.setup_sequences()
        track = ResultTrack(sequence_name="alpha", boxes=a.groundtruth)
        with pytest.raises(EvaluationError, match="duplicate"):
            evaluate([track, track], [a])

    def test_length_mismatch(self):
        a, _ = self.setup_sequences()
        with pytest.raises(EvaluationError, match="length mismatch"):
            evaluate([ResultTrack(sequence_name="alpha", boxes=a.groundtruth[:3])], [a])

    def test_compare(self):
        a, b = self.setup_sequences()
        perfect = evaluate(
            [ResultTrack(sequence_name="alpha", boxes=a.groundtruth),
             ResultTrack(sequence_name="beta", boxes=b.groundtruth)],
            [a, b],
        )
        worse = evaluate(
            [ResultTrack(sequence_name="alpha", boxes=a.groundtruth),
             ResultTrack(sequence_name="beta", boxes=[g.translate(30, 0) for g in b.groundtruth])],
            [a, b],
        )
        delta = compare(perfect, worse)
        assert delta.delta["pr"] == pytest.approx(0.5)
        assert delta.delta["auc"] > 0
        assert "delta" in format_delta(delta)

    def test_compare_needs_same_sequences(self):
        a, b = self.setup_sequences()
        one = evaluate([ResultTrack(sequence_name="alpha", boxes=a.groundtruth)], [a])
        two = evaluate([ResultTrack(sequence_name="beta", boxes=b.groundtruth)], [b])
        with pytest.raises(EvaluationError):
            compare(one, two)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

class TestReport:
    def make_result(self) -> EvalResult:
        a = make_seq("alpha", [box(0, 0, 10, 10)] * 4)
        return evaluate([ResultTrack(sequence_name="alpha", boxes=a.groundtruth)], [a])

    def test_table(self):
        table = format_table(self.make_result())
        assert "alpha" in table
        assert "AGGREGATE" in table
        assert "100.0" in table

    def test_files(self, tmp_path):
        result = self.make_result()
        written = write_report(result, tmp_path / "eval", per_sequence_curves=True)

        report = json.loads((tmp_path / "eval" / "report.json").read_text())
        assert EvalResult.model_validate(report) == result
        assert report["aggregate"]["auc"] == 1.0

        with open(tmp_path / "eval" / "curves" / "success.csv", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["threshold", "value"]
        assert len(rows) == 22
        assert rows[-1] == ["1", "1.000000"]
        assert (tmp_path / "eval" / "curves" / "sequences" / "alpha_precision.csv").exists()
        assert all(p.exists() for p in written)
