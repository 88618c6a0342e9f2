"""Tests for CLEAR-MOT and identity scoring"""
import logging
import math

import numpy as np
import pytest

from mptbench import filesystem as fs
from mptbench import metrics
from mptbench.core import BoundingBox, GtRecord, write_mot_file

from .utils import (
    brute_force_clearmot,
    brute_force_idtp,
    random_scenario,
    static_track,
    write_sequence_stub,
)

BOX = BoundingBox(10, 10, 20, 20)

FAR = BoundingBox(100, 100, 20, 20)


class TestMatchFrame:
    def test_iou_of_exactly_one_half_matches(self):
        gt = [GtRecord(1, 1, BoundingBox(0, 0, 10, 10))]
        pred = [GtRecord(1, 7, BoundingBox(0, 0, 10, 20))]
        assert metrics.match_frame({}, gt, pred) == ({1: 7}, 0, 0, 0)

    def test_low_overlap_does_not_match(self):
        gt = [GtRecord(1, 1, BoundingBox(0, 0, 10, 10))]
        pred = [GtRecord(1, 7, BoundingBox(0, 0, 10, 21))]
        assert metrics.match_frame({}, gt, pred) == ({}, 1, 1, 0)

    def test_previous_matches_are_kept_over_better_overlaps(self):
        gt = [GtRecord(2, 1, BOX)]
        pred = [GtRecord(2, 5, BOX.translate(4, 0)), GtRecord(2, 6, BOX)]
        assert metrics.match_frame({1: 5}, gt, pred) == ({1: 5}, 1, 0, 0)

    def test_new_partner_is_a_switch(self):
        gt = [GtRecord(2, 1, BOX)]
        pred = [GtRecord(2, 6, BOX)]
        assert metrics.match_frame({1: 5}, gt, pred) == ({1: 6}, 0, 0, 1)

    def test_cardinality_beats_overlap(self):
        # matching gt 1 to its best prediction would leave gt 2 unmatched
        gt = [
            GtRecord(1, 1, BoundingBox(0, 0, 10, 10)),
            GtRecord(1, 2, BoundingBox(3, 0, 10, 10)),
        ]
        pred = [
            GtRecord(1, 1, BoundingBox(2, 0, 10, 10)),
            GtRecord(1, 2, BoundingBox(-3, 0, 10, 10)),
        ]
        assert metrics.match_frame({}, gt, pred).matches == {1: 2, 2: 1}


class TestComputeClearMot:
    def test_perfect_tracking(self):
        gt = static_track(1, BOX, range(1, 6)) + static_track(2, FAR, range(1, 6))
        pred = static_track(8, BOX, range(1, 6)) + static_track(9, FAR, range(1, 6))
        clear = metrics.compute_clearmot(gt, pred)
        assert (clear, clear.mota) == ((0, 0, 0, 10), 1.0)

    def test_one_switch(self):
        gt = static_track(1, BOX, range(1, 5))
        pred = static_track(1, BOX, (1, 2)) + static_track(2, BOX, (3, 4))
        clear = metrics.compute_clearmot(gt, pred)
        assert (clear, clear.mota) == ((0, 0, 1, 4), 0.75)

    def test_switches_are_remembered_across_gaps(self):
        gt = static_track(1, BOX, range(1, 4))
        pred = static_track(1, BOX, (1,)) + static_track(2, BOX, (3,))
        assert metrics.compute_clearmot(gt, pred) == (0, 1, 1, 3)

    def test_reclaiming_an_old_id_is_a_switch(self):
        gt = static_track(1, BOX, range(1, 4))
        pred = static_track(1, BOX, (1, 3)) + static_track(2, BOX, (2,))
        assert metrics.compute_clearmot(gt, pred).idsw == 2

    def test_frames_with_only_predictions_count(self):
        gt = static_track(1, BOX, (1,))
        pred = static_track(1, BOX, (1, 2, 3))
        clear = metrics.compute_clearmot(gt, pred)
        assert (clear.fp, clear.mota) == (2, -1.0)

    def test_no_ground_truth_gives_nan(self):
        assert math.isnan(metrics.compute_clearmot([], static_track(1, BOX, (1,))).mota)

    def test_empty_output(self):
        clear = metrics.compute_clearmot(static_track(1, BOX, range(1, 4)), [])
        assert (clear, clear.mota) == ((0, 3, 0, 3), 0.0)

    @pytest.mark.parametrize("seed", range(4))
    def test_agrees_with_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(50):
            gt, pred = random_scenario(rng)
            assert tuple(metrics.compute_clearmot(gt, pred)) == brute_force_clearmot(
                gt, pred
            )


class TestIdentityScore:
    def test_perfect_tracking(self):
        gt = static_track(1, BOX, range(1, 6))
        pred = static_track(4, BOX, range(1, 6))
        score = metrics.compute_identity_score(gt, pred)
        assert (score, score.idf1) == ((5, 0, 0), 1.0)

    def test_split_identity(self):
        gt = static_track(1, BOX, range(1, 5))
        pred = static_track(1, BOX, (1, 2)) + static_track(2, BOX, (3, 4))
        score = metrics.compute_identity_score(gt, pred)
        assert (score, score.idf1) == ((2, 2, 2), 0.5)

    def test_longest_overlap_wins(self):
        gt = static_track(1, BOX, range(1, 6))
        pred = static_track(1, BOX, (1, 2)) + static_track(2, BOX, (3, 4, 5))
        assert metrics.compute_identity_score(gt, pred).idtp == 3

    def test_matching_is_one_to_one(self):
        gt = static_track(1, BOX, (1, 2)) + static_track(2, FAR, (3, 4))
        pred = static_track(1, BOX, (1, 2)) + static_track(1, FAR, (3, 4))
        assert metrics.compute_identity_score(gt, pred) == (2, 2, 2)

    def test_nothing_to_score_gives_nan(self):
        assert math.isnan(metrics.compute_idf1([], []))

    def test_no_overlap(self):
        score = metrics.compute_identity_score(
            static_track(1, BOX, (1,)), static_track(1, FAR, (1,))
        )
        assert (score, score.idf1) == ((0, 1, 1), 0.0)

    @pytest.mark.parametrize("seed", range(4))
    def test_agrees_with_brute_force(self, seed):
        rng = np.random.default_rng(100 + seed)
        for _ in range(50):
            gt, pred = random_scenario(rng)
            score = metrics.compute_identity_score(gt, pred)
            assert score.idtp == brute_force_idtp(gt, pred)
            assert (score.idfp, score.idfn) == (
                len(pred) - score.idtp,
                len(gt) - score.idtp,
            )


class TestInvariants:
    @pytest.mark.parametrize("seed", range(4))
    def test_a_spurious_box_is_one_more_false_positive(self, seed):
        rng = np.random.default_rng(200 + seed)
        for _ in range(50):
            gt, pred = random_scenario(rng)
            if not gt:
                continue
            frame = int(rng.integers(1, max(record.frame for record in gt) + 1))
            new_id = max((record.id for record in pred), default=0) + 1
            spurious = GtRecord(frame, new_id, BoundingBox(1000, 1000, 10, 10))
            before = metrics.compute_clearmot(gt, pred)
            after = metrics.compute_clearmot(gt, pred + [spurious])
            assert after == before._replace(fp=before.fp + 1)
            assert metrics.compute_idf1(gt, pred + [spurious]) <= metrics.compute_idf1(
                gt, pred
            )

    @pytest.mark.parametrize("seed", range(4))
    def test_renaming_predicted_ids_changes_nothing(self, seed):
        rng = np.random.default_rng(300 + seed)
        for _ in range(50):
            gt, pred = random_scenario(rng)
            ids = sorted({record.id for record in pred})
            renamed = dict(zip(ids, (int(new) + 50 for new in rng.permutation(ids))))
            relabeled = [record._replace(id=renamed[record.id]) for record in pred]
            assert metrics.compute_clearmot(gt, relabeled) == metrics.compute_clearmot(
                gt, pred
            )
            assert metrics.compute_identity_score(
                gt, relabeled
            ) == metrics.compute_identity_score(gt, pred)


class TestPooling:
    def test_score_sequence(self):
        gt = static_track(1, BOX, range(1, 5))
        pred = static_track(1, BOX, (1, 2)) + static_track(2, BOX, (3, 4))
        assert metrics.score_sequence("w3-02", gt, pred) == (
            "w3-02",
            "w3",
            4,
            4,
            0,
            0,
            1,
            2,
            2,
            2,
        )

    def test_ratios_come_from_pooled_counts(self):
        first = metrics.SequenceScore("b1-02", "b1", 10, 10, 0, 0, 0, 10, 0, 0)
        second = metrics.SequenceScore("b1-04", "b1", 2, 0, 0, 2, 0, 0, 0, 2)
        pooled = metrics.pool([first, second], "b1", "b1")
        assert pooled.mota == pytest.approx(10 / 12)
        assert pooled.mota != pytest.approx((first.mota + second.mota) / 2)
        assert pooled.idf1 == pytest.approx(20 / 22)

    def test_pooling_nothing(self):
        assert math.isnan(metrics.pool([], "Average").mota)

    def test_report_ordering(self):
        names = ("w2-02", "b10-02", "b2-04", "b2-02", "w10-02")
        scores = [
            metrics.SequenceScore(name, name.split("-")[0], 1, 1, 0, 0, 0, 1, 0, 0)
            for name in names
        ]
        report = metrics.build_report(scores)
        assert [score.name for score in report.per_sequence] == sorted(names)
        assert [score.name for score in report.per_background] == [
            "b2",
            "b10",
            "w2",
            "w10",
        ]
        assert (report.overall.name, report.gt_total) == ("Average", 5)
        assert report.per_background[0].gt_total == 2


class TestEvaluateDataset:
    @pytest.fixture
    def dataset(self, tmp_path):
        dataset_root = tmp_path / "dataset"
        write_sequence_stub(
            dataset_root,
            "test",
            "b1-02",
            static_track(1, BOX, range(1, 5)) + static_track(2, FAR, range(1, 5)),
        )
        write_sequence_stub(
            dataset_root, "test", "w3-02", static_track(1, BOX, range(1, 4))
        )
        write_sequence_stub(
            dataset_root, "train", "b1-01", static_track(1, BOX, range(1, 3))
        )
        results_root = tmp_path / "results"
        write_mot_file(
            fs.result_path(results_root, "b1-02"),
            static_track(5, BOX, range(1, 5)) + static_track(6, FAR, (1, 2)),
        )
        yield dataset_root, results_root

    def test_report(self, dataset):
        report = metrics.evaluate_dataset(*dataset)
        assert [
            (score.name, score.fn, score.fp, score.idsw)
            for score in report.per_sequence
        ] == [("b1-02", 2, 0, 0), ("w3-02", 3, 0, 0)]
        assert (report.gt_total, report.fn) == (11, 5)
        assert report.mota == pytest.approx(6 / 11)

    def test_missing_results_are_scored_empty(self, dataset, caplog):
        metrics.evaluate_dataset(*dataset)
        warnings = [
            record for record in caplog.records if record.levelno == logging.WARNING
        ]
        assert len(warnings) == 1
        assert "w3-02" in warnings[0].getMessage()

    def test_split_selection(self, dataset):
        report = metrics.evaluate_dataset(*dataset, split="all")
        assert [score.name for score in report.per_sequence] == [
            "b1-01",
            "b1-02",
            "w3-02",
        ]

    def test_parallel_scoring_agrees(self, dataset):
        assert metrics.evaluate_dataset(*dataset, jobs=2) == metrics.evaluate_dataset(
            *dataset
        )

    def test_missing_results_folder_raises(self, dataset, tmp_path):
        with pytest.raises(FileNotFoundError):
            metrics.evaluate_dataset(dataset[0], tmp_path / "nope")

    def test_missing_dataset_raises(self, dataset, tmp_path):
        with pytest.raises(FileNotFoundError):
            metrics.evaluate_dataset(tmp_path / "nope", dataset[1])

    def test_unparseable_results_raise(self, dataset):
        dataset_root, results_root = dataset
        fs.result_path(results_root, "w3-02").write_text("1,1,0,0\n")
        with pytest.raises(ValueError):
            metrics.evaluate_dataset(dataset_root, results_root)
