"""Tests for the detection sources"""
import numpy as np
import pytest

from mptbench.core import BoundingBox, Detection, Frame, GtRecord, iou
from mptbench.synthgen import (
    PRESETS,
    MotionState,
    composite_frame,
    draw_sprite,
    render_background,
)
from mptbench.trackers import DetectorConfig, blob_detector, oracle_noise_detector

FRAME_SIZE = (200, 150)

NOISELESS = DetectorConfig(p_fn=0.0, p_fp=0.0, jitter_sigma=0.0)


def gt_frame(frame: int = 4) -> list[GtRecord]:
    return [
        GtRecord(frame, 3, BoundingBox(120, 40, 30, 20)),
        GtRecord(frame, 1, BoundingBox(10, 10, 12, 16)),
        GtRecord(frame, 2, BoundingBox(60, 90, 8, 8)),
    ]


def flat(color=(40, 110, 170), size=(64, 48)) -> np.ndarray:
    pixels = np.empty((size[1], size[0], 3), dtype=np.uint8)
    pixels[:] = color
    return pixels


class TestOracleNoiseDetector:
    def test_noiseless_detections_are_the_ground_truth(self):
        detections = oracle_noise_detector(
            gt_frame(), np.random.default_rng(0), NOISELESS, FRAME_SIZE
        )
        assert detections == [
            Detection(record.box, 1.0, 4)
            for record in sorted(gt_frame(), key=lambda record: record.id)
        ]

    def test_everything_missed(self):
        config = NOISELESS._replace(p_fn=1.0)
        assert not oracle_noise_detector(
            gt_frame(), np.random.default_rng(0), config, FRAME_SIZE
        )

    def test_empty_frames_use_the_given_index(self):
        config = NOISELESS._replace(p_fp=50.0)
        detections = oracle_noise_detector(
            [], np.random.default_rng(1), config, FRAME_SIZE, frame_index=9
        )
        assert detections and {detection.frame for detection in detections} == {9}

    def test_same_seed_same_detections(self):
        config = DetectorConfig(p_fn=0.3, p_fp=2.0, jitter_sigma=2.0, score_sigma=0.2)
        first, second = (
            oracle_noise_detector(
                gt_frame(), np.random.default_rng(17), config, FRAME_SIZE
            )
            for _ in range(2)
        )
        assert first == second

    def test_miss_rate(self):
        rng = np.random.default_rng(2)
        config = NOISELESS._replace(p_fn=0.25)
        kept = sum(
            len(oracle_noise_detector(gt_frame(), rng, config, FRAME_SIZE))
            for _ in range(2000)
        )
        assert 1 - kept / 6000 == pytest.approx(0.25, abs=0.02)

    def test_spurious_rate_and_scores(self):
        rng = np.random.default_rng(3)
        config = NOISELESS._replace(p_fp=1.5, false_score_range=(0.1, 0.3))
        spurious = [
            detection
            for _ in range(2000)
            for detection in oracle_noise_detector([], rng, config, FRAME_SIZE)
        ]
        assert len(spurious) / 2000 == pytest.approx(1.5, abs=0.1)
        assert all(0.1 <= detection.score <= 0.3 for detection in spurious)
        assert all(
            detection.box.x >= 0
            and detection.box.y >= 0
            and detection.box.x2 <= FRAME_SIZE[0] + 1e-9
            and detection.box.y2 <= FRAME_SIZE[1] + 1e-9
            for detection in spurious
        )

    def test_jittered_boxes_stay_in_frame(self):
        rng = np.random.default_rng(4)
        config = NOISELESS._replace(jitter_sigma=8.0)
        edge = [GtRecord(1, 1, BoundingBox(0, 0, 6, 6))]
        for _ in range(300):
            for detection in oracle_noise_detector(edge, rng, config, FRAME_SIZE):
                assert detection.box.x >= 0 and detection.box.y >= 0

    def test_jitter_is_centered(self):
        rng = np.random.default_rng(5)
        config = NOISELESS._replace(jitter_sigma=2.0)
        record = GtRecord(1, 1, BoundingBox(80, 60, 20, 20))
        centers = np.array(
            [
                oracle_noise_detector([record], rng, config, FRAME_SIZE)[0].box.center
                for _ in range(2000)
            ]
        )
        assert centers.mean(axis=0) == pytest.approx((90, 70), abs=0.15)

    def test_score_noise_keeps_true_boxes_confident(self):
        rng = np.random.default_rng(6)
        config = NOISELESS._replace(score_sigma=0.5)
        scores = [
            detection.score
            for _ in range(200)
            for detection in oracle_noise_detector(gt_frame(), rng, config, FRAME_SIZE)
        ]
        assert min(scores) >= 0.5 and max(scores) <= 1.0
        assert min(scores) < 1.0


class TestBlobDetector:
    def test_patch_is_found_exactly(self):
        background = flat()
        pixels = background.copy()
        pixels[10:20, 30:45] = (140, 110, 170)
        detections = blob_detector(Frame(3, pixels), Frame(0, background))
        assert detections == [Detection(BoundingBox(30, 10, 15, 10), 1.0, 3)]

    def test_score_scales_with_the_difference(self):
        background = flat()
        pixels = background.copy()
        pixels[10:20, 30:45] = (72, 110, 170)
        (detection,) = blob_detector(Frame(1, pixels), Frame(0, background))
        assert detection.score == pytest.approx(0.5)

    def test_small_components_are_dropped(self):
        background = flat()
        pixels = background.copy()
        pixels[5:8, 5:7] = 0
        pixels[30:40, 30:40] = 0
        detections = blob_detector(Frame(1, pixels), Frame(0, background))
        assert [detection.box for detection in detections] == [
            BoundingBox(30, 30, 10, 10)
        ]

    def test_diagonal_neighbors_are_connected(self):
        background = flat()
        pixels = background.copy()
        pixels[10:15, 10:15] = 0
        pixels[15:20, 15:20] = 0
        detections = blob_detector(Frame(1, pixels), Frame(0, background))
        assert [detection.box for detection in detections] == [
            BoundingBox(10, 10, 10, 10)
        ]

    def test_static_frame_has_no_detections(self):
        background = flat()
        assert blob_detector(Frame(1, background.copy()), Frame(0, background)) == []

    def test_size_mismatch_raises(self):
        with pytest.raises(ValueError):
            blob_detector(Frame(1, flat(size=(64, 48))), Frame(0, flat(size=(48, 64))))

    @pytest.mark.parametrize("preset", (0, 7), ids=("blue", "white"))
    @pytest.mark.parametrize("species", (6, 10, 14, 18))
    @pytest.mark.parametrize("angle", (0.0, 0.7))
    def test_rendered_sprites_are_found(self, preset, species, angle):
        background = render_background(
            PRESETS[preset], np.random.default_rng(species), FRAME_SIZE
        )
        state = MotionState((90.0, 70.0), (0.0, 0.0), angle, 0.0, 0.0, (0, 0, 200, 150))
        frame, (record,) = composite_frame(
            background, [(draw_sprite(species), state)], frame_index=2
        )
        detections = blob_detector(frame, background)
        assert detections
        assert max(iou(detection.box, record.box) for detection in detections) >= 0.7

    def test_separate_sprites_are_separate_detections(self):
        background = render_background(
            PRESETS[2], np.random.default_rng(0), FRAME_SIZE
        )
        actors = [
            (
                draw_sprite(species),
                MotionState(position, (0.0, 0.0), 0.0, 0.0, 0.0, (0, 0, 200, 150)),
            )
            for species, position in ((9, (40.0, 40.0)), (12, (150.0, 100.0)))
        ]
        frame, records = composite_frame(background, actors, frame_index=1)
        detections = blob_detector(frame, background)
        assert len(detections) == 2
        for record in records:
            assert max(iou(d.box, record.box) for d in detections) >= 0.7


class TestDetectorConfig:
    @pytest.mark.parametrize(
        "overrides",
        (
            {"kind": "yolo"},
            {"p_fn": -0.1},
            {"p_fp": -1.0},
            {"jitter_sigma": -1.0},
            {"false_score_range": (0.5, 0.2)},
            {"min_area": 0},
            {"score_scale": 0.0},
        ),
        ids=(
            "kind",
            "p_fn",
            "p_fp",
            "jitter",
            "score_range",
            "min_area",
            "score_scale",
        ),
    )
    def test_invalid_settings_raise(self, overrides):
        with pytest.raises(ValueError):
            DetectorConfig(**overrides).validate()

    def test_defaults_are_valid(self):
        assert DetectorConfig().validate() == DetectorConfig()
