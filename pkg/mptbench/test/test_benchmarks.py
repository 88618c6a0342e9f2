"""Long-running statistical checks. These only run with --run-benchmarks."""
import filecmp

import numpy as np
import pytest

from mptbench import filesystem as fs
from mptbench import similarity as sim
from mptbench.ablate import run_ablation
from mptbench.core import BoundingBox, Detection, Frame, GtRecord, read_seqinfo
from mptbench.features import extract_pyramid, normalize_pyramid
from mptbench.metrics import compute_clearmot, evaluate_dataset
from mptbench.synthgen import ScenarioConfig, generate_benchmark
from mptbench.track import track_dataset
from mptbench.trackers import DetectorConfig, TrackerConfig, create_tracker

pytestmark = pytest.mark.benchmark

PAIRED_SEEDS = range(10)

BLOB = DetectorConfig(kind="blob")


def short_scenario(master_seed: int) -> ScenarioConfig:
    return ScenarioConfig(
        master_seed=master_seed,
        sequences_per_background=1,
        frame_count_range=(40, 40),
        sprite_count_range=(3, 6),
        frame_size=(480, 360),
    )


def crossing_scene(
    seed: int, frame_count: int = 40
) -> tuple[list[Frame], Frame, list[list[GtRecord]]]:
    """A large and a small textured square passing through each other in
    opposite directions, the small one in front"""
    rng = np.random.default_rng(seed)
    background = np.empty((160, 320, 3), dtype=np.uint8)
    background[:] = (60, 120, 185)
    actors = []
    for side, x, y, speed in ((56, 16, 52, 6), (12, 292, 74, -6)):
        texture = rng.integers(0, 256, (side, side, 3), dtype=np.uint8)
        texture[..., 2] //= 2
        actors.append((texture, x, y + int(rng.integers(-4, 5)), speed))
    frames, truth = [], []
    for index in range(1, frame_count + 1):
        pixels = background.copy()
        records = []
        for number, (texture, x, y, speed) in enumerate(actors, start=1):
            side = len(texture)
            left = x + speed * (index - 1)
            pixels[y : y + side, left : left + side] = texture
            records.append(GtRecord(index, number, BoundingBox(left, y, side, side)))
        frames.append(Frame(index, pixels))
        truth.append(records)
    return frames, Frame(0, background), truth


@pytest.fixture(scope="module")
def seeded_datasets(tmp_path_factory):
    """One single-split benchmark per paired seed"""
    datasets = {}
    for seed in PAIRED_SEEDS:
        dataset_root = tmp_path_factory.mktemp(f"seed{seed}") / "dataset"
        generate_benchmark(short_scenario(seed), dataset_root, jobs=4)
        datasets[seed] = dataset_root
    yield datasets


def sign_consistent(improvements: list[float], at_least: int = 7) -> bool:
    return np.mean(improvements) > 0 and sum(gain > 0 for gain in improvements) >= (
        at_least
    )


class TestGenerator:
    def test_default_benchmark_shape(self, tmp_path):
        plans = generate_benchmark(ScenarioConfig(), tmp_path / "dataset", jobs=4)
        assert len(plans) == 140
        folders = fs.sequence_folders(tmp_path / "dataset", "all")
        assert len(folders) == 140
        assert {read_seqinfo(fs.seqinfo_path(folder)).fps for folder in folders} == {
            25
        }

    def test_full_size_regeneration_is_byte_identical(self, tmp_path):
        config = ScenarioConfig(master_seed=99, sequences_per_background=1)
        generate_benchmark(config, tmp_path / "serial")
        generate_benchmark(config, tmp_path / "parallel", jobs=4)
        for serial in (tmp_path / "serial").rglob("*"):
            if serial.is_file():
                parallel = tmp_path / "parallel" / serial.relative_to(
                    tmp_path / "serial"
                )
                assert filecmp.cmp(serial, parallel, shallow=False), serial


class TestOffsetRecovery:
    def test_translations_are_recovered_to_within_a_deep_cell(self):
        rng = np.random.default_rng(7)
        hits, total = 0, 0
        for _ in range(40):
            pixels = rng.integers(0, 256, (256, 256, 3), dtype=np.uint8)
            dx, dy = rng.integers(-32, 33, 2)
            shifted = np.roll(pixels, shift=(dy, dx), axis=(0, 1))
            prev = normalize_pyramid(extract_pyramid(Frame(1, pixels)))
            cur = normalize_pyramid(extract_pyramid(Frame(2, shifted)))
            for _ in range(5):
                center = tuple(float(value) for value in rng.uniform(64, 192, 2))
                volume = sim.compute_volume(prev, cur, center)
                offset_x, offset_y = sim.predict_offset(volume.fused)
                total += 1
                hits += abs(offset_x - dx) <= 8 and abs(offset_y - dy) <= 8
        assert hits / total >= 0.95


class TestNearOracleTracking:
    def test_noiseless_detections(self, seeded_datasets, tmp_path):
        dataset_root = seeded_datasets[0]
        track_dataset(
            dataset_root,
            tmp_path / "results",
            "dsft",
            detector_config=DetectorConfig(p_fn=0.0, p_fp=0.0, jitter_sigma=0.0),
            split="all",
            jobs=4,
        )
        report = evaluate_dataset(dataset_root, tmp_path / "results", split="all")
        scores = [score for score in report.per_sequence if score.gt_total > 0]
        assert len(scores) >= 10
        assert np.mean([score.mota for score in scores]) >= 0.95
        assert np.mean([score.idf1 for score in scores]) >= 0.90


class TestAblationDirection:
    @pytest.fixture(scope="class")
    def scheme_scores(self, seeded_datasets, tmp_path_factory):
        """(mota, idf1) of each scheme on each seed"""
        scores: dict[str, list[tuple[float, float]]] = {}
        for seed, dataset_root in seeded_datasets.items():
            for scheme, report in run_ablation(
                dataset_root,
                tmp_path_factory.mktemp(f"ablation{seed}"),
                detector_config=BLOB,
                seed=seed,
                split="all",
                jobs=4,
            ):
                scores.setdefault(scheme.name, []).append((report.mota, report.idf1))
        yield scores

    def gains(self, scheme_scores, better: str, worse: str, metric: int):
        return [
            high[metric] - low[metric]
            for high, low in zip(scheme_scores[better], scheme_scores[worse])
        ]

    def test_correction_improves_mota(self, scheme_scores):
        assert sign_consistent(self.gains(scheme_scores, "dcm", "baseline", 0))

    def test_fusion_improves_idf1(self, scheme_scores):
        assert sign_consistent(self.gains(scheme_scores, "mfsf", "baseline", 1))

    @pytest.mark.parametrize("other", ("baseline", "dcm", "mfsf"))
    @pytest.mark.parametrize("metric", (0, 1), ids=("mota", "idf1"))
    def test_both_modules_beat_every_other_scheme(self, scheme_scores, other, metric):
        assert sign_consistent(self.gains(scheme_scores, "dcm+mfsf", other, metric))


class TestComparativeOrdering:
    def test_dsft_is_no_worse_than_sort(self, seeded_datasets, tmp_path):
        motas: dict[str, list[float]] = {"dsft": [], "sort": []}
        for seed, dataset_root in seeded_datasets.items():
            for tracker in motas:
                results_root = tmp_path / f"{tracker}{seed}"
                track_dataset(
                    dataset_root,
                    results_root,
                    tracker,
                    TrackerConfig(),
                    BLOB,
                    seed=seed,
                    split="all",
                    jobs=4,
                )
                motas[tracker].append(
                    evaluate_dataset(dataset_root, results_root, split="all").mota
                )
        assert np.mean(motas["dsft"]) >= np.mean(motas["sort"])


class TestScaleFusion:
    def switches(self, config: TrackerConfig, seed: int) -> int:
        frames, background, truth = crossing_scene(seed)
        rng = np.random.default_rng(seed + 1000)
        tracker = create_tracker("dsft", config)
        predicted = []
        for frame, records in zip(frames, truth):
            detections = [
                Detection(record.box.translate(*rng.normal(size=2)), 1.0, frame.index)
                for record in records
                if rng.random() > 0.2
            ]
            predicted += [
                GtRecord(frame.index, track.id, track.last_box)
                for track in tracker.update(frame, detections, background)
            ]
        return compute_clearmot(
            [record for records in truth for record in records], predicted
        ).idsw

    def test_fusion_switches_no_more_than_the_deep_scale(self):
        fused = [self.switches(TrackerConfig(), seed) for seed in range(20)]
        deep = [
            self.switches(TrackerConfig(use_mfsf=False), seed) for seed in range(20)
        ]
        assert np.mean(fused) <= np.mean(deep)
