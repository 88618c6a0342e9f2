"""Running a tracker over the sequences of a dataset"""
import time
from collections.abc import Sequence as SequenceABC
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, NamedTuple, overload

import numpy as np

from . import config as cfg
from . import filesystem as fs
from .core import (
    Frame,
    GtRecord,
    SequenceMeta,
    group_by_frame,
    read_mot_file,
    read_seqinfo,
    write_mot_file,
)
from .loggers import IMPORTANT, TRACK_LOGGER
from .synthgen import estimate_background, read_frame
from .trackers import (
    DetectorConfig,
    TrackerConfig,
    blob_detector,
    create_tracker,
    oracle_noise_detector,
)


class SequenceFrames(SequenceABC):
    """The frames of a sequence on disk, read only when accessed

    Parameters
    ----------
    sequence_folder : Path
        The sequence's folder
    meta : SequenceMeta
        The sequence's metadata
    """

    def __init__(self, sequence_folder: Path, meta: SequenceMeta):
        self.sequence_folder = sequence_folder
        self.meta = meta

    def __len__(self) -> int:
        return self.meta.length

    @overload
    def __getitem__(self, position: int) -> Frame:
        ...

    @overload
    def __getitem__(self, position: slice) -> list[Frame]:
        ...

    def __getitem__(self, position):
        if isinstance(position, slice):
            return [self[i] for i in range(*position.indices(len(self)))]
        if position < 0:
            position += len(self)
        if not 0 <= position < len(self):
            raise IndexError(f"{self.meta.name} has no frame {position + 1}")
        index = position + 1
        return read_frame(
            fs.frame_path(
                self.sequence_folder, index, self.meta.im_dir, self.meta.im_ext
            ),
            index,
        )


class TrackJob(NamedTuple):
    """Everything needed to track one sequence"""

    sequence_folder: Path
    results_root: Path
    tracker: str
    tracker_config: TrackerConfig
    detector_config: DetectorConfig
    seed: int


def detector_stream(seed: int, sequence_name: str) -> np.random.Generator:
    """The random stream of the detector on one sequence, derived from the
    run seed and the sequence name"""
    return np.random.default_rng(
        np.random.SeedSequence([seed, *sequence_name.encode("utf-8")])
    )


def needs_background(job: TrackJob) -> bool:
    """Whether a background model has to be estimated for the job"""
    return job.detector_config.kind == "blob" or (
        job.tracker == "dsft" and job.tracker_config.use_dcm
    )


def track_sequence(job: TrackJob) -> list[GtRecord]:
    """Run a tracker over one sequence

    Parameters
    ----------
    job : TrackJob
        The sequence, the tracker and the detector settings

    Returns
    -------
    list of GtRecord
        The tracker output, one record per reported box (class unknown,
        confidence the score of the detection it was matched to)

    Raises
    ------
    FileNotFoundError
        If a file of the sequence is missing
    ValueError
        If a file of the sequence can't be parsed
    """
    meta = read_seqinfo(fs.seqinfo_path(job.sequence_folder))
    frames = SequenceFrames(job.sequence_folder, meta)
    tracker = create_tracker(job.tracker, job.tracker_config)

    background = None
    if needs_background(job):
        background = estimate_background(frames)

    gt_frames: dict[int, list[GtRecord]] = {}
    if job.detector_config.kind == "oracle":
        gt_frames = group_by_frame(
            read_mot_file(fs.gt_path(job.sequence_folder)), meta.length
        )
    rng = detector_stream(job.seed, meta.name)

    records: list[GtRecord] = []
    for frame in frames:
        if job.detector_config.kind == "oracle":
            detections = oracle_noise_detector(
                gt_frames.get(frame.index, []),
                rng,
                job.detector_config,
                (meta.width, meta.height),
                frame.index,
            )
        else:
            assert background is not None
            detections = blob_detector(frame, background, job.detector_config)
        for track in tracker.update(frame, detections, background):
            records.append(
                GtRecord(frame.index, track.id, track.last_box, conf=track.score)
            )
    return records


def _track_job(job: TrackJob) -> str:
    start = time.perf_counter()
    name = job.sequence_folder.name
    records = track_sequence(job)
    write_mot_file(fs.result_path(job.results_root, name), records)
    TRACK_LOGGER.info(
        f"Tracked {name} with {job.tracker} in {time.perf_counter() - start:.2f}s"
    )
    return name


def dumps_run_config(command: str, properties: dict[str, Any], **sections) -> str:
    """Render the fully resolved configuration of a run"""
    return cfg.dumps(
        f"mptbench {command} run config",
        {"command": command, **properties},
        **sections,
    )


def write_run_config(output_root: Path, contents: str) -> None:
    path = output_root / fs.RUN_CONFIG_NAME
    try:
        path.write_text(contents)
    except OSError as write_fail:
        raise OSError(f"Could not write {path}") from write_fail


def track_dataset(
    dataset_root: Path,
    results_root: Path,
    tracker: str = "dsft",
    tracker_config: TrackerConfig | None = None,
    detector_config: DetectorConfig | None = None,
    seed: int = 0,
    split: str = "test",
    jobs: int = 1,
    overwrite: bool = False,
) -> list[str]:
    """Run a tracker over every selected sequence of a dataset

    Parameters
    ----------
    dataset_root : Path
        The root of the dataset
    results_root : Path
        Where to write one `<sequence name>.txt` per sequence plus the run's
        `run.cfg`
    tracker : str, optional
        The tracker to run. Default is "dsft".
    tracker_config : TrackerConfig, optional
        The tracker settings
    detector_config : DetectorConfig, optional
        The detector settings
    seed : int, optional
        The seed of the detector noise. Default is 0.
    split : str, optional
        "train", "test" (default) or "all"
    jobs : int, optional
        The number of sequences to track concurrently. The output does not
        depend on this. Default is 1.
    overwrite : bool, optional
        Whether to write into a non-empty folder. Default is False.

    Returns
    -------
    list of str
        The names of the tracked sequences

    Raises
    ------
    FileNotFoundError
        If the dataset doesn't exist
    FileExistsError
        If the results folder isn't empty and overwriting wasn't requested
    NotImplementedError
        If the tracker isn't supported
    ValueError
        If a setting is invalid
    """
    tracker_config = (tracker_config or TrackerConfig()).validate()
    detector_config = (detector_config or DetectorConfig()).validate()
    create_tracker(tracker, tracker_config)
    folders = fs.sequence_folders(dataset_root, split)
    if not fs.is_compatible_dataset(dataset_root):
        TRACK_LOGGER.warning(
            f"{dataset_root} was generated by an incompatible version of mptbench"
        )
    fs.ensure_writable_output(results_root, overwrite=overwrite)

    TRACK_LOGGER.log(
        IMPORTANT,
        f"Tracking {len(folders)} {split} sequences with {tracker}"
        f" on {detector_config.kind} detections",
    )
    results_root.mkdir(parents=True, exist_ok=True)
    track_jobs = [
        TrackJob(folder, results_root, tracker, tracker_config, detector_config, seed)
        for folder in folders
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            names = list(pool.map(_track_job, track_jobs))
    else:
        names = [_track_job(job) for job in track_jobs]

    write_run_config(
        results_root,
        dumps_run_config(
            "track",
            {
                "dataset": dataset_root.absolute(),
                "tracker": tracker,
                "seed": seed,
                "split": split,
            },
            tracker=tracker_config._asdict(),
            detector=detector_config._asdict(),
        ),
    )
    return names
