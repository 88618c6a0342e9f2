"""Rendering whole sequences and laying out a full benchmark on disk"""
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np
from PIL import Image

from .. import config as cfg
from .. import filesystem as fs
from ..core import Frame, GtRecord, SequenceMeta, dumps_seqinfo, write_mot_file
from ..loggers import GENERATE_LOGGER, IMPORTANT
from .backgrounds import PRESETS, BackgroundSpec, render_background
from .compositing import add_sensor_noise, composite_frame
from .motion import step_motion
from .scenario import ScenarioConfig, sample_scenario, sprite_library
from .sprites import SpriteAsset

_MASK64 = (1 << 64) - 1

_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One step of the SplitMix64 generator: advance the state by the golden
    gamma and scramble it

    Parameters
    ----------
    state : int
        A 64-bit unsigned integer

    Returns
    -------
    int
        A well-mixed 64-bit unsigned integer
    """
    z = (state + _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def sequence_seed(master_seed: int, background_id: int, sequence_index: int) -> int:
    """Derive the seed of one sequence from the master seed

    Parameters
    ----------
    master_seed : int
        The benchmark's master seed
    background_id : int
        The background preset (1-14)
    sequence_index : int
        The 1-indexed position of the sequence among its background's

    Returns
    -------
    int
        `splitmix64(master_seed + k × golden gamma)` with
        `k = (background_id << 32) | sequence_index`, all mod 2⁶⁴
    """
    k = (background_id << 32) | sequence_index
    return splitmix64((master_seed + k * _GOLDEN_GAMMA) & _MASK64)


class SequenceRun(NamedTuple):
    """A sequence that's been set up but not yet rendered

    Parameters
    ----------
    meta : SequenceMeta
        The sequence's metadata
    background : Frame
        The clean (noise-free) background
    frames : iterator of (Frame, list of GtRecord)
        Lazily renders each frame along with its records. Ids here are actor
        numbers and have not yet been made contiguous.
    """

    meta: SequenceMeta
    background: Frame
    frames: Iterator[tuple[Frame, list[GtRecord]]]


def stream_sequence(
    config: ScenarioConfig,
    background_spec: BackgroundSpec,
    seed: int,
    name: str | None = None,
    library: Sequence[SpriteAsset] | None = None,
) -> SequenceRun:
    """Set up a sequence for frame-by-frame rendering

    Parameters
    ----------
    config : ScenarioConfig
        The generation settings
    background_spec : BackgroundSpec
        The background to render over
    seed : int
        The sequence seed. Independent streams for the background, the
        scenario, the motion and the sensor noise are spawned from it.
    name : str, optional
        The sequence name. Defaults to the background label followed by the
        seed.
    library : list-like of SpriteAsset, optional
        The sprites to draw from. Defaults to the library the config points
        to.

    Returns
    -------
    SequenceRun
        The metadata, the background and a generator over the frames

    Raises
    ------
    GenerationError
        If the scenario cannot be realized
    """
    background_stream, scenario_stream, motion_stream, noise_stream = (
        np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(4)
    )
    background = render_background(
        background_spec, background_stream, config.frame_size
    )
    min_length, max_length = config.frame_count_range
    length = int(scenario_stream.integers(min_length, max_length + 1))
    actors = sample_scenario(config, background_spec.id, scenario_stream, library)

    width, height = config.frame_size
    meta = SequenceMeta(
        name=name or f"{background_spec.label}-{seed:016x}",
        fps=config.fps,
        width=width,
        height=height,
        length=length,
        background_id=background_spec.id,
    )

    def render() -> Iterator[tuple[Frame, list[GtRecord]]]:
        states = [state for _, state in actors]
        for index in range(1, length + 1):
            if index > 1:
                states = [step_motion(state, motion_stream) for state in states]
            frame, records = composite_frame(
                background,
                [(sprite, state) for (sprite, _), state in zip(actors, states)],
                frame_index=index,
            )
            yield add_sensor_noise(frame, config.noise_sigma, noise_stream), records

    return SequenceRun(meta, background, render())


def relabel_ids(records: Sequence[GtRecord]) -> list[GtRecord]:
    """Renumber identities 1..K in order of first appearance (ties within a
    frame broken by the original id)"""
    mapping: dict[int, int] = {}
    for record in sorted(records, key=lambda record: (record.frame, record.id)):
        mapping.setdefault(record.id, len(mapping) + 1)
    return sorted(
        (record._replace(id=mapping[record.id]) for record in records),
        key=lambda record: (record.frame, record.id),
    )


def generate_sequence(
    config: ScenarioConfig,
    background_spec: BackgroundSpec,
    seed: int,
    name: str | None = None,
    library: Sequence[SpriteAsset] | None = None,
) -> tuple[list[Frame], list[GtRecord], SequenceMeta]:
    """Render a complete sequence in memory

    Parameters
    ----------
    config : ScenarioConfig
        The generation settings
    background_spec : BackgroundSpec
        The background to render over
    seed : int
        The sequence seed, which fully determines the output
    name : str, optional
        The sequence name
    library : list-like of SpriteAsset, optional
        The sprites to draw from

    Returns
    -------
    list of Frame
        The frames, indexed from 1
    list of GtRecord
        The ground truth, with ids forming the contiguous set 1..K
    SequenceMeta
        The sequence metadata

    Raises
    ------
    GenerationError
        If the scenario cannot be realized
    """
    run = stream_sequence(config, background_spec, seed, name, library)
    frames: list[Frame] = []
    records: list[GtRecord] = []
    for frame, frame_records in run.frames:
        frames.append(frame)
        records.extend(frame_records)
    return frames, relabel_ids(records), run.meta


class SequencePlan(NamedTuple):
    """Where and how to render one sequence of a benchmark"""

    split: str
    name: str
    background_id: int
    sequence_index: int
    seed: int


def plan_benchmark(config: ScenarioConfig) -> list[SequencePlan]:
    """Lay out every sequence of a benchmark

    Returns
    -------
    list of SequencePlan
        One plan per (background, sequence index), 14 × the configured number
        of sequences per background. Odd sequence indices go to the training
        split and even ones to the test split.
    """
    return [
        SequencePlan(
            fs.split_of(sequence_index),
            fs.sequence_name(spec.label, sequence_index),
            spec.id,
            sequence_index,
            sequence_seed(config.master_seed, spec.id, sequence_index),
        )
        for spec in PRESETS
        for sequence_index in range(1, config.sequences_per_background + 1)
    ]


def write_frame(path: Path, frame: Frame) -> None:
    """Save a frame as a (lossless) PNG"""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(frame.pixels, mode="RGB").save(path, format="PNG")
    except OSError as write_fail:
        raise OSError(f"Could not write {path}") from write_fail


def read_frame(path: Path, index: int = 0) -> Frame:
    """Load a frame from an image file"""
    try:
        with Image.open(path) as image:
            return Frame(index, np.asarray(image.convert("RGB"), dtype=np.uint8).copy())
    except FileNotFoundError as not_found:
        raise FileNotFoundError(f"Could not open {path}") from not_found
    except OSError as read_fail:
        raise OSError(f"Could not read {path}") from read_fail


def write_sequence(
    dataset_root: Path, config: ScenarioConfig, plan: SequencePlan
) -> SequenceMeta:
    """Render a sequence straight to disk

    Returns
    -------
    SequenceMeta
        The metadata of the written sequence
    """
    start = time.perf_counter()
    sequence_folder = fs.sequence_root(dataset_root, plan.split, plan.name)
    run = stream_sequence(
        config,
        PRESETS[plan.background_id - 1],
        plan.seed,
        name=plan.name,
        library=sprite_library(config),
    )
    records: list[GtRecord] = []
    for frame, frame_records in run.frames:
        write_frame(
            fs.frame_path(
                sequence_folder, frame.index, run.meta.im_dir, run.meta.im_ext
            ),
            frame,
        )
        records.extend(frame_records)

    write_mot_file(fs.gt_path(sequence_folder), relabel_ids(records))
    seqinfo = fs.seqinfo_path(sequence_folder)
    try:
        seqinfo.write_text(dumps_seqinfo(run.meta))
    except OSError as write_fail:
        raise OSError(f"Could not write {seqinfo}") from write_fail

    GENERATE_LOGGER.info(
        f"Wrote {plan.split}/{plan.name} ({run.meta.length} frames)"
        f" in {time.perf_counter() - start:.1f}s"
    )
    return run.meta


def _write_sequence_job(
    args: tuple[Path, ScenarioConfig, SequencePlan]
) -> SequenceMeta:
    return write_sequence(*args)


def dumps_manifest(config: ScenarioConfig, plans: Sequence[SequencePlan]) -> str:
    """Render the manifest listing every sequence of the benchmark and its
    seed"""
    return cfg.dumps(
        "mptbench benchmark manifest",
        {"sequence-count": len(plans)},
        scenario=config.to_section(),
        sequences={
            f"{plan.split}/{plan.name}": f"{plan.seed:#018x}"
            for plan in sorted(plans, key=lambda plan: (plan.split, plan.name))
        },
    )


def generate_benchmark(
    config: ScenarioConfig,
    dataset_root: Path,
    jobs: int = 1,
    overwrite: bool = False,
) -> list[SequencePlan]:
    """Render a complete benchmark

    Parameters
    ----------
    config : ScenarioConfig
        The generation settings
    dataset_root : Path
        Where to write the dataset. The layout is
        `<root>/<split>/<label>-<index>/{img1/%06d.png, gt/gt.txt, seqinfo.ini}`
        plus a `manifest.cfg` at the root.
    jobs : int, optional
        The number of sequences to render concurrently. The output does not
        depend on this. Default is 1.
    overwrite : bool, optional
        Whether to write into a non-empty folder. Default is False.

    Returns
    -------
    list of SequencePlan
        The sequences that were written

    Raises
    ------
    ValueError
        If the configuration is invalid
    FileExistsError
        If the dataset root isn't empty and overwriting wasn't requested
    GenerationError
        If a scenario can't be realized
    OSError
        If a file can't be written
    """
    config.validate()
    fs.ensure_writable_output(dataset_root, overwrite=overwrite)
    sprite_library(config)  # fail fast on a bad sprite directory
    plans = plan_benchmark(config)

    GENERATE_LOGGER.log(
        IMPORTANT,
        f"Generating {len(plans)} sequences into {dataset_root}"
        f" (master seed {config.master_seed})",
    )
    dataset_root.mkdir(parents=True, exist_ok=True)
    job_args = [(dataset_root, config, plan) for plan in plans]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_write_sequence_job, job_args))
    else:
        for args in job_args:
            _write_sequence_job(args)

    manifest = fs.manifest_path(dataset_root)
    try:
        manifest.write_text(dumps_manifest(config, plans))
    except OSError as write_fail:
        raise OSError(f"Could not write {manifest}") from write_fail
    GENERATE_LOGGER.log(IMPORTANT, f"Benchmark written to {dataset_root}")
    return plans
