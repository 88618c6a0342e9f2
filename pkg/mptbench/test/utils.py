"""Testing utilities"""
from importlib.resources import as_file
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from mptbench import filesystem as fs
from mptbench.core import (
    BoundingBox,
    GtRecord,
    SequenceMeta,
    dumps_seqinfo,
    group_by_frame,
    iou,
    write_mot_file,
)
from mptbench.synthgen import ScenarioConfig, get_preset
from mptbench.trackers import Track, TrackStatus
from mptbench.trackers.tracks import STATE_DIM, box_state

from . import testing_files

with as_file(testing_files.SCENARIO_CONFIG) as scenario_cfg:
    SMALL_SCENARIO: ScenarioConfig = ScenarioConfig.from_cfg(scenario_cfg)


def make_track(
    box: BoundingBox,
    track_id: int = 1,
    status: TrackStatus = TrackStatus.CONFIRMED,
    hits: int = 1,
    misses: int = 0,
) -> Track:
    """Build a motionless track sitting on a box"""
    return Track(
        id=track_id,
        kstate=box_state(box),
        covariance=np.eye(STATE_DIM),
        hits=hits,
        misses=misses,
        status=status,
        last_box=box,
    )


def write_sequence_stub(
    dataset_root: Path,
    split: str,
    name: str,
    gt_records: Sequence[GtRecord],
    length: int | None = None,
    frame_size: tuple[int, int] = (64, 48),
) -> Path:
    """Write the metadata and ground truth of a sequence (but no frames),
    which is all scoring needs"""
    folder = fs.sequence_root(dataset_root, split, name)
    folder.mkdir(parents=True)
    try:
        background_id = get_preset(fs.background_label_of(name)).id
    except KeyError:
        background_id = 1
    meta = SequenceMeta(
        name=name,
        fps=25,
        width=frame_size[0],
        height=frame_size[1],
        length=length or max((record.frame for record in gt_records), default=1),
        background_id=background_id,
    )
    fs.seqinfo_path(folder).write_text(dumps_seqinfo(meta))
    write_mot_file(fs.gt_path(folder), gt_records)
    return folder


def static_track(
    track_id: int, box: BoundingBox, frames: Sequence[int]
) -> list[GtRecord]:
    """Records of an identity that sits still over the given frames"""
    return [GtRecord(frame, track_id, box) for frame in frames]


def random_box(
    rng: np.random.Generator,
    extent: float = 100.0,
    size_range: tuple[float, float] = (5.0, 30.0),
) -> BoundingBox:
    w, h = rng.uniform(*size_range, 2)
    x, y = rng.uniform(0, extent, 2)
    return BoundingBox(float(x), float(y), float(w), float(h))


def random_scenario(
    rng: np.random.Generator, max_ids: int = 5, max_frames: int = 10
) -> tuple[list[GtRecord], list[GtRecord]]:
    """Generate a tiny, messy tracking scenario: a handful of drifting
    ground-truth boxes, and predictions that follow them loosely, drop out,
    swap labels and hallucinate"""
    n_frames = int(rng.integers(1, max_frames + 1))
    n_gt = int(rng.integers(1, max_ids + 1))
    n_pred = int(rng.integers(1, max_ids + 1))

    starts = [random_box(rng, extent=40.0, size_range=(8.0, 20.0)) for _ in range(n_gt)]
    velocities = rng.uniform(-3, 3, (n_gt, 2))
    labels = {gt_id: int(rng.integers(1, n_pred + 1)) for gt_id in range(1, n_gt + 1)}

    gt: list[GtRecord] = []
    pred: list[GtRecord] = []
    for frame in range(1, n_frames + 1):
        used: set[int] = set()
        for gt_id, (start, velocity) in enumerate(zip(starts, velocities), start=1):
            if rng.random() > 0.85:
                continue
            box = start.translate(*(velocity * frame))
            gt.append(GtRecord(frame, gt_id, box))
            if rng.random() < 0.2:
                labels[gt_id] = int(rng.integers(1, n_pred + 1))
            if rng.random() > 0.8 or labels[gt_id] in used:
                continue
            dx, dy = rng.normal(0, 0.15, 2) * (box.w, box.h)
            sw, sh = rng.uniform(0.7, 1.3, 2)
            pred.append(
                GtRecord(
                    frame,
                    labels[gt_id],
                    BoundingBox(box.x + dx, box.y + dy, box.w * sw, box.h * sh),
                )
            )
            used.add(labels[gt_id])
        spare = [pred_id for pred_id in range(1, n_pred + 1) if pred_id not in used]
        if spare and rng.random() < 0.3:
            pred.append(GtRecord(frame, spare[0], random_box(rng, extent=60.0)))
    return gt, pred


def _partial_matchings(
    rows: Sequence[int], cols: Sequence[int], admissible: set[tuple[int, int]]
) -> Iterator[list[tuple[int, int]]]:
    """Every one-to-one matching made only of admissible pairs, including
    the empty one"""
    if not rows:
        yield []
        return
    row, rest = rows[0], rows[1:]
    yield from _partial_matchings(rest, cols, admissible)
    for col in cols:
        if (row, col) in admissible:
            remaining = [other for other in cols if other != col]
            for matching in _partial_matchings(rest, remaining, admissible):
                yield [(row, col), *matching]


def brute_force_clearmot(
    gt: Sequence[GtRecord], pred: Sequence[GtRecord]
) -> tuple[int, int, int, int]:
    """Reference CLEAR-MOT counts, with each frame's new matches found by
    enumerating every matching

    Returns
    -------
    (fp, fn, idsw, gt_total)
    """
    gt_frames, pred_frames = group_by_frame(gt), group_by_frame(pred)
    last_match: dict[int, int] = {}
    fp = fn = idsw = gt_total = 0
    for frame in sorted(set(gt_frames) | set(pred_frames)):
        gt_frame = gt_frames.get(frame, [])
        pred_frame = pred_frames.get(frame, [])
        gt_total += len(gt_frame)

        matched: dict[int, int] = {}
        free_gt = {record.id: record for record in gt_frame}
        free_pred = {record.id: record for record in pred_frame}
        for gt_id in sorted(last_match):
            pred_id = last_match[gt_id]
            if gt_id not in free_gt or pred_id not in free_pred:
                continue
            if iou(free_gt[gt_id].box, free_pred[pred_id].box) >= 0.5:
                matched[gt_id] = pred_id
                del free_gt[gt_id], free_pred[pred_id]

        admissible = {
            (gt_id, pred_id)
            for gt_id, gt_record in free_gt.items()
            for pred_id, pred_record in free_pred.items()
            if iou(gt_record.box, pred_record.box) >= 0.5
        }
        best = min(
            _partial_matchings(list(free_gt), list(free_pred), admissible),
            key=lambda matching: (
                -len(matching),
                sum(
                    1 - iou(free_gt[gt_id].box, free_pred[pred_id].box)
                    for gt_id, pred_id in matching
                ),
            ),
        )
        for gt_id, pred_id in best:
            if gt_id in last_match and last_match[gt_id] != pred_id:
                idsw += 1
            matched[gt_id] = pred_id

        fp += len(pred_frame) - len(matched)
        fn += len(gt_frame) - len(matched)
        last_match.update(matched)
    return fp, fn, idsw, gt_total


def brute_force_idtp(gt: Sequence[GtRecord], pred: Sequence[GtRecord]) -> int:
    """Reference IDTP: the best one-to-one identity matching, found by
    enumerating every one"""
    pred_frames = group_by_frame(pred)
    co_occurrences: dict[tuple[int, int], int] = {}
    for record in gt:
        for other in pred_frames.get(record.frame, []):
            if iou(record.box, other.box) >= 0.5:
                pair = (record.id, other.id)
                co_occurrences[pair] = co_occurrences.get(pair, 0) + 1
    gt_ids = sorted({record.id for record in gt})
    pred_ids = sorted({record.id for record in pred})
    return max(
        (
            sum(co_occurrences.get(pair, 0) for pair in matching)
            for matching in _partial_matchings(
                gt_ids, pred_ids, set(co_occurrences)
            )
        ),
        default=0,
    )
