"""CLEAR-MOT and identity scoring of tracker output against ground truth"""
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import filesystem as fs
from .core import GtRecord, boxes_to_array, group_by_frame, iou_matrix, read_mot_file
from .loggers import EVALUATE_LOGGER
from .trackers.assignment import hungarian_assign

IOU_THRESHOLD = 0.5

AVERAGE_LABEL = "Average"

# exceeds the total cost of any assignment made only of admissible pairs
_INADMISSIBLE = 1e6


class FrameMatch(NamedTuple):
    """The CLEAR-MOT outcome of one frame

    Parameters
    ----------
    matches : dict of int to int
        The predicted id matched to each ground-truth id
    fp : int
        The predictions matched to nothing
    fn : int
        The ground-truth boxes matched to nothing
    idsw : int
        The ground-truth ids matched to a different predicted id than the
        last time they were matched
    """

    matches: dict[int, int]
    fp: int
    fn: int
    idsw: int


def _overlaps(gt: Sequence[GtRecord], pred: Sequence[GtRecord]) -> np.ndarray:
    return iou_matrix(
        boxes_to_array(record.box for record in gt),
        boxes_to_array(record.box for record in pred),
    )


def match_frame(
    prev_matches: dict[int, int],
    gt_records: Sequence[GtRecord],
    pred_records: Sequence[GtRecord],
) -> FrameMatch:
    """Match one frame's predictions to its ground truth

    Parameters
    ----------
    prev_matches : dict of int to int
        The predicted id each ground-truth id was most recently matched to
    gt_records : list-like of GtRecord
        The frame's ground truth
    pred_records : list-like of GtRecord
        The frame's predictions

    Returns
    -------
    FrameMatch
        Previous pairs whose boxes still overlap with IoU ≥ 0.5 are kept
        first (in ground-truth id order). The rest are matched by minimum
        total 1 - IoU among the pairs with IoU ≥ 0.5, maximizing the number
        of matches. Only these new matches can be identity switches.
    """
    overlaps = _overlaps(gt_records, pred_records)
    admissible = overlaps >= IOU_THRESHOLD
    gt_rows = {record.id: row for row, record in enumerate(gt_records)}
    pred_cols = {record.id: col for col, record in enumerate(pred_records)}

    matches: dict[int, int] = {}
    taken_rows: set[int] = set()
    taken_cols: set[int] = set()
    for gt_id in sorted(prev_matches):
        pred_id = prev_matches[gt_id]
        row, col = gt_rows.get(gt_id), pred_cols.get(pred_id)
        if row is None or col is None or col in taken_cols:
            continue
        if admissible[row, col]:
            matches[gt_id] = pred_id
            taken_rows.add(row)
            taken_cols.add(col)

    rows = [row for row in range(len(gt_records)) if row not in taken_rows]
    cols = [col for col in range(len(pred_records)) if col not in taken_cols]
    idsw = 0
    if rows and cols:
        block = np.ix_(rows, cols)
        cost = np.where(admissible[block], 1 - overlaps[block], _INADMISSIBLE)
        for i, j in hungarian_assign(cost, gate=1.0).matches:
            gt_id, pred_id = gt_records[rows[i]].id, pred_records[cols[j]].id
            if gt_id in prev_matches and prev_matches[gt_id] != pred_id:
                idsw += 1
            matches[gt_id] = pred_id

    return FrameMatch(
        matches,
        fp=len(pred_records) - len(matches),
        fn=len(gt_records) - len(matches),
        idsw=idsw,
    )


class ClearMot(NamedTuple):
    """Summed CLEAR-MOT counts"""

    fp: int
    fn: int
    idsw: int
    gt_total: int

    @property
    def mota(self) -> float:
        """1 - (FP + FN + IDSW) / GT, or NaN when there's no ground truth"""
        if self.gt_total == 0:
            return math.nan
        return 1 - (self.fp + self.fn + self.idsw) / self.gt_total


def _frames(gt: Iterable[GtRecord], pred: Iterable[GtRecord]):
    gt_frames = group_by_frame(gt)
    pred_frames = group_by_frame(pred)
    for frame in sorted(set(gt_frames) | set(pred_frames)):
        yield gt_frames.get(frame, []), pred_frames.get(frame, [])


def compute_clearmot(
    gt: Iterable[GtRecord], pred: Iterable[GtRecord]
) -> ClearMot:
    """Score a whole sequence with the CLEAR-MOT rules

    Parameters
    ----------
    gt : list-like of GtRecord
        The sequence's ground truth
    pred : list-like of GtRecord
        The tracker's output

    Returns
    -------
    ClearMot
        The summed per-frame counts. Its `mota` may be negative.
    """
    last_match: dict[int, int] = {}
    fp = fn = idsw = gt_total = 0
    for gt_frame, pred_frame in _frames(gt, pred):
        outcome = match_frame(last_match, gt_frame, pred_frame)
        last_match.update(outcome.matches)
        fp += outcome.fp
        fn += outcome.fn
        idsw += outcome.idsw
        gt_total += len(gt_frame)
    return ClearMot(fp, fn, idsw, gt_total)


class IdentityScore(NamedTuple):
    """Identity-level true positives and errors"""

    idtp: int
    idfp: int
    idfn: int

    @property
    def idf1(self) -> float:
        """2 IDTP / (2 IDTP + IDFP + IDFN), or NaN when there's nothing to
        score"""
        denominator = 2 * self.idtp + self.idfp + self.idfn
        if denominator == 0:
            return math.nan
        return 2 * self.idtp / denominator


def compute_identity_score(
    gt: Iterable[GtRecord], pred: Iterable[GtRecord]
) -> IdentityScore:
    """Match ground-truth identities to predicted identities over the whole
    sequence

    Returns
    -------
    IdentityScore
        IDTP is the largest total number of frames in which a ground-truth id
        and its (one-to-one) matched predicted id overlap with IoU ≥ 0.5.
        Every other ground-truth box is an IDFN and every other predicted box
        an IDFP.
    """
    gt_ids: dict[int, int] = {}
    pred_ids: dict[int, int] = {}
    co_occurrences: dict[tuple[int, int], int] = {}
    gt_total = pred_total = 0
    for gt_frame, pred_frame in _frames(gt, pred):
        gt_total += len(gt_frame)
        pred_total += len(pred_frame)
        for record in gt_frame:
            gt_ids.setdefault(record.id, len(gt_ids))
        for record in pred_frame:
            pred_ids.setdefault(record.id, len(pred_ids))
        if not gt_frame or not pred_frame:
            continue
        rows, cols = np.nonzero(_overlaps(gt_frame, pred_frame) >= IOU_THRESHOLD)
        for row, col in zip(rows, cols):
            pair = (gt_frame[row].id, pred_frame[col].id)
            co_occurrences[pair] = co_occurrences.get(pair, 0) + 1

    idtp = 0
    if co_occurrences:
        overlap = np.zeros((len(gt_ids), len(pred_ids)), dtype=np.int64)
        for (gt_id, pred_id), count in co_occurrences.items():
            overlap[gt_ids[gt_id], pred_ids[pred_id]] = count
        rows, cols = linear_sum_assignment(overlap, maximize=True)
        idtp = int(overlap[rows, cols].sum())
    return IdentityScore(idtp, pred_total - idtp, gt_total - idtp)


def compute_idf1(gt: Iterable[GtRecord], pred: Iterable[GtRecord]) -> float:
    """The IDF1 of a tracker's output (NaN when both inputs are empty)"""
    return compute_identity_score(gt, pred).idf1


class SequenceScore(NamedTuple):
    """The pooled counts of one sequence (or of a group of sequences)

    Parameters
    ----------
    name : str
        The sequence name (or the group label)
    background : str
        The background label (such as "b3")
    gt_total : int
        The number of ground-truth boxes
    pred_total : int
        The number of predicted boxes
    fp, fn, idsw : int
        The CLEAR-MOT error counts
    idtp, idfp, idfn : int
        The identity-level counts
    """

    name: str
    background: str
    gt_total: int
    pred_total: int
    fp: int
    fn: int
    idsw: int
    idtp: int
    idfp: int
    idfn: int

    @property
    def mota(self) -> float:
        return ClearMot(self.fp, self.fn, self.idsw, self.gt_total).mota

    @property
    def idf1(self) -> float:
        return IdentityScore(self.idtp, self.idfp, self.idfn).idf1


def score_sequence(
    name: str, gt: Sequence[GtRecord], pred: Sequence[GtRecord]
) -> SequenceScore:
    """Compute every count of one sequence"""
    clear = compute_clearmot(gt, pred)
    identity = compute_identity_score(gt, pred)
    return SequenceScore(
        name=name,
        background=fs.background_label_of(name),
        gt_total=clear.gt_total,
        pred_total=len(pred),
        fp=clear.fp,
        fn=clear.fn,
        idsw=clear.idsw,
        idtp=identity.idtp,
        idfp=identity.idfp,
        idfn=identity.idfn,
    )


def pool(
    scores: Iterable[SequenceScore], name: str, background: str = ""
) -> SequenceScore:
    """Sum the counts of several sequences (ratios are then computed from the
    pooled counts, not averaged)"""
    totals = np.zeros(8, dtype=np.int64)
    for score in scores:
        totals += np.array(score[2:], dtype=np.int64)
    return SequenceScore(name, background, *(int(total) for total in totals))


class EvalReport(NamedTuple):
    """The scores of a results folder

    Parameters
    ----------
    per_sequence : list of SequenceScore
        One row per sequence, in sequence-name order
    per_background : list of SequenceScore
        The pooled counts of each background, in background order
    overall : SequenceScore
        The pooled counts of every sequence
    """

    per_sequence: list[SequenceScore]
    per_background: list[SequenceScore]
    overall: SequenceScore

    @property
    def mota(self) -> float:
        return self.overall.mota

    @property
    def idf1(self) -> float:
        return self.overall.idf1

    @property
    def fp(self) -> int:
        return self.overall.fp

    @property
    def fn(self) -> int:
        return self.overall.fn

    @property
    def idsw(self) -> int:
        return self.overall.idsw

    @property
    def gt_total(self) -> int:
        return self.overall.gt_total


def _background_order(label: str) -> tuple[int, str, int]:
    family, number = label[:1], label[1:]
    # blue, then white, then anything hand-assembled
    rank = {"b": 0, "w": 1}.get(family, 2)
    return rank, family, int(number) if number.isdigit() else 0


def build_report(scores: Sequence[SequenceScore]) -> EvalReport:
    """Group sequence scores by background and pool them"""
    per_sequence = sorted(scores, key=lambda score: score.name)
    labels = sorted({score.background for score in scores}, key=_background_order)
    per_background = [
        pool(
            (score for score in per_sequence if score.background == label),
            label,
            label,
        )
        for label in labels
    ]
    return EvalReport(per_sequence, per_background, pool(per_sequence, AVERAGE_LABEL))


def _score_job(args: tuple[Path, Path]) -> SequenceScore:
    sequence_folder, results_root = args
    name = sequence_folder.name
    gt = read_mot_file(fs.gt_path(sequence_folder))
    results = fs.result_path(results_root, name)
    if results.exists():
        pred = read_mot_file(results)
    else:
        EVALUATE_LOGGER.warning(
            f"No results found for {name} at {results}. Scoring it as empty."
        )
        pred = []
    score = score_sequence(name, gt, pred)
    EVALUATE_LOGGER.debug(
        f"{name}: MOTA {score.mota:.3f}, IDF1 {score.idf1:.3f}, IDs {score.idsw}"
    )
    return score


def evaluate_dataset(
    dataset_root: Path, results_root: Path, split: str = "test", jobs: int = 1
) -> EvalReport:
    """Score a folder of tracker output against a dataset

    Parameters
    ----------
    dataset_root : Path
        The root of the dataset
    results_root : Path
        The folder holding one `<sequence name>.txt` result file per sequence
    split : str, optional
        "train", "test" (default) or "all"
    jobs : int, optional
        The number of sequences to score concurrently. Default is 1.

    Returns
    -------
    EvalReport
        Per-sequence rows, pooled per-background rows and the pooled overall
        scores. A sequence without a result file is scored as if the tracker
        had output nothing.

    Raises
    ------
    FileNotFoundError
        If the dataset or the results folder doesn't exist
    ValueError
        If a ground-truth or result file can't be parsed
    """
    if not results_root.is_dir():
        raise FileNotFoundError(f"No results folder exists at {results_root}")
    folders = fs.sequence_folders(dataset_root, split)
    if not folders:
        EVALUATE_LOGGER.warning(f"No {split} sequences found in {dataset_root}")
    job_args = [(folder, results_root) for folder in folders]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool_executor:
            scores = list(pool_executor.map(_score_job, job_args))
    else:
        scores = [_score_job(args) for args in job_args]
    return build_report(scores)
