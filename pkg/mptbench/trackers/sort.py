"""IoU association of Kalman-predicted boxes, one stage"""
from typing import Sequence

import numpy as np

from ..core import BoundingBox, Detection, Frame, boxes_to_array, iou_matrix
from .assignment import Assignment, hungarian_assign
from .kalman import initiate, kalman_predict, kalman_update
from .tracks import (
    Track,
    Tracker,
    TrackerConfig,
    TrackSet,
    box_state,
    collect,
    mark_matched,
    mark_missed,
)


def predict(track: Track, config: TrackerConfig) -> Track:
    """Advance a track to the current frame (a no-op without the filter)"""
    return kalman_predict(track) if config.use_kalman else track


def predicted_box(track: Track, config: TrackerConfig) -> BoundingBox:
    """Where a (predicted) track is expected to be"""
    return track.box if config.use_kalman else track.last_box


def iou_cost(
    boxes: Sequence[BoundingBox], detections: Sequence[Detection]
) -> np.ndarray:
    """1 - IoU between each box and each detection"""
    return 1 - iou_matrix(
        boxes_to_array(boxes), boxes_to_array(detection.box for detection in detections)
    )


def associate(
    tracks: Sequence[Track],
    detections: Sequence[Detection],
    config: TrackerConfig,
) -> Assignment:
    """Match predicted tracks to detections by IoU, gated at 1 - iou_min"""
    return hungarian_assign(
        iou_cost([predicted_box(track, config) for track in tracks], detections),
        config.gate,
    )


def apply_match(track: Track, detection: Detection, config: TrackerConfig) -> Track:
    """Fold an associated detection into a predicted track"""
    if config.use_kalman:
        track = kalman_update(track, detection.box)
        return mark_matched(track, detection, config)
    return mark_matched(track, detection, config, kstate=box_state(detection.box))


def sort_step(
    track_set: TrackSet,
    detections: Sequence[Detection],
    config: TrackerConfig = TrackerConfig(),
) -> TrackSet:
    """Advance the tracks by one frame

    Parameters
    ----------
    track_set : TrackSet
        The tracks after the previous frame
    detections : list-like of Detection
        The current frame's detections
    config : TrackerConfig, optional
        The tracker settings

    Returns
    -------
    TrackSet
        Every track is predicted, then matched to the detections by
        1 - IoU with gate 1 - iou_min. Matched tracks are updated, unmatched
        tracks record a miss and every unmatched detection starts a new
        tentative track.
    """
    predicted = [predict(track, config) for track in track_set.tracks]
    assignment = associate(predicted, detections, config)

    updated = list(predicted)
    for row, col in assignment.matches:
        updated[row] = apply_match(predicted[row], detections[col], config)
    for row in assignment.unmatched_rows:
        updated[row] = mark_missed(predicted[row], config)

    return collect(
        updated,
        [detections[col] for col in assignment.unmatched_cols],
        track_set.next_id,
        config,
        initiate=initiate if config.use_kalman else None,
    )


class SortTracker(Tracker):
    """Kalman prediction plus a single round of IoU association"""

    name = "sort"

    def update(
        self,
        frame: Frame,
        detections: Sequence[Detection],
        background: Frame | None = None,
    ) -> list[Track]:
        self.track_set = sort_step(self.track_set, detections, self.config)
        return self.track_set.outputs()


def create(config: TrackerConfig | None = None) -> SortTracker:
    return SortTracker(config)
