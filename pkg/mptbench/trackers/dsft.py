"""Association driven by deviation-corrected, multi-scale feature similarity

Each track is propagated by the offset its fused similarity volume points
to, then matched on a blend of IoU after propagation and the fused
similarity at each detection's center.
"""
from typing import Sequence

import numpy as np

from ..core import Detection, Frame, iou
from ..features import (
    SCALES,
    FeaturePyramid,
    correct_deviation,
    extract_pyramid,
    normalize_pyramid,
    predict_residual,
)
from ..similarity import compute_volume, fused_similarity_at, predict_offset
from .assignment import hungarian_assign
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


def fused_scales(config: TrackerConfig) -> tuple[str, ...]:
    """The scales whose similarities get fused"""
    return SCALES if config.use_mfsf else ("deep",)


def corrected_scales(config: TrackerConfig) -> tuple[str, ...]:
    """The scales the deviation correction is applied to"""
    return SCALES if config.correct_scales == "all" else ("deep",)


def prepare_pyramid(
    frame: Frame, background: Frame | None, config: TrackerConfig
) -> FeaturePyramid:
    """Extract a frame's pyramid and correct (or just normalize) it

    Raises
    ------
    ValueError
        If correction is enabled but no background model was provided
    """
    pyramid = extract_pyramid(frame)
    if not config.use_dcm:
        return normalize_pyramid(pyramid)
    if background is None:
        raise ValueError("Deviation correction needs a background model")
    residual = predict_residual(
        frame, pyramid, background, config.suppression, config.diff_threshold
    )
    return correct_deviation(pyramid, residual, corrected_scales(config))


def dsft_step(
    track_set: TrackSet,
    detections: Sequence[Detection],
    pyr_prev: FeaturePyramid | None,
    pyr_cur: FeaturePyramid | None,
    config: TrackerConfig = TrackerConfig(),
) -> TrackSet:
    """Advance the tracks by one frame

    Parameters
    ----------
    track_set : TrackSet
        The tracks after the previous frame
    detections : list-like of Detection
        The current frame's detections
    pyr_prev : FeaturePyramid
        The corrected pyramid of the previous frame
    pyr_cur : FeaturePyramid
        The corrected pyramid of the current frame
    config : TrackerConfig, optional
        The tracker settings

    Returns
    -------
    TrackSet
        Detections scoring below det_threshold are dropped. Each track's
        last box is moved by the offset its similarity volume predicts, and
        the cost of pairing it with a detection is

            α (1 - IoU(propagated box, detection))
            + (1 - α) (1 - fused similarity at the detection's center / n)

        with n the number of fused scales. The assignment is gated at
        1 - iou_min and the lifecycle is the same as the other trackers'.
        Unmatched tracks keep their propagated box.

    Raises
    ------
    ValueError
        If either pyramid is missing
    """
    if pyr_prev is None or pyr_cur is None:
        raise ValueError("Similarity association needs the pyramids of both frames")
    kept = [
        detection for detection in detections if detection.score >= config.det_threshold
    ]
    scales = fused_scales(config)

    propagated = []
    cost = np.zeros((len(track_set.tracks), len(kept)))
    for row, track in enumerate(track_set.tracks):
        volume = compute_volume(
            pyr_prev, pyr_cur, track.last_box.center, config.radius, scales
        )
        dx, dy = predict_offset(volume.fused)
        moved = track.last_box.translate(dx, dy)
        propagated.append(moved)
        for col, detection in enumerate(kept):
            similarity = fused_similarity_at(volume, detection.box.center)
            cost[row, col] = config.alpha * (1 - iou(moved, detection.box)) + (
                1 - config.alpha
            ) * (1 - similarity / len(scales))

    assignment = hungarian_assign(cost, config.gate)
    updated = list(track_set.tracks)
    for row, col in assignment.matches:
        updated[row] = mark_matched(
            updated[row], kept[col], config, kstate=box_state(kept[col].box)
        )
    for row in assignment.unmatched_rows:
        updated[row] = mark_missed(
            updated[row],
            config,
            last_box=propagated[row],
            kstate=box_state(propagated[row]),
        )

    return collect(
        updated,
        [kept[col] for col in assignment.unmatched_cols],
        track_set.next_id,
        config,
    )


class DsftTracker(Tracker):
    """Similarity-fusion tracking over deviation-corrected feature pyramids"""

    name = "dsft"

    def __init__(self, config: TrackerConfig | None = None):
        super().__init__(config)
        self._previous: FeaturePyramid | None = None

    def reset(self) -> None:
        super().reset()
        self._previous = None

    def update(
        self,
        frame: Frame,
        detections: Sequence[Detection],
        background: Frame | None = None,
    ) -> list[Track]:
        current = prepare_pyramid(frame, background, self.config)
        previous = current if self._previous is None else self._previous
        self.track_set = dsft_step(
            self.track_set, detections, previous, current, self.config
        )
        self._previous = current
        return self.track_set.outputs()


def create(config: TrackerConfig | None = None) -> DsftTracker:
    return DsftTracker(config)
