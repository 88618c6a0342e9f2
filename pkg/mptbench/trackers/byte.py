"""Two-stage association: high-confidence detections first, then the
low-confidence leftovers against the still-unmatched confirmed tracks"""
from typing import Sequence

from ..core import Detection, Frame
from .kalman import initiate
from .sort import apply_match, associate, predict
from .tracks import Track, Tracker, TrackerConfig, TrackSet, collect, mark_missed


def byte_step(
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
        The first stage matches every (predicted) track, tentative ones
        included, against the detections scoring at least tau_high. The
        second stage matches the confirmed tracks left over against the
        detections scoring in [tau_low, tau_high). Only high-confidence
        detections left over from the first stage start new tracks.
    """
    high = [detection for detection in detections if detection.score >= config.tau_high]
    low = [
        detection
        for detection in detections
        if config.tau_low <= detection.score < config.tau_high
    ]

    predicted = [predict(track, config) for track in track_set.tracks]
    updated = list(predicted)

    first = associate(predicted, high, config)
    for row, col in first.matches:
        updated[row] = apply_match(predicted[row], high[col], config)

    leftovers = [row for row in first.unmatched_rows if predicted[row].is_confirmed]
    second = associate([predicted[row] for row in leftovers], low, config)
    rematched: set[int] = set()
    for position, col in second.matches:
        row = leftovers[position]
        updated[row] = apply_match(predicted[row], low[col], config)
        rematched.add(row)

    for row in first.unmatched_rows:
        if row not in rematched:
            updated[row] = mark_missed(predicted[row], config)

    return collect(
        updated,
        [high[col] for col in first.unmatched_cols],
        track_set.next_id,
        config,
        initiate=initiate if config.use_kalman else None,
    )


class ByteTracker(Tracker):
    """Kalman prediction plus two rounds of IoU association split by
    detection score"""

    name = "byte"

    def update(
        self,
        frame: Frame,
        detections: Sequence[Detection],
        background: Frame | None = None,
    ) -> list[Track]:
        self.track_set = byte_step(self.track_set, detections, self.config)
        return self.track_set.outputs()


def create(config: TrackerConfig | None = None) -> ByteTracker:
    return ByteTracker(config)
