"""Track state, tracker settings and the lifecycle shared by every tracker"""
import abc
from enum import Enum
from pathlib import Path
from typing import Any, Callable, NamedTuple, Sequence

import numpy as np

from .. import config as cfg
from ..core import BoundingBox, Detection, Frame
from ..features import DEFAULT_DIFF_THRESHOLD, DEFAULT_SUPPRESSION
from ..similarity import DEFAULT_RADIUS

SECTION_NAME = "tracker"

STATE_DIM = 8

CORRECT_SCALE_CHOICES = ("all", "deep")


class TrackStatus(Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    DEAD = "dead"


class Track(NamedTuple):
    """One identity as it's being followed

    Parameters
    ----------
    id : int
        The identity (≥ 1), never reused within a sequence
    kstate : (8,) array
        The constant-velocity state [cx, cy, w, h, vx, vy, vw, vh]
    covariance : (8, 8) array
        The state covariance
    hits : int
        The number of consecutive frames this track was matched
    misses : int
        The number of consecutive frames this track went unmatched
    status : TrackStatus
        Where the track is in its lifecycle
    last_box : BoundingBox
        The matched detection's box, or the propagated box after a miss
    score : float
        The score of the last matched detection
    """

    id: int
    kstate: np.ndarray
    covariance: np.ndarray
    hits: int
    misses: int
    status: TrackStatus
    last_box: BoundingBox
    score: float = 1.0

    @property
    def box(self) -> BoundingBox:
        """The box described by the filter state"""
        return state_to_box(self.kstate)

    @property
    def is_confirmed(self) -> bool:
        return self.status == TrackStatus.CONFIRMED


class TrackSet(NamedTuple):
    """Every live track plus the next identity to hand out"""

    tracks: tuple[Track, ...] = ()
    next_id: int = 1

    def outputs(self) -> list[Track]:
        """The confirmed tracks matched this frame, in id order"""
        return [
            track for track in self.tracks if track.is_confirmed and track.misses == 0
        ]


class TrackerConfig(NamedTuple):
    """The knobs shared by the trackers

    Parameters
    ----------
    n_init : int
        The number of consecutive matches it takes to confirm a track
    max_age : int
        A track dies once it has gone more than this many frames unmatched
    iou_min : float
        The smallest IoU an association may have (the gate is 1 - iou_min)
    tau_high : float
        The score at or above which a detection is high-confidence
    tau_low : float
        The score below which a detection is dropped entirely (two-stage
        association only)
    det_threshold : float
        The detection score threshold of the similarity-fusion tracker
    alpha : float
        The weight of the IoU term in the similarity-fusion cost
    radius : int
        The similarity search radius, in deep cells
    use_kalman : bool
        Whether the IoU trackers predict with a Kalman filter (otherwise they
        use the last box)
    use_dcm : bool
        Whether to apply deviation correction to the feature pyramids
    use_mfsf : bool
        Whether to fuse all three scales (otherwise deep only)
    suppression : float
        λ, how strongly background cells are suppressed by the correction
    diff_threshold : float
        The foreground threshold used by the correction
    correct_scales : str
        "all" to correct every scale, "deep" to correct only the deep one
    """

    n_init: int = 2
    max_age: int = 10
    iou_min: float = 0.3
    tau_high: float = 0.5
    tau_low: float = 0.1
    det_threshold: float = 0.4
    alpha: float = 0.7
    radius: int = DEFAULT_RADIUS
    use_kalman: bool = True
    use_dcm: bool = True
    use_mfsf: bool = True
    suppression: float = DEFAULT_SUPPRESSION
    diff_threshold: float = DEFAULT_DIFF_THRESHOLD
    correct_scales: str = "all"

    @property
    def gate(self) -> float:
        return 1 - self.iou_min

    def validate(self) -> "TrackerConfig":
        """Check the configuration

        Raises
        ------
        ValueError
            If any value is out of bounds
        """
        if self.n_init < 1:
            raise ValueError("n_init must be at least 1")
        if self.max_age < 0:
            raise ValueError("max_age cannot be negative")
        for name in (
            "iou_min",
            "tau_high",
            "tau_low",
            "det_threshold",
            "alpha",
            "suppression",
        ):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.tau_low > self.tau_high:
            raise ValueError("tau_low cannot exceed tau_high")
        if self.radius < 0:
            raise ValueError("radius cannot be negative")
        if self.correct_scales not in CORRECT_SCALE_CHOICES:
            raise ValueError(
                f"correct_scales must be one of: {', '.join(CORRECT_SCALE_CHOICES)}"
            )
        return self

    @classmethod
    def from_cfg(cls, config_file: Path, **overrides) -> "TrackerConfig":
        """Read the [tracker] section of a run config, with any explicit
        overrides applied on top

        Raises
        ------
        FileNotFoundError
            If the config file doesn't exist
        ValueError
            If a setting can't be parsed
        """
        sections = cfg.read_sections(config_file)
        try:
            return cls.from_mapping(sections.get(SECTION_NAME, {}), **overrides)
        except ValueError as bad_value:
            raise ValueError(
                f"Invalid [{SECTION_NAME}] in {config_file}"
            ) from bad_value

    @classmethod
    def from_mapping(cls, section: dict[str, str], **overrides) -> "TrackerConfig":
        """Parse a configuration from INI-style string entries

        Raises
        ------
        ValueError
            If a key is unrecognized or a value can't be parsed
        """
        parsers: dict[str, Any] = {
            name: cfg.parse_ini_bool if kind is bool else kind
            for name, kind in cls.__annotations__.items()
        }
        values: dict[str, Any] = {}
        for key, entry in section.items():
            field_name = key.replace("-", "_")
            if field_name not in parsers:
                raise ValueError(f"Unrecognized tracker setting: {key}")
            values[field_name] = parsers[field_name](entry)
        values.update(
            {key: value for key, value in overrides.items() if value is not None}
        )
        return cls(**values).validate()


def box_to_measurement(box: BoundingBox) -> np.ndarray:
    """The (cx, cy, w, h) measurement of a box"""
    cx, cy = box.center
    return np.array((cx, cy, box.w, box.h), dtype=float)


def state_to_box(kstate: np.ndarray) -> BoundingBox:
    """The box of a filter state (sizes are kept at 1 px or more)"""
    cx, cy, w, h = (float(value) for value in kstate[:4])
    return BoundingBox.from_center(cx, cy, max(w, 1.0), max(h, 1.0))


def box_state(box: BoundingBox) -> np.ndarray:
    """A motionless state sitting on a box"""
    return np.concatenate((box_to_measurement(box), np.zeros(4)))


def spawn_track(
    track_id: int,
    detection: Detection,
    config: TrackerConfig,
    kstate: np.ndarray | None = None,
    covariance: np.ndarray | None = None,
) -> Track:
    """Start a new track on an unmatched detection"""
    return Track(
        id=track_id,
        kstate=box_state(detection.box) if kstate is None else kstate,
        covariance=np.eye(STATE_DIM) if covariance is None else covariance,
        hits=1,
        misses=0,
        status=(
            TrackStatus.CONFIRMED if config.n_init <= 1 else TrackStatus.TENTATIVE
        ),
        last_box=detection.box,
        score=detection.score,
    )


def mark_matched(
    track: Track, detection: Detection, config: TrackerConfig, **state
) -> Track:
    """Record an association. `state` may replace the filter state and
    covariance."""
    hits = track.hits + 1
    status = track.status
    if status == TrackStatus.TENTATIVE and hits >= config.n_init:
        status = TrackStatus.CONFIRMED
    return track._replace(
        hits=hits,
        misses=0,
        status=status,
        last_box=detection.box,
        score=detection.score,
        **state,
    )


def mark_missed(track: Track, config: TrackerConfig, **state) -> Track:
    """Record a frame without an association. Tentative tracks die on their
    first miss, confirmed ones once they exceed max_age."""
    misses = track.misses + 1
    status = track.status
    if status == TrackStatus.TENTATIVE or misses > config.max_age:
        status = TrackStatus.DEAD
    return track._replace(hits=0, misses=misses, status=status, **state)


def collect(
    tracks: Sequence[Track],
    spawned: Sequence[Detection],
    next_id: int,
    config: TrackerConfig,
    initiate: Callable[[BoundingBox], tuple[np.ndarray, np.ndarray]] | None = None,
) -> TrackSet:
    """Drop dead tracks and start new ones on the given detections

    Parameters
    ----------
    tracks : list-like of Track
        The updated existing tracks
    spawned : list-like of Detection
        The detections that start new tracks, in the order they get ids
    next_id : int
        The first id to hand out
    config : TrackerConfig
        The tracker settings
    initiate : callable, optional
        Maps a new track's box to its initial (state, covariance). By default
        the track starts motionless on the box with unit covariance.

    Returns
    -------
    TrackSet
        The surviving and new tracks, in id order
    """
    survivors = [track for track in tracks if track.status != TrackStatus.DEAD]
    for detection in spawned:
        kstate, covariance = initiate(detection.box) if initiate else (None, None)
        survivors.append(spawn_track(next_id, detection, config, kstate, covariance))
        next_id += 1
    return TrackSet(tuple(sorted(survivors, key=lambda track: track.id)), next_id)


class Tracker(abc.ABC):
    """An online tracker: frame t is decided before frame t + 1 is seen

    Parameters
    ----------
    config : TrackerConfig, optional
        The tracker settings
    """

    name: str = "tracker"

    def __init__(self, config: TrackerConfig | None = None):
        self.config = (config or TrackerConfig()).validate()
        self.track_set = TrackSet()

    def reset(self) -> None:
        """Forget every track (call between sequences)"""
        self.track_set = TrackSet()

    @abc.abstractmethod
    def update(
        self,
        frame: Frame,
        detections: Sequence[Detection],
        background: Frame | None = None,
    ) -> list[Track]:
        """Advance by one frame

        Parameters
        ----------
        frame : Frame
            The current frame
        detections : list-like of Detection
            The current frame's detections
        background : Frame, optional
            An estimate of the static background (needed by trackers that
            look at pixels)

        Returns
        -------
        list of Track
            The confirmed tracks matched in this frame
        """
