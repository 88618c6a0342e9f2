"""Detection sources and online trackers"""
import importlib

from ..loggers import TRACK_LOGGER
from .assignment import Assignment, hungarian_assign
from .detectors import (
    DETECTOR_KINDS,
    DetectorConfig,
    blob_detector,
    oracle_noise_detector,
)
from .kalman import KalmanNoise, kalman_predict, kalman_update
from .tracks import Track, Tracker, TrackerConfig, TrackSet, TrackStatus

SUPPORTED_TRACKERS = ("dsft", "sort", "byte")

DEFAULT_TRACKER = SUPPORTED_TRACKERS[0]


def create_tracker(name: str, config: TrackerConfig | None = None) -> Tracker:
    """Instantiate a tracker by name

    Parameters
    ----------
    name : str
        One of the supported trackers ("dsft", "sort" or "byte")
    config : TrackerConfig, optional
        The tracker settings

    Returns
    -------
    Tracker
        A fresh tracker

    Raises
    ------
    NotImplementedError
        If there's no tracker by that name
    """
    if name.lower() not in SUPPORTED_TRACKERS:
        raise NotImplementedError(f"Tracker {name} is not currently implemented")
    module = importlib.import_module(f"{__package__}.{name.lower()}")
    TRACK_LOGGER.debug(f"Using the {name} tracker")
    return module.create(config)


__all__ = [
    "TRACK_LOGGER",
    "SUPPORTED_TRACKERS",
    "DEFAULT_TRACKER",
    "DETECTOR_KINDS",
    "Assignment",
    "DetectorConfig",
    "KalmanNoise",
    "Track",
    "Tracker",
    "TrackerConfig",
    "TrackSet",
    "TrackStatus",
    "blob_detector",
    "create_tracker",
    "hungarian_assign",
    "kalman_predict",
    "kalman_update",
    "oracle_noise_detector",
]
