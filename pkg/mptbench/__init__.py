"""Top-level imports"""
from . import _version
from .core import BoundingBox, Detection, Frame, GtRecord, SequenceMeta
from .metrics import EvalReport, evaluate_dataset
from .synthgen import ScenarioConfig, generate_benchmark
from .track import track_dataset
from .trackers import DetectorConfig, TrackerConfig, create_tracker

__version__ = _version.get_versions()["version"]


__all__ = [
    "BoundingBox",
    "Detection",
    "DetectorConfig",
    "EvalReport",
    "Frame",
    "GtRecord",
    "ScenarioConfig",
    "SequenceMeta",
    "TrackerConfig",
    "create_tracker",
    "evaluate_dataset",
    "generate_benchmark",
    "track_dataset",
]
