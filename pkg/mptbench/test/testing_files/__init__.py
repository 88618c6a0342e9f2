"""Subpackage containing all files and templates used for testing"""
from importlib.resources import files

__all__ = [
    "RUN_CONFIG",
    "SAMPLE_GT",
    "SCENARIO_CONFIG",
    "SCENARIO_JSON",
]

_here = files(__package__)

RUN_CONFIG = _here / "run.cfg"

SAMPLE_GT = _here / "sample_gt.txt"

SCENARIO_CONFIG = _here / "scenario.cfg"

SCENARIO_JSON = _here / "scenario.json"
