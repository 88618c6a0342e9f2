"""Useful setup / teardown fixtures"""
from importlib.resources import as_file

import pytest

from mptbench.synthgen import ScenarioConfig, generate_benchmark

from .testing_files import SCENARIO_CONFIG


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """Generate a tiny benchmark (two three-frame sequences per background)
    once per session.

    Tests must treat this dataset as read-only, and this fixture asserts
    as such on teardown"""
    dataset_root = tmp_path_factory.mktemp("small") / "dataset"
    with as_file(SCENARIO_CONFIG) as scenario_cfg:
        generate_benchmark(ScenarioConfig.from_cfg(scenario_cfg), dataset_root)

    snapshot = {
        path: path.read_bytes() for path in dataset_root.rglob("*") if path.is_file()
    }

    yield dataset_root

    assert {
        path: path.read_bytes() for path in dataset_root.rglob("*") if path.is_file()
    } == snapshot


@pytest.fixture(autouse=True)
def set_log_levels(caplog):
    with caplog.at_level(20):
        yield
