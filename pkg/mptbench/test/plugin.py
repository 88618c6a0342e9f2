"""Additional pytest CLI options. h/t https://stackoverflow.com/a/52458082"""
import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--run-benchmarks",
        action="store_true",
        default=False,
        help=(
            "By default, the long-running statistical checks (full-size"
            " generation, multi-seed tracking comparisons and the ablation"
            " direction) are skipped. Use this flag to run them too."
        ),
    )


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "benchmark: long-running statistical check (see --run-benchmarks)"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-benchmarks"):
        return
    skip_benchmark = pytest.mark.skip(reason="needs --run-benchmarks to run")
    for item in items:
        if "benchmark" in item.keywords:
            item.add_marker(skip_benchmark)
