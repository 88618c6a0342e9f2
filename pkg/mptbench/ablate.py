"""Comparing the similarity-fusion tracker with its two modules switched on
and off"""
from pathlib import Path
from typing import NamedTuple

from . import config as cfg
from . import filesystem as fs
from .loggers import ABLATE_LOGGER, IMPORTANT
from .metrics import EvalReport, evaluate_dataset
from .report import format_table, write_report
from .track import dumps_run_config, track_dataset, write_run_config
from .trackers import DetectorConfig, TrackerConfig

ABLATION_CONFIG_NAME = "ablation.cfg"

ABLATION_TABLE_NAME = "ablation.txt"


class Scheme(NamedTuple):
    """One row of the ablation"""

    name: str
    use_dcm: bool
    use_mfsf: bool


SCHEMES = (
    Scheme("baseline", False, False),
    Scheme("dcm", True, False),
    Scheme("mfsf", False, True),
    Scheme("dcm+mfsf", True, True),
)


def scheme_config(scheme: Scheme, base: TrackerConfig) -> TrackerConfig:
    """The tracker settings of a scheme: the base settings with the two
    module switches replaced"""
    return base._replace(use_dcm=scheme.use_dcm, use_mfsf=scheme.use_mfsf)


def run_ablation(
    dataset_root: Path,
    output_root: Path,
    tracker_config: TrackerConfig | None = None,
    detector_config: DetectorConfig | None = None,
    seed: int = 0,
    split: str = "test",
    jobs: int = 1,
    overwrite: bool = False,
) -> list[tuple[Scheme, EvalReport]]:
    """Track and score a dataset under every scheme

    Parameters
    ----------
    dataset_root : Path
        The root of the dataset
    output_root : Path
        Where to write the results and report of each scheme (in a subfolder
        named after it) along with the comparison table
    tracker_config : TrackerConfig, optional
        The settings shared by every scheme (apart from the module switches)
    detector_config : DetectorConfig, optional
        The detector settings, shared by every scheme
    seed : int, optional
        The detector noise seed, shared by every scheme. Default is 0.
    split : str, optional
        "train", "test" (default) or "all"
    jobs : int, optional
        The number of sequences to process concurrently. Default is 1.
    overwrite : bool, optional
        Whether to write into a non-empty folder. Default is False.

    Returns
    -------
    list of (Scheme, EvalReport)
        The report of each scheme, in scheme order

    Raises
    ------
    FileNotFoundError
        If the dataset doesn't exist
    FileExistsError
        If the output folder isn't empty and overwriting wasn't requested
    ValueError
        If a setting is invalid
    """
    base = (tracker_config or TrackerConfig()).validate()
    detector_config = (detector_config or DetectorConfig()).validate()
    for scheme in SCHEMES:
        fs.validate_name(scheme.name, "scheme")
    fs.sequence_folders(dataset_root, split)
    fs.ensure_writable_output(output_root, overwrite=overwrite)
    output_root.mkdir(parents=True, exist_ok=True)

    reports: list[tuple[Scheme, EvalReport]] = []
    for scheme in SCHEMES:
        ABLATE_LOGGER.log(IMPORTANT, f"Running scheme {scheme.name}")
        scheme_root = output_root / scheme.name
        track_dataset(
            dataset_root,
            scheme_root,
            "dsft",
            scheme_config(scheme, base),
            detector_config,
            seed=seed,
            split=split,
            jobs=jobs,
            overwrite=True,
        )
        report = evaluate_dataset(dataset_root, scheme_root, split=split, jobs=jobs)
        write_report(report, scheme_root, scheme=scheme.name)
        reports.append((scheme, report))

    table = render_ablation(reports)
    ABLATE_LOGGER.log(IMPORTANT, "\n" + table)
    for name, contents in (
        (ABLATION_TABLE_NAME, table),
        (ABLATION_CONFIG_NAME, dumps_ablation(reports)),
    ):
        path = output_root / name
        try:
            path.write_text(contents)
        except OSError as write_fail:
            raise OSError(f"Could not write {path}") from write_fail
    write_run_config(
        output_root,
        dumps_run_config(
            "ablate",
            {"dataset": dataset_root.absolute(), "seed": seed, "split": split},
            tracker=base._asdict(),
            detector=detector_config._asdict(),
        ),
    )
    return reports


def render_ablation(reports: list[tuple[Scheme, EvalReport]]) -> str:
    """One row per scheme, with the pooled scores over every sequence"""
    return format_table(
        [(scheme.name, report.overall) for scheme, report in reports], "Scheme"
    )


def dumps_ablation(reports: list[tuple[Scheme, EvalReport]]) -> str:
    """The pooled scores of each scheme at full precision"""
    return cfg.dumps(
        "mptbench ablation",
        {"schemes": [scheme.name for scheme, _ in reports]},
        **{
            scheme.name: {
                "use_dcm": scheme.use_dcm,
                "use_mfsf": scheme.use_mfsf,
                "mota": report.mota,
                "idf1": report.idf1,
                "idsw": report.idsw,
                "fp": report.fp,
                "fn": report.fn,
            }
            for scheme, report in reports
        },
    )
