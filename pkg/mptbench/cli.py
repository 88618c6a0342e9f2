"""Command-line interface"""
import inspect
import logging
import os
import sys
from argparse import ArgumentParser, RawTextHelpFormatter
from pathlib import Path
from typing import Any, Protocol, Sequence

from . import filesystem as fs
from . import loggers
from ._version import get_versions
from .ablate import run_ablation
from .metrics import evaluate_dataset
from .overlay import render_overlay
from .report import write_report
from .synthgen import ScenarioConfig, generate_benchmark
from .track import track_dataset
from .trackers import (
    DEFAULT_TRACKER,
    DETECTOR_KINDS,
    SUPPORTED_TRACKERS,
    DetectorConfig,
    TrackerConfig,
)

_evaluate_aliases = ("evaluate", "eval", "score")
_render_aliases = ("render", "overlay")

_SWITCHES = {"on": True, "off": False}


class Action(Protocol):  # pragma: no cover
    """Common protocol for CLI actions"""

    def __call__(self, dataset_root: Path, /) -> Any:
        ...


def _switch(setting: str | None) -> bool | None:
    return None if setting is None else _SWITCHES[setting]


def _resolve_configs(
    config: Path | None,
    detector: str | None = None,
    p_fn: float | None = None,
    p_fp: float | None = None,
    jitter: float | None = None,
    dcm: str | None = None,
    mfsf: str | None = None,
) -> tuple[TrackerConfig, DetectorConfig]:
    """Read the tracker and detector settings, with flags overriding the
    config file"""
    tracker_overrides = {"use_dcm": _switch(dcm), "use_mfsf": _switch(mfsf)}
    detector_overrides = {
        "kind": detector,
        "p_fn": p_fn,
        "p_fp": p_fp,
        "jitter_sigma": jitter,
    }
    if config is None:
        return (
            TrackerConfig.from_mapping({}, **tracker_overrides),
            DetectorConfig.from_mapping({}, **detector_overrides),
        )
    return (
        TrackerConfig.from_cfg(config, **tracker_overrides),
        DetectorConfig.from_cfg(config, **detector_overrides),
    )


def _generate(
    dataset_root: Path,
    config: Path | None = None,
    seed: int | None = None,
    sequences_per_background: int | None = None,
    jobs: int = 1,
    overwrite: bool = False,
) -> None:
    """Router for the generate verb"""
    scenario = ScenarioConfig.from_cfg(config) if config else ScenarioConfig()
    if seed is not None:
        scenario = scenario._replace(master_seed=seed)
    if sequences_per_background is not None:
        scenario = scenario._replace(sequences_per_background=sequences_per_background)
    generate_benchmark(scenario, dataset_root, jobs=jobs, overwrite=overwrite)


def _track(
    dataset_root: Path,
    tracker: str = DEFAULT_TRACKER,
    out: Path | None = None,
    config: Path | None = None,
    seed: int = 0,
    split: str = "test",
    jobs: int = 1,
    overwrite: bool = False,
    **flags,
) -> None:
    """Router for the track verb"""
    tracker_config, detector_config = _resolve_configs(config, **flags)
    track_dataset(
        dataset_root,
        out or dataset_root / "results" / tracker,
        tracker,
        tracker_config,
        detector_config,
        seed=seed,
        split=split,
        jobs=jobs,
        overwrite=overwrite,
    )


def _evaluate(
    dataset_root: Path,
    results: Path | None = None,
    out: Path | None = None,
    split: str = "test",
    jobs: int = 1,
) -> None:
    """Router for the evaluate verb"""
    assert results  # it's required by the parser, so this should be fine
    report = evaluate_dataset(dataset_root, results, split=split, jobs=jobs)
    table = write_report(
        report,
        out or results,
        dataset=dataset_root.absolute(),
        results=results.absolute(),
        split=split,
    )
    loggers.EVALUATE_LOGGER.log(loggers.IMPORTANT, "\n" + table)


def _ablate(
    dataset_root: Path,
    out: Path | None = None,
    config: Path | None = None,
    seed: int = 0,
    split: str = "test",
    jobs: int = 1,
    overwrite: bool = False,
    **flags,
) -> None:
    """Router for the ablate verb"""
    tracker_config, detector_config = _resolve_configs(config, **flags)
    run_ablation(
        dataset_root,
        out or dataset_root / "ablation",
        tracker_config,
        detector_config,
        seed=seed,
        split=split,
        jobs=jobs,
        overwrite=overwrite,
    )


def _render(
    dataset_root: Path,
    sequence: str | None = None,
    results: Path | None = None,
    out: Path | None = None,
    overwrite: bool = False,
) -> None:
    """Router for the render verb"""
    assert sequence  # it's required by the parser, so this should be fine
    fs.validate_name(sequence, "sequence")
    for split in fs.SPLITS:
        sequence_folder = fs.sequence_root(dataset_root, split, sequence)
        if fs.seqinfo_path(sequence_folder).exists():
            break
    else:
        raise FileNotFoundError(f"No sequence named {sequence} in {dataset_root}")
    render_overlay(
        sequence_folder,
        results or fs.gt_path(sequence_folder),
        out or dataset_root / "overlays" / sequence,
        overwrite=overwrite,
    )


ACTIONS: tuple[tuple[tuple[str, ...], str, Action], ...] = (
    # action names (first one is canonical), action description, action method
    (
        ("generate", "gen", "generate benchmark"),
        "render a synthetic benchmark (frames, ground truth and manifest)",
        _generate,
    ),
    (
        ("track",),
        "run a tracker over the sequences of a benchmark",
        _track,
    ),
    (
        _evaluate_aliases,
        "score tracker output with MOTA, IDF1, IDs, FP and FN",
        _evaluate,
    ),
    (
        ("ablate", "ablation"),
        "compare the similarity-fusion tracker with its modules on and off",
        _ablate,
    ),
    (
        _render_aliases,
        "draw tracker output (or the ground truth) over a sequence's frames",
        _render,
    ),
)


def _add_run_arguments(parser: ArgumentParser, output: str) -> None:
    parser.add_argument(
        "--config",
        "-c",
        type=Path,
        help="provide a run config (INI or JSON) to read settings from",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=0,
        help="specify the seed of the detector noise (default is 0)",
    )
    parser.add_argument(
        "--split",
        choices=("train", "test", "all"),
        default="test",
        help="select which sequences to process (default is test)",
    )
    parser.add_argument(
        "--jobs",
        "-j",
        type=int,
        default=1,
        help="the number of sequences to process concurrently",
    )
    parser.add_argument("--out", "-o", type=Path, help=output)
    parser.add_argument(
        "--overwrite",
        action="store_true",
        help="write into the output folder even if it isn't empty",
    )


def _add_detector_arguments(parser: ArgumentParser) -> None:
    parser.add_argument(
        "--detector",
        choices=DETECTOR_KINDS,
        help=(
            "choose between noisy ground truth (oracle)"
            " and background subtraction (blob)"
        ),
    )
    parser.add_argument(
        "--p-fn",
        type=float,
        help="the probability that the oracle detector misses a box",
    )
    parser.add_argument(
        "--p-fp",
        type=float,
        help="the mean number of spurious oracle detections per frame",
    )
    parser.add_argument(
        "--jitter",
        type=float,
        help="the standard deviation (in pixels) of the oracle's corner jitter",
    )


def generate_parsers() -> tuple[ArgumentParser, dict[str, ArgumentParser]]:
    """Generate the command-line parsers

    Returns
    -------
    mptbench_parser : ArgumentParser
        The top-level argument parser responsible for routing arguments to
        specific action parsers
    action_parsers : dict of str to ArgumentParser
        The verb-specific argument parsers
    """
    descriptions: dict[str, str] = {}
    root_description: str = ""
    for commands, description, _ in ACTIONS:
        descriptions[commands[0]] = description
        root_description += f"\n\t{commands[0]}\n\t\tto {description}"

    mptbench_parser = ArgumentParser(
        prog="mptbench",
        description=(
            f"v{get_versions()['version']}\n"
            "\nsynthetic plankton-tracking benchmarks, trackers and scoring"
        ),
        formatter_class=RawTextHelpFormatter,
    )
    mptbench_parser.add_argument(
        "-v",
        "-V",
        "--version",
        action="version",
        version=f"%(prog)s v{get_versions()['version']}",
    )
    # these are really just for the sake of --help
    mptbench_parser.add_argument(
        "action",
        help=f"the action to perform. Options are:{root_description}",
        type=str,
    )
    mptbench_parser.add_argument(
        "arguments",
        nargs="*",
        help="any additional arguments for the specific action."
        " To learn more, try: mptbench {action} -h",
    )

    action_parsers: dict[str, ArgumentParser] = {}
    for verb, description in descriptions.items():
        parser = ArgumentParser(prog=f"mptbench {verb}", description=description)
        root = parser.add_mutually_exclusive_group()
        root.add_argument(
            "root",
            nargs="?",
            help=(
                "optionally specify the dataset root."
                "  If no path is given, $MPT_ROOT or else the current working"
                " directory will be used."
            ),
            type=Path,
        )
        root.add_argument(
            "--root",
            dest="root_flag",
            help="specify the dataset root",
            type=Path,
        )
        parser.add_argument(
            "--verbose",
            "-v",
            action="count",
            default=0,
            help="increase the amount of information that's printed",
        )
        parser.add_argument(
            "--quiet",
            "-q",
            action="count",
            default=0,
            help="decrease the amount of information that's printed",
        )
        action_parsers[verb] = parser

    # generate options
    generate_parser = action_parsers["generate"]
    generate_parser.add_argument(
        "--config",
        "-c",
        type=Path,
        help="provide a scenario config (INI or JSON) to generate from",
    )
    generate_parser.add_argument(
        "--seed",
        type=int,
        help="override the master seed every sequence seed is derived from",
    )
    generate_parser.add_argument(
        "--sequences-per-background",
        "-n",
        type=int,
        help="override the number of sequences rendered over each background",
    )
    generate_parser.add_argument(
        "--jobs",
        "-j",
        type=int,
        default=1,
        help="the number of sequences to render concurrently",
    )
    generate_parser.add_argument(
        "--overwrite",
        action="store_true",
        help="write into the dataset root even if it isn't empty",
    )

    # track options
    track_parser = action_parsers["track"]
    track_parser.add_argument(
        "--tracker",
        "-t",
        choices=SUPPORTED_TRACKERS,
        default=DEFAULT_TRACKER,
        help=f"choose the tracker to run (default is {DEFAULT_TRACKER})",
    )
    _add_detector_arguments(track_parser)
    for module, description in (
        ("dcm", "deviation correction"),
        ("mfsf", "multi-scale similarity fusion"),
    ):
        track_parser.add_argument(
            f"--{module}",
            choices=tuple(_SWITCHES),
            help=f"switch {description} on or off (dsft only)",
        )
    _add_run_arguments(
        track_parser,
        "where to write the results (default is <root>/results/<tracker>)",
    )

    # evaluate options
    evaluate_parser = action_parsers[_evaluate_aliases[0]]
    evaluate_parser.add_argument(
        "--results",
        "-r",
        type=Path,
        required=True,
        help="the folder of tracker output to score",
    )
    evaluate_parser.add_argument(
        "--out",
        "-o",
        type=Path,
        help="where to write the report (default is the results folder)",
    )
    evaluate_parser.add_argument(
        "--split",
        choices=("train", "test", "all"),
        default="test",
        help="select which sequences to score (default is test)",
    )
    evaluate_parser.add_argument(
        "--jobs",
        "-j",
        type=int,
        default=1,
        help="the number of sequences to score concurrently",
    )

    # ablate options
    ablate_parser = action_parsers["ablate"]
    _add_detector_arguments(ablate_parser)
    _add_run_arguments(
        ablate_parser,
        "where to write the results of every scheme (default is <root>/ablation)",
    )

    # render options
    render_parser = action_parsers[_render_aliases[0]]
    render_parser.add_argument("sequence", help="the name of the sequence to draw")
    render_parser.add_argument(
        "--results",
        "-r",
        type=Path,
        help="the result file to draw (default is the ground truth)",
    )
    render_parser.add_argument(
        "--out",
        "-o",
        type=Path,
        help="where to write the frames (default is <root>/overlays/<sequence>)",
    )
    render_parser.add_argument(
        "--overwrite",
        action="store_true",
        help="write into the output folder even if it isn't empty",
    )

    return mptbench_parser, action_parsers


def parse_args(argv: Sequence[str]) -> tuple[Action, Path, int, dict[str, Any]]:
    """Parse the provided command-line options to determine the action to
    perform and the arguments to pass to the action

    Parameters
    ----------
    argv : list-like of str (sys.argv)
        The options passed into the command line

    Returns
    -------
    Callable
        The action method that will be called
    Path
        The dataset root the action will be performed on
    int
        The verbosity level of the operation (in terms of log levels)
    dict
        Any additional options that will be given to the action method

    Notes
    -----
    Usage errors exit with status 2
    """
    actions: dict[str, Action] = {}
    aliases: dict[str, str] = {}
    for commands, _, method in ACTIONS:
        for command in commands:
            aliases[command] = commands[0]
        actions[commands[0]] = method

    mptbench_parser, action_parsers = generate_parsers()

    _ = mptbench_parser.parse_args(argv[1:2])  # check for --help and --version

    for command in sorted(aliases.keys(), key=lambda x: -len(x)):  # longest first
        if " ".join((*argv[1:], "")).startswith(command + " "):
            action_parser = action_parsers[aliases[command]]
            action_kwargs = vars(
                action_parser.parse_args(argv[1 + len(command.split()) :])
            )

            action = actions[aliases[command]]

            root_arg = action_kwargs.pop("root")
            root_flag = action_kwargs.pop("root_flag")

            try:
                base = loggers.base_verbosity(os.getenv("MPT_LOG"))
            except ValueError as bad_setting:
                action_parser.error(str(bad_setting))
            verbosity = (
                base + action_kwargs.pop("verbose") - action_kwargs.pop("quiet")
            )

            argspec = inspect.getfullargspec(action)
            if "verbosity" in argspec.args + argspec.kwonlyargs:
                action_kwargs["verbosity"] = verbosity

            log_level = loggers.verbosity_to_log_level(verbosity)

            MPT_ROOT = os.getenv("MPT_ROOT")

            return (
                action,
                Path(root_arg or root_flag or MPT_ROOT or os.getcwd()),
                log_level,
                action_kwargs,
            )

    mptbench_parser.print_help(sys.stderr)
    sys.exit(2)


def main():
    """CLI Entrypoint"""
    logger = logging.getLogger(__package__)
    cli_handler = logging.StreamHandler()
    cli_handler.setFormatter(loggers.CLIFormatter())
    logger.addHandler(cli_handler)

    action, root, log_level, kwargs = parse_args(sys.argv)

    cli_handler.setLevel(log_level)
    logger.setLevel(log_level)

    try:
        action(root, **kwargs)
    except Exception as failure:
        logger.debug("Full traceback:", exc_info=True)
        logger.error(f"{type(failure).__name__}: {failure}")
        sys.exit(1)
