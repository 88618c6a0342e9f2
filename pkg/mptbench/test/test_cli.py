"""Test the command-line interface"""
import logging
import os
import sys
from pathlib import Path

import pytest

import mptbench
from mptbench import cli
from mptbench.synthgen import ScenarioConfig
from mptbench.trackers import DetectorConfig, TrackerConfig


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    monkeypatch.delenv("MPT_ROOT", raising=False)
    monkeypatch.delenv("MPT_LOG", raising=False)


@pytest.fixture
def restore_package_logger():
    logger = logging.getLogger("mptbench")
    level, handlers = logger.level, list(logger.handlers)
    yield
    logger.setLevel(level)
    logger.handlers = handlers


@pytest.fixture
def call_log(monkeypatch):
    """Replace the library entrypoints the CLI routes to with recorders"""
    call_log: list[tuple[str, tuple, dict]] = []

    def recorder(name):
        def record(*args, **kwargs):
            call_log.append((name, args, kwargs))

        return record

    for name in (
        "generate_benchmark",
        "track_dataset",
        "run_ablation",
        "render_overlay",
    ):
        monkeypatch.setattr(cli, name, recorder(name))

    yield call_log


class TestHelp:
    @pytest.mark.parametrize("help_flag", ("-h", "--help"))
    def test_help_displays_version(self, capsys, help_flag):
        with pytest.raises(SystemExit):
            cli.parse_args(["mptbench", help_flag])

        assert mptbench.__version__ in capsys.readouterr().out

    @pytest.mark.parametrize("help_flag", ("-h", "--help"))
    def test_help_ignores_arguments_that_follow(self, capsys, help_flag):
        with pytest.raises(SystemExit):
            cli.parse_args(["mptbench", help_flag, "foo"])

        assert "foo" not in capsys.readouterr().out
        assert "foo" not in capsys.readouterr().err

    def test_help_lists_every_action(self, capsys):
        with pytest.raises(SystemExit):
            cli.parse_args(["mptbench", "--help"])

        stdout = capsys.readouterr().out
        for action in ("generate", "track", "evaluate", "ablate", "render"):
            assert action in stdout


class TestVersion:
    @pytest.mark.parametrize("version_flag", ("-v", "--version"))
    def test_version_displays_version(self, capsys, version_flag):
        with pytest.raises(SystemExit):
            cli.parse_args(["mptbench", version_flag])

        assert mptbench.__version__ in capsys.readouterr().out


class TestUsageErrors:
    def test_unknown_action_exits_with_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exited:
            cli.parse_args(["mptbench", "juggle"])

        assert exited.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_tracker_exits_with_usage_error(self):
        with pytest.raises(SystemExit) as exited:
            cli.parse_args(["mptbench", "track", "--tracker", "deepsort"])

        assert exited.value.code == 2

    def test_evaluate_needs_results(self):
        with pytest.raises(SystemExit) as exited:
            cli.parse_args(["mptbench", "evaluate"])

        assert exited.value.code == 2

    def test_bad_log_setting_exits_with_usage_error(self, monkeypatch):
        monkeypatch.setenv("MPT_LOG", "chatty")
        with pytest.raises(SystemExit) as exited:
            cli.parse_args(["mptbench", "track"])

        assert exited.value.code == 2


class ActionTestSuite:
    required_args: tuple[str, ...] = ()

    @pytest.mark.parametrize("help_flag", ("-h", "--help"))
    def test_help_gives_action_specific_help(
        self,
        capsys,
        help_flag,
    ):
        with pytest.raises(SystemExit):
            cli.parse_args(["mptbench", *self.action.split(), help_flag])

        stdout = capsys.readouterr().out
        assert f"mptbench {self.canonical} [-h]" in stdout

    def test_default_root_is_cwd(self, monkeypatch):
        monkeypatch.setattr(os, "getcwd", lambda: "~~dummy~~")
        _, root, _, _ = cli.parse_args(
            ["mptbench", *self.action.split(), *self.required_args]
        )
        assert root == Path("~~dummy~~")

    def test_first_argument_is_root(self):
        _, root, _, _ = cli.parse_args(
            ["mptbench", *self.action.split(), "/data", *self.required_args]
        )
        assert root == Path("/data")

    def test_root_can_also_be_provided_by_flag(self):
        _, root, _, _ = cli.parse_args(
            ["mptbench", *self.action.split(), *self.required_args, "--root", "/data"]
        )
        assert root == Path("/data")

    def test_root_can_also_be_provided_by_systemenv(self, monkeypatch):
        monkeypatch.setenv("MPT_ROOT", "/mnt/drive/plankton/")
        _, root, _, _ = cli.parse_args(
            ["mptbench", *self.action.split(), *self.required_args]
        )
        assert root == Path("/mnt/drive/plankton/")

    @pytest.mark.parametrize(
        "verbosity_flag, expected_verbosity",
        (
            ("-v", logging.DEBUG - 9),
            ("-q", logging.WARNING - 9),
            ("--verbose", logging.DEBUG - 9),
            ("--quiet", logging.WARNING - 9),
            ("-vv", -9),
            ("-qq", logging.ERROR - 9),
            ("-vvqvqqvqv", logging.DEBUG - 9),
        ),
    )
    def test_altering_verbosity(self, verbosity_flag, expected_verbosity):
        _, _, log_level, _ = cli.parse_args(
            ["mptbench", *self.action.split(), verbosity_flag, *self.required_args]
        )

        assert log_level == expected_verbosity

    @pytest.mark.parametrize(
        "setting, expected_verbosity",
        (("1", logging.DEBUG - 9), ("warning", logging.WARNING - 9), ("", 11)),
        ids=("integer", "level_name", "empty"),
    )
    def test_log_setting_from_systemenv(
        self, monkeypatch, setting, expected_verbosity
    ):
        monkeypatch.setenv("MPT_LOG", setting)
        _, _, log_level, _ = cli.parse_args(
            ["mptbench", *self.action.split(), *self.required_args]
        )

        assert log_level == expected_verbosity

    def test_flags_stack_on_the_systemenv_setting(self, monkeypatch):
        monkeypatch.setenv("MPT_LOG", "DEBUG")
        _, _, log_level, _ = cli.parse_args(
            ["mptbench", *self.action.split(), "-q", *self.required_args]
        )

        assert log_level == 11

    @property
    def canonical(self) -> str:
        return self.action


class TestGenerate(ActionTestSuite):
    action = "generate"

    def test_defaults(self, call_log):
        action, root, _, options = cli.parse_args(["mptbench", "generate", "/data"])
        action(root, **options)
        ((name, args, kwargs),) = call_log
        assert (name, args, kwargs) == (
            "generate_benchmark",
            (ScenarioConfig(), Path("/data")),
            {"jobs": 1, "overwrite": False},
        )

    def test_overrides(self, call_log):
        action, root, _, options = cli.parse_args(
            ["mptbench", "gen", "-n", "4", "--seed", "7", "-j", "3", "--overwrite"]
        )
        action(root, **options)
        ((_, (scenario, _), kwargs),) = call_log
        assert (
            scenario.sequences_per_background,
            scenario.master_seed,
            kwargs,
        ) == (4, 7, {"jobs": 3, "overwrite": True})

    def test_multiword_alias(self):
        action, _, _, _ = cli.parse_args(["mptbench", "generate", "benchmark"])
        assert action is cli._generate


class TestGenerateBenchmark(ActionTestSuite):
    action = "generate benchmark"

    @property
    def canonical(self) -> str:
        return "generate"


class TestTrack(ActionTestSuite):
    action = "track"

    def test_defaults(self, call_log):
        action, root, _, options = cli.parse_args(["mptbench", "track", "/data"])
        action(root, **options)
        ((name, args, kwargs),) = call_log
        assert (name, args, kwargs) == (
            "track_dataset",
            (
                Path("/data"),
                Path("/data") / "results" / "dsft",
                "dsft",
                TrackerConfig(),
                DetectorConfig(),
            ),
            {"seed": 0, "split": "test", "jobs": 1, "overwrite": False},
        )

    @pytest.mark.parametrize("tracker_flag", ("-t", "--tracker"))
    def test_choosing_a_tracker(self, call_log, tracker_flag):
        action, root, _, options = cli.parse_args(
            ["mptbench", "track", "/data", tracker_flag, "byte"]
        )
        action(root, **options)
        ((_, args, _),) = call_log
        assert args[1:3] == (Path("/data") / "results" / "byte", "byte")

    def test_module_switches_and_noise_flags(self, call_log):
        action, root, _, options = cli.parse_args(
            [
                "mptbench",
                "track",
                "--dcm",
                "off",
                "--mfsf",
                "on",
                "--p-fn",
                "0.3",
                "--jitter",
                "0",
                "--detector",
                "blob",
                "-o",
                "elsewhere",
            ]
        )
        action(root, **options)
        ((_, args, _),) = call_log
        _, out, _, tracker_config, detector_config = args
        assert (
            out,
            tracker_config.use_dcm,
            tracker_config.use_mfsf,
            detector_config.kind,
            detector_config.p_fn,
            detector_config.jitter_sigma,
            detector_config.p_fp,
        ) == (Path("elsewhere"), False, True, "blob", 0.3, 0.0, DetectorConfig().p_fp)

    def test_switches_must_be_on_or_off(self):
        with pytest.raises(SystemExit):
            cli.parse_args(["mptbench", "track", "--dcm", "maybe"])


class TestEvaluate(ActionTestSuite):
    action = "evaluate"
    required_args = ("--results", "results")

    @pytest.mark.parametrize("alias", ("eval", "score"))
    def test_aliases(self, alias):
        action, _, _, options = cli.parse_args(["mptbench", alias, "-r", "out"])
        assert (action, options["results"]) == (cli._evaluate, Path("out"))

    def test_defaults(self):
        *_, options = cli.parse_args(["mptbench", "evaluate", "-r", "out"])
        assert options == {
            "results": Path("out"),
            "out": None,
            "split": "test",
            "jobs": 1,
        }


class TestAblate(ActionTestSuite):
    action = "ablate"

    def test_defaults(self, call_log):
        action, root, _, options = cli.parse_args(["mptbench", "ablation", "/data"])
        action(root, **options)
        ((name, args, kwargs),) = call_log
        assert (name, args) == (
            "run_ablation",
            (
                Path("/data"),
                Path("/data") / "ablation",
                TrackerConfig(),
                DetectorConfig(),
            ),
        )
        assert kwargs["split"] == "test"


class TestRender(ActionTestSuite):
    action = "render"
    required_args = ("b1-01",)

    def test_unknown_sequence_raises(self, tmp_path, call_log):
        action, root, _, options = cli.parse_args(
            ["mptbench", "overlay", str(tmp_path), "w9-99"]
        )
        with pytest.raises(FileNotFoundError):
            action(root, **options)
        assert not call_log

    def test_defaults_to_the_ground_truth(self, tmp_path, call_log):
        sequence_folder = tmp_path / "train" / "b1-01"
        sequence_folder.mkdir(parents=True)
        (sequence_folder / "seqinfo.ini").write_text("")
        action, root, _, options = cli.parse_args(
            ["mptbench", "render", str(tmp_path), "b1-01"]
        )
        action(root, **options)
        ((_, args, kwargs),) = call_log
        assert args == (
            sequence_folder,
            sequence_folder / "gt" / "gt.txt",
            tmp_path / "overlays" / "b1-01",
        )
        assert kwargs == {"overwrite": False}


@pytest.mark.usefixtures("restore_package_logger")
class TestMain:
    def test_failures_exit_with_status_one(self, monkeypatch, tmp_path, caplog):
        monkeypatch.setattr(
            sys,
            "argv",
            ["mptbench", "evaluate", str(tmp_path), "-r", str(tmp_path / "nope")],
        )
        with pytest.raises(SystemExit) as exited:
            cli.main()

        assert exited.value.code == 1
        assert "FileNotFoundError" in caplog.text

    def test_success_returns_normally(self, monkeypatch, tmp_path, call_log):
        monkeypatch.setattr(sys, "argv", ["mptbench", "generate", str(tmp_path)])
        cli.main()
        assert len(call_log) == 1
