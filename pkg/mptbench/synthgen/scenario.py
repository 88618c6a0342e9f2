"""Scenario configuration and the random draws that set up a sequence"""
import math
from pathlib import Path
from typing import Any, NamedTuple, Sequence

import numpy as np

from .. import config as cfg
from ..core import DEFAULT_FPS, BoundingBox, iou
from .compositing import placement_radius
from .motion import MotionState
from .sprites import SpriteAsset, build_sprite_library, load_sprite_directory

SECTION_NAME = "scenario"


class GenerationError(RuntimeError):
    """Raised when a scenario cannot be realized (for example, when the frame
    is too small to place the requested sprites)"""


class ScenarioConfig(NamedTuple):
    """The knobs controlling benchmark generation

    Parameters
    ----------
    master_seed : int
        The seed every sequence seed is derived from
    sequences_per_background : int
        The number of sequences to render over each of the 14 backgrounds
    frame_count_range : (int, int)
        The inclusive range sequence lengths are drawn from
    sprite_count_range : (int, int)
        The inclusive range sprite counts are drawn from
    speed_range : (float, float)
        The range of drift speeds, in pixels per frame
    jitter_range : (float, float)
        The range of jitter amplitudes, in pixels
    rotation_rate_range : (float, float)
        The range of rotation rates, in radians per frame
    frame_size : (int, int)
        The (width, height) of the frames
    fps : int
        The frame rate recorded in each sequence's metadata
    noise_sigma : float
        The standard deviation of the per-frame sensor noise, in grey levels
    max_overlap : float
        The largest intersection over union allowed between a new sprite's
        initial box and the box of any sprite placed before it
    placement_attempts : int
        How many positions to try for each sprite before giving up
    sprite_directory : Path, optional
        A folder of sprites to use in place of the procedural library
    """

    master_seed: int = 0
    sequences_per_background: int = 10
    frame_count_range: tuple[int, int] = (100, 300)
    sprite_count_range: tuple[int, int] = (5, 20)
    speed_range: tuple[float, float] = (0.5, 4.0)
    jitter_range: tuple[float, float] = (0.0, 2.0)
    rotation_rate_range: tuple[float, float] = (-0.05, 0.05)
    frame_size: tuple[int, int] = (640, 480)
    fps: int = DEFAULT_FPS
    noise_sigma: float = 2.0
    max_overlap: float = 0.9
    placement_attempts: int = 100
    sprite_directory: Path | None = None

    def validate(self) -> "ScenarioConfig":
        """Check the configuration

        Returns
        -------
        ScenarioConfig
            This configuration, unchanged (for chaining)

        Raises
        ------
        ValueError
            If any range is empty or any value is out of bounds
        """
        for name in (
            "frame_count_range",
            "sprite_count_range",
            "speed_range",
            "jitter_range",
            "rotation_rate_range",
        ):
            low, high = getattr(self, name)
            if low > high:
                raise ValueError(f"{name} is empty: min {low} > max {high}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.sequences_per_background < 1:
            raise ValueError("sequences_per_background must be at least 1")
        if self.frame_count_range[0] < 1:
            raise ValueError("Sequences need at least one frame")
        if self.sprite_count_range[0] < 0:
            raise ValueError("Sprite counts cannot be negative")
        if self.speed_range[0] < 0 or self.jitter_range[0] < 0:
            raise ValueError("Speeds and jitter amplitudes cannot be negative")
        if min(self.frame_size) < 16:
            raise ValueError("Frames must be at least 16×16")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma cannot be negative")
        if not 0 <= self.max_overlap <= 1:
            raise ValueError("max_overlap must be in [0, 1]")
        if self.placement_attempts < 1:
            raise ValueError("placement_attempts must be at least 1")
        return self

    @classmethod
    def from_cfg(cls, config_file: Path) -> "ScenarioConfig":
        """Read the [scenario] section of an INI (or JSON) run config

        Parameters
        ----------
        config_file : Path
            The config file. Keys mirror the field names (with dashes in place
            of underscores). Missing keys take their defaults.

        Returns
        -------
        ScenarioConfig
            The parsed (and validated) configuration

        Raises
        ------
        FileNotFoundError
            If the config file doesn't exist
        ValueError
            If the config file or any of its values can't be parsed
        """
        sections = cfg.read_sections(config_file)
        try:
            return cls.from_mapping(sections.get(SECTION_NAME, {}))
        except ValueError as bad_value:
            raise ValueError(
                f"Invalid [{SECTION_NAME}] in {config_file}"
            ) from bad_value

    @classmethod
    def from_mapping(cls, section: dict[str, str]) -> "ScenarioConfig":
        """Parse a configuration from INI-style string entries

        Raises
        ------
        ValueError
            If a key is unrecognized or a value can't be parsed
        """
        parsers: dict[str, Any] = {
            "master_seed": int,
            "sequences_per_background": int,
            "frame_count_range": lambda entry: cfg.parse_ini_range(entry, int),
            "sprite_count_range": lambda entry: cfg.parse_ini_range(entry, int),
            "speed_range": cfg.parse_ini_range,
            "jitter_range": cfg.parse_ini_range,
            "rotation_rate_range": cfg.parse_ini_range,
            "frame_size": lambda entry: tuple(
                int(value) for value in cfg.parse_ini_list(entry)
            ),
            "fps": int,
            "noise_sigma": float,
            "max_overlap": float,
            "placement_attempts": int,
            "sprite_directory": lambda entry: Path(entry) if entry else None,
        }
        values: dict[str, Any] = {}
        for key, entry in section.items():
            field_name = key.replace("-", "_")
            if field_name not in parsers:
                raise ValueError(f"Unrecognized scenario setting: {key}")
            values[field_name] = parsers[field_name](entry)
        if "frame_size" in values and len(values["frame_size"]) != 2:
            raise ValueError("frame-size must be given as: width, height")
        return cls(**values).validate()

    def to_section(self) -> dict[str, Any]:
        """Render the configuration as an INI section"""
        section = self._asdict()
        if self.sprite_directory is None:
            section.pop("sprite_directory")
        return section


def sprite_library(config: ScenarioConfig) -> tuple[SpriteAsset, ...]:
    """The sprites to draw from under the given configuration"""
    if config.sprite_directory is not None:
        return load_sprite_directory(config.sprite_directory)
    return build_sprite_library()


def choose_sprites(
    library: Sequence[SpriteAsset], count: int, rng: np.random.Generator
) -> list[SpriteAsset]:
    """Draw sprites uniformly (with replacement) from the library

    Raises
    ------
    ValueError
        If the library is empty
    """
    if len(library) == 0:
        raise ValueError("The sprite library is empty")
    return [library[pick] for pick in rng.integers(0, len(library), count)]


def sample_scenario(
    config: ScenarioConfig,
    background_id: int,
    rng: np.random.Generator,
    library: Sequence[SpriteAsset] | None = None,
) -> list[tuple[SpriteAsset, MotionState]]:
    """Draw the cast of a sequence and their initial states

    Parameters
    ----------
    config : ScenarioConfig
        The generation settings
    background_id : int
        The background the sequence will be rendered over
    rng : Generator
        The random stream
    library : list-like of SpriteAsset, optional
        The sprites to draw from. Defaults to the library the config points
        to.

    Returns
    -------
    list of (SpriteAsset, MotionState)
        The actors, with counts, species, positions, speeds, headings, jitter
        amplitudes, angles and rotation rates all drawn uniformly. Every
        initial box lies fully inside the frame.

    Raises
    ------
    GenerationError
        If a sprite can't fit in the frame, or if a position with acceptable
        overlap can't be found in the allotted number of attempts
    """
    library = library if library is not None else sprite_library(config)
    width, height = config.frame_size
    min_count, max_count = config.sprite_count_range
    count = int(rng.integers(min_count, max_count + 1))

    actors: list[tuple[SpriteAsset, MotionState]] = []
    placed: list[BoundingBox] = []
    for sprite in choose_sprites(library, count, rng):
        radius = placement_radius(sprite)
        bounds = (
            float(radius),
            float(radius),
            float(width - radius),
            float(height - radius),
        )
        if bounds[0] > bounds[2] or bounds[1] > bounds[3]:
            raise GenerationError(
                f"A {width}×{height} frame is too small for a sprite of species"
                f" {sprite.species} (background {background_id})"
            )
        for _ in range(config.placement_attempts):
            position = (
                float(rng.uniform(bounds[0], bounds[2])),
                float(rng.uniform(bounds[1], bounds[3])),
            )
            box = BoundingBox.from_center(*position, sprite.width, sprite.height)
            if all(iou(box, other) <= config.max_overlap for other in placed):
                break
        else:
            raise GenerationError(
                f"Could not place {count} sprites in a {width}×{height} frame"
                f" without exceeding {config.max_overlap:.0%} overlap"
                f" (background {background_id})"
            )
        placed.append(box)

        speed = rng.uniform(*config.speed_range)
        heading = rng.uniform(0, 2 * math.pi)
        actors.append(
            (
                sprite,
                MotionState(
                    position=position,
                    velocity=(
                        float(speed * math.cos(heading)),
                        float(speed * math.sin(heading)),
                    ),
                    angle=float(rng.uniform(0, 2 * math.pi)),
                    angular_velocity=float(rng.uniform(*config.rotation_rate_range)),
                    jitter_amplitude=float(rng.uniform(*config.jitter_range)),
                    bounds=bounds,
                ),
            )
        )
    return actors
