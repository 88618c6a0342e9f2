"""Parameterized water backgrounds"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import Frame

FAMILIES = ("blue", "white")

BASE_COLORS: dict[str, tuple[float, float, float]] = {
    "blue": (60.0, 120.0, 185.0),
    "white": (228.0, 230.0, 226.0),
}

PRESETS_PER_FAMILY = 7

# impurity darkening factor range (multiplies the underlying color)
_IMPURITY_SHADE_RANGE = (0.35, 0.75)


@dataclass(frozen=True)
class BackgroundSpec:
    """Specification of a background

    Parameters
    ----------
    id : int
        The preset identifier, 1-7 for the blue family and 8-14 for white
    family : str
        "blue" or "white"
    impurity_density : float
        The mean number of impurities per megapixel
    brightness : float
        Multiplicative gain applied to the family's base color, in (0, 2]
    impurity_size_range : (float, float)
        The range of impurity diameters, in pixels
    """

    id: int
    family: str
    impurity_density: float
    brightness: float
    impurity_size_range: tuple[float, float] = (2.0, 8.0)

    def __post_init__(self):
        if not 1 <= self.id <= len(FAMILIES) * PRESETS_PER_FAMILY:
            raise ValueError(f"Background ID {self.id} is not in [1, 14]")
        if self.family not in FAMILIES:
            raise ValueError(f"Unknown background family {self.family!r}")
        if self.impurity_density < 0:
            raise ValueError("Impurity density cannot be negative")
        if not 0 < self.brightness <= 2:
            raise ValueError(f"Brightness {self.brightness} is not in (0, 2]")
        low, high = self.impurity_size_range
        if not 0 < low <= high:
            raise ValueError(
                f"Invalid impurity size range {self.impurity_size_range}"
            )

    @property
    def label(self) -> str:
        """The short name of the background, b1-b7 or w1-w7"""
        return f"{self.family[0]}{(self.id - 1) % PRESETS_PER_FAMILY + 1}"


# within a family, a higher index means a dirtier background
_DENSITIES = (5.0, 15.0, 30.0, 60.0, 100.0, 160.0, 240.0)
_BRIGHTNESSES = (1.0, 0.85, 1.15, 0.9, 1.1, 0.8, 1.2)

PRESETS: tuple[BackgroundSpec, ...] = tuple(
    BackgroundSpec(
        family_index * PRESETS_PER_FAMILY + index + 1,
        family,
        density,
        brightness,
    )
    for family_index, family in enumerate(FAMILIES)
    for index, (density, brightness) in enumerate(zip(_DENSITIES, _BRIGHTNESSES))
)


def get_preset(identifier: int | str) -> BackgroundSpec:
    """Look up a background preset by its ID (1-14) or its label ("b1"-"w7")

    Raises
    ------
    KeyError
        If there's no such preset
    """
    for preset in PRESETS:
        if identifier in (preset.id, preset.label):
            return preset
    raise KeyError(f"No background preset {identifier!r}")


def sample_impurities(
    spec: BackgroundSpec, rng: np.random.Generator, width: int, height: int
) -> np.ndarray:
    """Draw the impurities for one background

    Parameters
    ----------
    spec : BackgroundSpec
        The background specification
    rng : Generator
        The random stream
    width, height : int
        The frame size

    Returns
    -------
    (N, 4) array
        One row per impurity: center x, center y, radius and shade factor.
        N is Poisson-distributed with mean density × area / 10⁶.
    """
    expected = spec.impurity_density * width * height / 1e6
    count = int(rng.poisson(expected))
    centers_x = rng.uniform(0, width, count)
    centers_y = rng.uniform(0, height, count)
    radii = rng.uniform(*spec.impurity_size_range, count) / 2
    shades = rng.uniform(*_IMPURITY_SHADE_RANGE, count)
    return np.column_stack((centers_x, centers_y, radii, shades)).reshape(-1, 4)


def render_background(
    spec: BackgroundSpec,
    rng: np.random.Generator,
    frame_size: tuple[int, int] = (640, 480),
) -> Frame:
    """Paint a background

    Parameters
    ----------
    spec : BackgroundSpec
        The background specification
    rng : Generator
        The random stream. The output is fully determined by its state.
    frame_size : (int, int), optional
        The (width, height) of the frame. Default is 640×480.

    Returns
    -------
    Frame
        The background (with index 0)
    """
    width, height = frame_size
    color = np.clip(np.array(BASE_COLORS[spec.family]) * spec.brightness, 0, 255)
    pixels = np.empty((height, width, 3), dtype=float)
    pixels[:] = color

    impurities = sample_impurities(spec, rng, width, height)
    for center_x, center_y, radius, shade in impurities:
        x0 = max(int(np.floor(center_x - radius)), 0)
        x1 = min(int(np.ceil(center_x + radius)) + 1, width)
        y0 = max(int(np.floor(center_y - radius)), 0)
        y1 = min(int(np.ceil(center_y + radius)) + 1, height)
        if x0 >= x1 or y0 >= y1:
            continue
        yy, xx = np.mgrid[y0:y1, x0:x1]
        inside = (xx + 0.5 - center_x) ** 2 + (yy + 0.5 - center_y) ** 2 <= radius**2
        pixels[y0:y1, x0:x1][inside] *= shade

    return Frame(0, np.round(pixels).astype(np.uint8))


def estimate_background(frames: Sequence[Frame], samples: int = 25) -> Frame:
    """Estimate the static background of a sequence by a temporal median

    Parameters
    ----------
    frames : list-like of Frame
        The frames of the sequence
    samples : int, optional
        The number of evenly spaced frames to take the median over.
        Default is 25.

    Returns
    -------
    Frame
        The background model (with index 0)

    Raises
    ------
    ValueError
        If no frames are provided
    """
    if len(frames) == 0:
        raise ValueError("Cannot estimate a background from zero frames")
    picks = np.unique(
        np.linspace(0, len(frames) - 1, min(samples, len(frames))).astype(int)
    )
    stack = np.stack([frames[pick].pixels for pick in picks])
    return Frame(0, np.median(stack, axis=0).round().astype(np.uint8))
