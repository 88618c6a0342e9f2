"""Plankton sprites: procedurally drawn silhouettes or user-supplied crops"""
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from PIL import Image

from ..core import SPECIES
from ..loggers import GENERATE_LOGGER

MIN_DIAMETER = 8.0

MAX_DIAMETER = 120.0

OPAQUE_THRESHOLD = 128

SILHOUETTES = ("ellipse", "chain", "spiked disc")

_SPRITE_FILE_PATTERN = re.compile(r"^(\d+)_.*\.png$", re.IGNORECASE)


@dataclass(frozen=True, eq=False)
class SpriteAsset:
    """A single plankton sprite

    Parameters
    ----------
    species : int
        The 1-indexed species
    raster : (H, W, 4) uint8 array
        The RGBA image. Pixels with alpha ≥ 128 count as opaque.
    nominal_diameter : float
        The nominal size of the organism, in pixels
    """

    species: int
    raster: np.ndarray = field(repr=False)
    nominal_diameter: float

    def __post_init__(self):
        if not 1 <= self.species <= len(SPECIES):
            raise ValueError(f"Species {self.species} is not in [1, {len(SPECIES)}]")
        if self.raster.ndim != 3 or self.raster.shape[2] != 4:
            raise ValueError("Sprite rasters must be RGBA")
        if not self.opaque_mask.any():
            raise ValueError(f"Sprite for species {self.species} has no opaque pixels")
        if self.nominal_diameter <= 0:
            raise ValueError("Nominal diameter must be positive")

    @property
    def opaque_mask(self) -> np.ndarray:
        return self.raster[..., 3] >= OPAQUE_THRESHOLD

    @property
    def width(self) -> int:
        return int(self.raster.shape[1])

    @property
    def height(self) -> int:
        return int(self.raster.shape[0])


def nominal_diameter(species: int) -> float:
    """Geometrically spaced diameters, from 8 px for the first species up to
    120 px for the last"""
    return MIN_DIAMETER * (MAX_DIAMETER / MIN_DIAMETER) ** (
        (species - 1) / (len(SPECIES) - 1)
    )


def silhouette_of(species: int) -> str:
    return SILHOUETTES[(species - 1) % len(SILHOUETTES)]


def _silhouette_mask(species: int, diameter: float) -> np.ndarray:
    side = math.ceil(diameter * 1.1) + 2
    yy, xx = np.mgrid[0:side, 0:side].astype(float)
    xx += 0.5 - side / 2
    yy += 0.5 - side / 2
    radius = diameter / 2

    match silhouette_of(species):
        case "ellipse":
            aspect = 0.4 + 0.1 * (species % 4)
            minor = max(radius * aspect, 1.0)
            return (xx / radius) ** 2 + (yy / minor) ** 2 <= 1
        case "chain":
            cells = 3 + species % 3
            cell_radius = radius / cells
            mask = np.zeros_like(xx, dtype=bool)
            for cell in range(cells):
                center = -radius + cell_radius * (2 * cell + 1)
                # neighbouring cells overlap so the chain stays one blob
                reach = max(1.25 * cell_radius, 0.75)
                mask |= (xx - center) ** 2 + yy**2 <= reach**2
            return mask
        case _:
            spikes = 6 + species % 5
            rho = np.hypot(xx, yy)
            theta = np.arctan2(yy, xx)
            reach = radius / 2 + radius / 2 * np.maximum(np.cos(spikes * theta), 0) ** 8
            return rho <= np.maximum(reach, 1.0)


def draw_sprite(species: int) -> SpriteAsset:
    """Procedurally draw the sprite for a species

    Parameters
    ----------
    species : int
        The 1-indexed species

    Returns
    -------
    SpriteAsset
        A sprite whose silhouette family (ellipse, chain of cells or spiked
        disc) is determined by the species, colored in a brownish-olive tone
        drawn from a stream seeded by the species index
    """
    diameter = nominal_diameter(species)
    mask = _silhouette_mask(species, diameter)

    palette = np.random.default_rng(species)
    body = np.array(
        (
            palette.uniform(90, 150),
            palette.uniform(70, 120),
            palette.uniform(20, 60),
        )
    )
    side = mask.shape[0]
    yy, xx = np.mgrid[0:side, 0:side].astype(float) + 0.5 - side / 2
    falloff = 1 - 0.3 * np.clip(np.hypot(xx, yy) / (diameter / 2), 0, 1)

    raster = np.zeros((side, side, 4), dtype=np.uint8)
    raster[..., :3] = np.round(body * falloff[..., None]).astype(np.uint8)
    raster[..., 3] = np.where(mask, 255, 0).astype(np.uint8)
    raster[~mask, :3] = 0
    return SpriteAsset(species, raster, diameter)


@lru_cache(maxsize=None)
def build_sprite_library() -> tuple[SpriteAsset, ...]:
    """The procedural sprite library: one sprite per species"""
    return tuple(draw_sprite(species) for species in range(1, len(SPECIES) + 1))


def load_sprite_directory(folder: Path) -> tuple[SpriteAsset, ...]:
    """Load user-supplied sprites (such as real microscope crops)

    Parameters
    ----------
    folder : Path
        A folder of RGBA PNGs, each named `<species>_<anything>.png`, where
        `<species>` is the 1-indexed species

    Returns
    -------
    tuple of SpriteAsset
        The loaded sprites, in file-name order. The nominal diameter of each
        is the larger side of its opaque region.

    Raises
    ------
    FileNotFoundError
        If the folder doesn't exist
    ValueError
        If no valid sprites could be loaded
    """
    if not folder.is_dir():
        raise FileNotFoundError(f"No sprite directory exists at {folder}")
    sprites: list[SpriteAsset] = []
    for path in sorted(folder.iterdir()):
        if not (match := _SPRITE_FILE_PATTERN.match(path.name)):
            GENERATE_LOGGER.debug(f"Skipping {path.name}")
            continue
        try:
            with Image.open(path) as image:
                raster = np.asarray(image.convert("RGBA"), dtype=np.uint8).copy()
            opaque = raster[..., 3] >= OPAQUE_THRESHOLD
            rows, cols = np.nonzero(opaque)
            if len(rows) == 0:
                raise ValueError("it has no opaque pixels")
            diameter = float(max(np.ptp(rows), np.ptp(cols)) + 1)
            sprites.append(SpriteAsset(int(match.group(1)), raster, diameter))
        except (OSError, ValueError) as bad_sprite:
            GENERATE_LOGGER.warning(f"Could not load sprite {path}: {bad_sprite}")
    if not sprites:
        raise ValueError(f"No valid sprites found in {folder}")
    return tuple(sprites)


def opaque_bounds(raster: np.ndarray) -> tuple[int, int, int, int]:
    """Find the (left, top, right, bottom) pixel bounds of the opaque region
    of an RGBA raster, with right and bottom exclusive

    Raises
    ------
    ValueError
        If nothing in the raster is opaque
    """
    rows, cols = np.nonzero(raster[..., 3] >= OPAQUE_THRESHOLD)
    if len(rows) == 0:
        raise ValueError("Raster has no opaque pixels")
    return int(cols.min()), int(rows.min()), int(cols.max()) + 1, int(rows.max()) + 1
