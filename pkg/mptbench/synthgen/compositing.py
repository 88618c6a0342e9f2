"""Compositing sprites over a background and measuring what ended up where"""
import math
from typing import NamedTuple, Sequence

import numpy as np
from PIL import Image

from ..core import BoundingBox, Frame, GtRecord
from .motion import MotionState
from .sprites import OPAQUE_THRESHOLD, SpriteAsset


class Placement(NamedTuple):
    """A rotated sprite pinned to the frame

    Parameters
    ----------
    raster : (H, W, 4) uint8 array
        The rotated RGBA sprite
    left, top : int
        The frame coordinates of the raster's top-left pixel
    """

    raster: np.ndarray
    left: int
    top: int


def placement_radius(sprite: SpriteAsset) -> int:
    """The distance from the sprite's center past which none of it can
    reach, whatever its rotation (plus a pixel for the rounding done when
    placing it)"""
    return math.ceil(math.hypot(sprite.width, sprite.height) / 2) + 1


def rotate_sprite(sprite: SpriteAsset, angle: float) -> np.ndarray:
    """Rotate a sprite's raster (counter-clockwise, in radians) about its
    center, growing the canvas to fit. Nearest-neighbor resampling keeps the
    alpha channel binary."""
    if angle == 0:
        return sprite.raster
    rotated = Image.fromarray(sprite.raster, mode="RGBA").rotate(
        math.degrees(angle), resample=Image.Resampling.NEAREST, expand=True
    )
    return np.asarray(rotated, dtype=np.uint8)


def place_sprite(sprite: SpriteAsset, state: MotionState) -> Placement:
    """Rotate a sprite and pin its center at the state's position"""
    raster = rotate_sprite(sprite, state.angle)
    height, width = raster.shape[:2]
    x, y = state.position
    return Placement(
        raster,
        math.floor(x - width / 2 + 0.5),
        math.floor(y - height / 2 + 0.5),
    )


def _frame_window(
    placement: Placement, frame_width: int, frame_height: int
) -> tuple[slice, slice, slice, slice] | None:
    height, width = placement.raster.shape[:2]
    x0, y0 = max(placement.left, 0), max(placement.top, 0)
    x1 = min(placement.left + width, frame_width)
    y1 = min(placement.top + height, frame_height)
    if x0 >= x1 or y0 >= y1:
        return None
    return (
        slice(y0, y1),
        slice(x0, x1),
        slice(y0 - placement.top, y1 - placement.top),
        slice(x0 - placement.left, x1 - placement.left),
    )


def composite_frame(
    background: Frame,
    actors: Sequence[tuple[SpriteAsset, MotionState]],
    frame_index: int | None = None,
) -> tuple[Frame, list[GtRecord]]:
    """Render one frame

    Parameters
    ----------
    background : Frame
        The background to paint over (not modified)
    actors : list of (SpriteAsset, MotionState)
        The sprites and their states, back to front
    frame_index : int, optional
        The index to give the rendered frame and its records. Defaults to
        the background's index (or 1, if that's 0).

    Returns
    -------
    Frame
        The rendered frame
    list of GtRecord
        One record per actor that's at least partially visible, with id =
        the actor's position in the list + 1. Each box is the amodal bounds
        of the actor's rotated opaque region, clipped to the frame, and the
        visibility is the fraction of its opaque pixels that no actor in
        front of it covers.
    """
    index = frame_index if frame_index is not None else max(background.index, 1)
    frame_height, frame_width = background.pixels.shape[:2]

    canvas = background.pixels.astype(float)
    owners = np.zeros((frame_height, frame_width), dtype=np.int32)
    footprints: list[tuple[SpriteAsset, BoundingBox | None, int]] = []

    for number, (sprite, state) in enumerate(actors, start=1):
        placement = place_sprite(sprite, state)
        raster = placement.raster
        opaque = raster[..., 3] >= OPAQUE_THRESHOLD
        rows, cols = np.nonzero(opaque)
        footprint = BoundingBox.from_xyxy(
            placement.left + cols.min(),
            placement.top + rows.min(),
            placement.left + cols.max() + 1,
            placement.top + rows.max() + 1,
        ).clip(frame_width, frame_height)
        footprints.append((sprite, footprint, len(rows)))

        window = _frame_window(placement, frame_width, frame_height)
        if window is None:
            continue
        frame_rows, frame_cols, sprite_rows, sprite_cols = window
        patch = raster[sprite_rows, sprite_cols].astype(float)
        alpha = patch[..., 3:] / 255.0
        region = canvas[frame_rows, frame_cols]
        canvas[frame_rows, frame_cols] = alpha * patch[..., :3] + (1 - alpha) * region
        owners[frame_rows, frame_cols][opaque[sprite_rows, sprite_cols]] = number

    visible_counts = np.bincount(owners.ravel(), minlength=len(footprints) + 1)

    records: list[GtRecord] = []
    for number, (sprite, footprint, opaque_count) in enumerate(footprints, start=1):
        visibility = visible_counts[number] / opaque_count
        if footprint is None or visibility == 0:
            continue
        records.append(
            GtRecord(
                index,
                number,
                footprint,
                conf=1.0,
                class_id=sprite.species,
                visibility=float(visibility),
            )
        )

    return Frame(index, np.round(canvas).astype(np.uint8)), records


def add_sensor_noise(
    frame: Frame, sigma: float, rng: np.random.Generator
) -> Frame:
    """Add zero-mean Gaussian noise to every channel of every pixel"""
    if sigma <= 0:
        return frame
    noisy = frame.pixels.astype(float) + rng.normal(0.0, sigma, frame.pixels.shape)
    return frame._replace(pixels=np.clip(np.round(noisy), 0, 255).astype(np.uint8))
