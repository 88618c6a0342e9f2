"""Multi-scale frame-to-frame similarity: per-scale correlation windows,
fusion onto the deep lattice and offset prediction"""
from typing import Collection, NamedTuple

import numpy as np

from .features import SCALES, STRIDES, FeaturePyramid, box_descriptors

DEFAULT_RADIUS = 4

DEEP_STRIDE = STRIDES["deep"]

OUT_OF_GRID = -1.0


class SimilarityVolume(NamedTuple):
    """The similarity of one target to its surroundings in the next frame

    Parameters
    ----------
    fused : (2R+1, 2R+1) array
        The fused map over deep-cell displacements, indexed [dy + R, dx + R]
    components : dict of str to array
        The raw map of each fused scale, on that scale's own lattice (or on
        the pixel lattice, when the pyramids carry pixel tables)
    anchor : (int, int)
        The (row, column) of the target's deep cell in the previous frame
    radius : int
        R, in deep cells
    scales : tuple of str
        The scales that were fused
    center : (float, float)
        The target's center in the previous frame, in pixels
    """

    fused: np.ndarray
    components: dict[str, np.ndarray]
    anchor: tuple[int, int]
    radius: int
    scales: tuple[str, ...]
    center: tuple[float, float]


def scale_radius(radius: int, scale: str) -> int:
    """Rescale a search radius given in deep cells to the given scale, so
    every scale covers the same pixel window"""
    return radius * DEEP_STRIDE // STRIDES[scale]


def anchor_cell(
    center: tuple[float, float], scale: str, grid: np.ndarray
) -> tuple[int, int]:
    """The (row, column) of the cell holding a pixel location, clamped to the
    grid"""
    stride = STRIDES[scale]
    row = min(max(int(center[1] // stride), 0), grid.shape[0] - 1)
    col = min(max(int(center[0] // stride), 0), grid.shape[1] - 1)
    return row, col


def window_similarity(
    descriptor: np.ndarray,
    cur_level: np.ndarray,
    anchor: tuple[int, int],
    radius: int,
) -> np.ndarray:
    """Dot a descriptor with every entry of a grid within `radius` of the
    anchor, writing -1 wherever the window hangs off the grid"""
    rows, cols = cur_level.shape[:2]
    row, col = anchor
    size = 2 * radius + 1
    similarity = np.full((size, size), OUT_OF_GRID)
    top, bottom = max(row - radius, 0), min(row + radius + 1, rows)
    left, right = max(col - radius, 0), min(col + radius + 1, cols)
    similarity[
        top - row + radius : bottom - row + radius,
        left - col + radius : right - col + radius,
    ] = cur_level[top:bottom, left:right] @ descriptor
    return similarity


def scale_similarity(
    prev_level: np.ndarray,
    cur_level: np.ndarray,
    anchor: tuple[int, int],
    radius: int,
) -> np.ndarray:
    """Correlate one descriptor of the previous frame with a window of the
    current frame

    Parameters
    ----------
    prev_level : (rows, cols, D) array
        The previous frame's descriptors at some scale
    cur_level : (rows, cols, D) array
        The current frame's descriptors at the same scale
    anchor : (int, int)
        The (row, column) of the target's cell in the previous frame
    radius : int
        The half-width of the window, in this scale's cells

    Returns
    -------
    (2 radius + 1, 2 radius + 1) array
        map[dy + radius, dx + radius] is the dot product of the anchor's
        descriptor with the current frame's descriptor at anchor + (dy, dx).
        For L2-normalized descriptors, this is their cosine similarity.
        Displacements landing outside the grid get -1.

    Raises
    ------
    ValueError
        If the anchor is outside the grid or the levels' shapes differ
    """
    if prev_level.shape != cur_level.shape:
        raise ValueError(
            f"Cannot correlate grids of shapes {prev_level.shape}"
            f" and {cur_level.shape}"
        )
    rows, cols = prev_level.shape[:2]
    row, col = anchor
    if not (0 <= row < rows and 0 <= col < cols):
        raise ValueError(f"Anchor {anchor} is outside the {rows}×{cols} grid")
    return window_similarity(prev_level[row, col], cur_level, anchor, radius)


def resample_to_deep(component: np.ndarray, factor: int) -> np.ndarray:
    """Bring a finer-scale map onto the deep displacement lattice

    Parameters
    ----------
    component : (2kR+1, 2kR+1) array
        The map at a scale k times finer than the deep one
    factor : int
        k

    Returns
    -------
    (2R+1, 2R+1) array
        Every finer displacement goes to the deep displacement nearest it
        (to both, when it sits exactly halfway), and each deep displacement
        keeps the best value sent its way: d·k - k//2 through d·k + k//2
    """
    if factor == 1:
        return component
    fine_radius = (component.shape[0] - 1) // 2
    radius = fine_radius // factor
    half = factor // 2
    size = 2 * radius + 1
    resampled = np.empty((size, size))
    for i in range(size):
        fine_row = (i - radius) * factor + fine_radius
        rows = slice(max(fine_row - half, 0), fine_row + half + 1)
        for j in range(size):
            fine_col = (j - radius) * factor + fine_radius
            cols = slice(max(fine_col - half, 0), fine_col + half + 1)
            resampled[i, j] = component[rows, cols].max()
    return resampled


def _lattice_factor(component: np.ndarray, deep_size: int) -> int:
    if component.ndim != 2 or component.shape[0] != component.shape[1]:
        raise ValueError(f"Similarity maps must be square, not {component.shape}")
    size = component.shape[0]
    if size % 2 == 0:
        raise ValueError(f"Similarity maps must have odd sides, not {size}")
    if deep_size == 1:
        if size != 1:
            raise ValueError("A radius-0 deep map can only be fused with 1×1 maps")
        return 1
    factor, remainder = divmod(size - 1, deep_size - 1)
    if remainder or factor < 1:
        raise ValueError(
            f"A {size}×{size} map does not lie on a lattice compatible"
            f" with a {deep_size}×{deep_size} deep map"
        )
    return factor


def fuse_similarity(
    deep_map: np.ndarray, mid_map: np.ndarray, shallow_map: np.ndarray
) -> np.ndarray:
    """Sum the three per-scale maps with equal weights

    Parameters
    ----------
    deep_map : (2R+1, 2R+1) array
        The deep-scale map
    mid_map, shallow_map : array
        The finer maps, either already on the deep lattice or on a lattice
        an integer number of times finer (in which case they're resampled
        with `resample_to_deep`)

    Returns
    -------
    (2R+1, 2R+1) array
        deep + mid + shallow

    Raises
    ------
    ValueError
        If a map can't be brought onto the deep lattice
    """
    deep_size = deep_map.shape[0]
    _lattice_factor(deep_map, deep_size)
    fused = np.array(deep_map, dtype=float)
    for component in (mid_map, shallow_map):
        factor = _lattice_factor(component, deep_size)
        fused = fused + resample_to_deep(component, factor)
    return fused


def predict_offset(fused: np.ndarray, stride: int = DEEP_STRIDE) -> tuple[int, int]:
    """Find the displacement with the highest fused similarity

    Parameters
    ----------
    fused : (2R+1, 2R+1) array
        The fused map
    stride : int, optional
        The pixel size of one lattice step. Default is 8 (the deep stride).

    Returns
    -------
    (int, int)
        The (dx, dy) offset in pixels. Ties go to the smallest displacement,
        and then to the lexicographically smallest (dy, dx).

    Raises
    ------
    ValueError
        If the map is empty
    """
    if fused.size == 0:
        raise ValueError("Cannot predict an offset from an empty map")
    radius_y, radius_x = (fused.shape[0] - 1) // 2, (fused.shape[1] - 1) // 2
    rows, cols = np.nonzero(fused == fused.max())
    dy, dx = min(
        zip(rows - radius_y, cols - radius_x),
        key=lambda d: (d[0] ** 2 + d[1] ** 2, d[0], d[1]),
    )
    return int(dx) * stride, int(dy) * stride




def _pixel_components(
    prev: FeaturePyramid,
    cur: FeaturePyramid,
    center: tuple[float, float],
    radius: int,
    scales: Collection[str],
) -> dict[str, np.ndarray]:
    """Per-scale maps over every whole-pixel displacement of a box centered
    on the target"""
    height, width = prev.tables.gray.shape
    if cur.tables.gray.shape != (height, width):
        raise ValueError(
            f"Cannot correlate a {width}×{height} frame with a"
            f" {cur.tables.gray.shape[1]}×{cur.tables.gray.shape[0]} one"
        )
    reach = radius * DEEP_STRIDE
    components: dict[str, np.ndarray] = {}
    for scale in SCALES:
        if scale not in scales:
            continue
        stride = STRIDES[scale]
        top = min(max(int(round(center[1] - stride / 2)), 0), height - stride)
        left = min(max(int(round(center[0] - stride / 2)), 0), width - stride)
        descriptor = box_descriptors(
            prev.tables, scale, np.array([top]), np.array([left])
        )[0, 0]
        tops = np.arange(max(top - reach, 0), min(top + reach, height - stride) + 1)
        lefts = np.arange(max(left - reach, 0), min(left + reach, width - stride) + 1)
        components[scale] = window_similarity(
            descriptor,
            box_descriptors(cur.tables, scale, tops, lefts),
            (top - tops[0], left - lefts[0]),
            reach,
        )
    return components


def _lattice_components(
    prev: FeaturePyramid,
    cur: FeaturePyramid,
    center: tuple[float, float],
    radius: int,
    scales: Collection[str],
) -> dict[str, np.ndarray]:
    """Per-scale maps over the cells of each level"""
    components: dict[str, np.ndarray] = {}
    for scale in SCALES:
        if scale not in scales:
            continue
        prev_level = prev.level(scale)
        components[scale] = scale_similarity(
            prev_level,
            cur.level(scale),
            anchor_cell(center, scale, prev_level),
            scale_radius(radius, scale),
        )
    return components


def compute_volume(
    prev: FeaturePyramid,
    cur: FeaturePyramid,
    center: tuple[float, float],
    radius: int = DEFAULT_RADIUS,
    scales: Collection[str] = SCALES,
) -> SimilarityVolume:
    """Build the similarity volume of one target

    Parameters
    ----------
    prev : FeaturePyramid
        The (corrected) pyramid of the previous frame
    cur : FeaturePyramid
        The (corrected) pyramid of the current frame
    center : (float, float)
        The target's center in the previous frame, in pixels
    radius : int, optional
        The search radius in deep cells. Default is 4 (32 pixels).
    scales : collection of str, optional
        The scales to fuse. Must include "deep". Default is all three.

    Returns
    -------
    SimilarityVolume
        The volume. Scales left out of the fusion contribute nothing.

        When both pyramids carry pixel tables, every scale compares the box
        of its cell size centered on the target with the boxes displaced
        from it by each whole number of pixels up to 8R, so all scales share
        one origin and translations off the cell grid still find an exact
        match. The pixel maps are then brought onto the deep lattice with
        `resample_to_deep`. Otherwise each scale is searched over its own
        cells, anchored at the cell holding the center.

    Raises
    ------
    ValueError
        If "deep" isn't among the scales, a scale isn't recognized or the
        pyramids come from frames of different sizes
    """
    if "deep" not in scales:
        raise ValueError("Similarity fusion always needs the deep scale")
    unknown = set(scales) - set(SCALES)
    if unknown:
        raise ValueError(f"Unrecognized scales: {', '.join(sorted(unknown))}")

    size = 2 * radius + 1
    if prev.tables is not None and cur.tables is not None:
        components = _pixel_components(prev, cur, center, radius, scales)
        on_deep = {
            scale: resample_to_deep(component, DEEP_STRIDE)
            for scale, component in components.items()
        }
    else:
        components = _lattice_components(prev, cur, center, radius, scales)
        on_deep = dict(components)
    fused = fuse_similarity(
        on_deep["deep"],
        on_deep.get("mid", np.zeros((size, size))),
        on_deep.get("shallow", np.zeros((size, size))),
    )
    return SimilarityVolume(
        fused,
        components,
        anchor_cell(center, "deep", prev.deep),
        radius,
        tuple(scale for scale in SCALES if scale in scales),
        center,
    )


def fused_similarity_at(
    volume: SimilarityVolume, point: tuple[float, float]
) -> float:
    """Look up the fused similarity at a pixel location of the current frame

    Returns
    -------
    float
        The fused value at the deep displacement nearest the point's offset
        from the target's center, or the lowest possible value (minus the
        number of fused scales) if that's outside the search window
    """
    dx = int(round((point[0] - volume.center[0]) / DEEP_STRIDE))
    dy = int(round((point[1] - volume.center[1]) / DEEP_STRIDE))
    if max(abs(dx), abs(dy)) > volume.radius:
        return -float(len(volume.scales))
    return float(volume.fused[dy + volume.radius, dx + volume.radius])


def format_similarity_map(similarity: np.ndarray, precision: int = 3) -> str:
    """Render a map as whitespace-aligned matrix text (rows are dy, columns
    are dx)"""
    return "\n".join(
        " ".join(f"{value:+.{precision}f}" for value in row) for row in similarity
    ) + "\n"
