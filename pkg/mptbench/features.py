"""Three-scale descriptor pyramids and deviation correction"""
import struct
from pathlib import Path
from typing import Collection, NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import Frame

SCALES = ("deep", "mid", "shallow")

STRIDES = {"shallow": 2, "mid": 4, "deep": 8}

ORIENTATION_BINS = 8

DESCRIPTOR_DIM = ORIENTATION_BINS + 3 + 1

DEFAULT_SUPPRESSION = 0.8

DEFAULT_DIFF_THRESHOLD = 25

_GRID_MAGIC = b"MPTF"

_GRID_HEADER = struct.Struct("<4sIII")


class Foreground(NamedTuple):
    """The foreground-only version of a frame

    Parameters
    ----------
    tables : PixelTables
        The tables of the frame with every background pixel blacked out
    mask : (H+1, W+1) array
        The summed-area table of the foreground mask
    suppression : float
        λ, the fraction of a background-only box that gets taken away
    """

    tables: "PixelTables"
    mask: np.ndarray
    suppression: float


class PixelTables(NamedTuple):
    """What it takes to describe a box placed anywhere in a frame, not just on
    the cell grid

    Parameters
    ----------
    linear : (H+1, W+1, 11) array
        The summed-area table of every pixel's histogram votes and colors
    gray : (H, W) array
        The frame's grey levels
    normalized : bool, optional
        Whether box descriptors get normalized the way the pyramid's cells
        were. Default is False.
    foreground : Foreground, optional
        The foreground used to correct the pyramid, if it was corrected
    corrected : tuple of str, optional
        The scales the correction was applied to
    """

    linear: np.ndarray
    gray: np.ndarray
    normalized: bool = False
    foreground: Foreground | None = None
    corrected: tuple[str, ...] = ()


class FeaturePyramid(NamedTuple):
    """Descriptor grids of one frame at three strides

    Parameters
    ----------
    shallow : (ceil(H/2), ceil(W/2), D) array
        Descriptors at stride 2
    mid : (ceil(H/4), ceil(W/4), D) array
        Descriptors at stride 4
    deep : (ceil(H/8), ceil(W/8), D) array
        Descriptors at stride 8
    descriptor_dim : int
        D
    tables : PixelTables, optional
        Lookups for describing off-grid boxes the same way as the cells.
        Pyramids built straight from arrays have none.
    """

    shallow: np.ndarray
    mid: np.ndarray
    deep: np.ndarray
    descriptor_dim: int = DESCRIPTOR_DIM
    tables: PixelTables | None = None

    def level(self, scale: str) -> np.ndarray:
        return getattr(self, scale)


class ResidualPyramid(NamedTuple):
    """Additive corrections, shaped like the pyramid they correct, along with
    the foreground they were predicted from (if known)"""

    shallow: np.ndarray
    mid: np.ndarray
    deep: np.ndarray
    descriptor_dim: int = DESCRIPTOR_DIM
    foreground: Foreground | None = None

    def level(self, scale: str) -> np.ndarray:
        return getattr(self, scale)


def grid_shape(height: int, width: int, stride: int) -> tuple[int, int]:
    """The number of (rows, columns) of cells covering a frame"""
    return -(-height // stride), -(-width // stride)


def _cell_sums(values: np.ndarray, stride: int) -> np.ndarray:
    """Sum an (H, W, ...) array over stride × stride cells, zero-padding the
    bottom and right edges"""
    height, width = values.shape[:2]
    rows, cols = grid_shape(height, width, stride)
    padding = [(0, rows * stride - height), (0, cols * stride - width)]
    padding += [(0, 0)] * (values.ndim - 2)
    padded = np.pad(values, padding)
    return padded.reshape(rows, stride, cols, stride, *values.shape[2:]).sum(
        axis=(1, 3)
    )


def cell_any(mask: np.ndarray, stride: int) -> np.ndarray:
    """Flag the cells containing at least one set pixel"""
    return _cell_sums(mask.astype(np.int64), stride) > 0


def summed_area(values: np.ndarray) -> np.ndarray:
    """The (H+1, W+1, ...) table whose [y, x] entry is the sum of
    values[:y, :x]"""
    table = np.zeros((values.shape[0] + 1, values.shape[1] + 1, *values.shape[2:]))
    table[1:, 1:] = values.cumsum(axis=0).cumsum(axis=1)
    return table


def _orientation_bins(gray: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    grad_y, grad_x = np.gradient(gray)
    magnitude = np.hypot(grad_x, grad_y)
    theta = np.arctan2(grad_y, grad_x)
    bins = np.round(theta / (np.pi / 4)).astype(np.int64) % ORIENTATION_BINS
    return bins, magnitude


def _cell_contrast(gray: np.ndarray, stride: int, counts: np.ndarray) -> np.ndarray:
    """The standard deviation of the grey levels in every cell, taken about the
    cell's own mean"""
    height, width = gray.shape
    cell_means = _cell_sums(gray, stride) / counts
    spread = np.repeat(np.repeat(cell_means, stride, axis=0), stride, axis=1)
    deviations = (gray - spread[:height, :width]) ** 2
    return np.sqrt(_cell_sums(deviations, stride) / counts)


def extract_pyramid(frame: Frame) -> FeaturePyramid:
    """Compute the descriptor pyramid of a frame

    Parameters
    ----------
    frame : Frame
        The frame

    Returns
    -------
    FeaturePyramid
        At each stride, every cell gets a 12-dimensional descriptor:

          - an 8-bin signed gradient-orientation histogram (magnitude
            weighted, averaged over the cell's pixels)
          - the cell's mean red, green and blue (scaled to [0, 1])
          - the standard deviation of the cell's grey levels (local contrast)

        The pyramid also carries the frame's `PixelTables`.

    Raises
    ------
    ValueError
        If the frame is smaller than a single deep (stride 8) cell
    """
    height, width = frame.height, frame.width
    if height < STRIDES["deep"] or width < STRIDES["deep"]:
        raise ValueError(
            f"A {width}×{height} frame is smaller than a single"
            f" {STRIDES['deep']}×{STRIDES['deep']} cell"
        )
    rgb = frame.pixels.astype(float) / 255.0
    gray = rgb.mean(axis=2)
    bins, magnitude = _orientation_bins(gray)

    histogram_input = np.zeros((height, width, ORIENTATION_BINS))
    np.put_along_axis(histogram_input, bins[..., None], magnitude[..., None], axis=2)
    per_pixel = np.concatenate((histogram_input, rgb), axis=2)
    ones = np.ones((height, width))

    levels: dict[str, np.ndarray] = {}
    for scale, stride in STRIDES.items():
        counts = _cell_sums(ones, stride)
        means = _cell_sums(per_pixel, stride) / counts[..., None]
        contrast = _cell_contrast(gray, stride, counts)
        levels[scale] = np.concatenate((means, contrast[..., None]), axis=2)
    return FeaturePyramid(**levels, tables=PixelTables(summed_area(per_pixel), gray))


def _box_sums(
    table: np.ndarray, tops: np.ndarray, lefts: np.ndarray, size: int
) -> np.ndarray:
    bottoms, rights = tops + size, lefts + size
    return (
        table[bottoms, rights]
        - table[tops, rights]
        - table[bottoms, lefts]
        + table[tops, lefts]
    )


def _raw_box_descriptors(
    tables: PixelTables, stride: int, tops: np.ndarray, lefts: np.ndarray
) -> np.ndarray:
    rows, cols = tops[:, None], lefts[None, :]
    means = _box_sums(tables.linear, rows, cols, stride) / stride**2
    patches = sliding_window_view(tables.gray, (stride, stride))[rows, cols]
    return np.concatenate((means, patches.std(axis=(-2, -1))[..., None]), axis=-1)


def box_descriptors(
    tables: PixelTables, scale: str, tops: np.ndarray, lefts: np.ndarray
) -> np.ndarray:
    """Describe the boxes of a scale's cell size at arbitrary pixel positions

    Parameters
    ----------
    tables : PixelTables
        The frame's tables
    scale : str
        Which cell size to use
    tops, lefts : 1D int arrays
        The top rows and left columns of the boxes. Every box must lie
        inside the frame.

    Returns
    -------
    (len(tops), len(lefts), D) array
        The descriptor of the box at (tops[i], lefts[j]), computed and then
        normalized or corrected exactly as a cell of the pyramid the tables
        came with. A box covering a whole cell gets that cell's descriptor.
    """
    stride = STRIDES[scale]
    raw = _raw_box_descriptors(tables, stride, tops, lefts)
    if not tables.normalized:
        return raw
    foreground = tables.foreground
    if foreground is None or scale not in tables.corrected:
        return normalize_cells(raw)
    masked = _raw_box_descriptors(foreground.tables, stride, tops, lefts)
    has_foreground = (
        _box_sums(foreground.mask, tops[:, None], lefts[None, :], stride) > 0
    )[..., None]
    return _corrected_cells(
        raw, np.where(has_foreground, masked - raw, -foreground.suppression * raw)
    )


def foreground_mask(
    frame: Frame,
    background_model: Frame,
    diff_threshold: float = DEFAULT_DIFF_THRESHOLD,
) -> np.ndarray:
    """Flag the pixels where any channel differs from the background model by
    more than the threshold

    Raises
    ------
    ValueError
        If the frame and the background model have different dimensions
    """
    if frame.pixels.shape != background_model.pixels.shape:
        raise ValueError(
            f"Frame is {frame.width}×{frame.height} but the background model"
            f" is {background_model.width}×{background_model.height}"
        )
    difference = np.abs(
        frame.pixels.astype(np.int16) - background_model.pixels.astype(np.int16)
    )
    return difference.max(axis=2) > diff_threshold


def predict_residual(
    frame: Frame,
    pyramid: FeaturePyramid,
    background_model: Frame,
    suppression: float = DEFAULT_SUPPRESSION,
    diff_threshold: float = DEFAULT_DIFF_THRESHOLD,
) -> ResidualPyramid:
    """Predict the correction that pulls a pyramid's attention toward the
    foreground

    Parameters
    ----------
    frame : Frame
        The frame the pyramid was extracted from
    pyramid : FeaturePyramid
        The pyramid to correct
    background_model : Frame
        An estimate of the static background, the same size as the frame
    suppression : float, optional
        λ in [0, 1]: how strongly cells with no foreground are pushed toward
        zero. Default is 0.8.
    diff_threshold : float, optional
        The grey-level difference above which a pixel counts as foreground.
        Default is 25.

    Returns
    -------
    ResidualPyramid
        For cells containing foreground, the descriptors of the
        foreground-only (masked) frame minus the pyramid's descriptors. For
        all other cells, -λ × the pyramid's descriptors.

    Raises
    ------
    ValueError
        If the frame, the background model and the pyramid disagree on
        dimensions, or if λ is out of range
    """
    if not 0 <= suppression <= 1:
        raise ValueError(f"Suppression factor {suppression} is not in [0, 1]")
    mask = foreground_mask(frame, background_model, diff_threshold)
    for scale in SCALES:
        expected = grid_shape(frame.height, frame.width, STRIDES[scale])
        if pyramid.level(scale).shape[:2] != expected:
            raise ValueError(
                f"The {scale} level of the pyramid doesn't match a"
                f" {frame.width}×{frame.height} frame"
            )

    masked = extract_pyramid(Frame(frame.index, frame.pixels * mask[..., None]))
    levels: dict[str, np.ndarray] = {}
    for scale in SCALES:
        source = pyramid.level(scale)
        has_foreground = cell_any(mask, STRIDES[scale])[..., None]
        levels[scale] = np.where(
            has_foreground, masked.level(scale) - source, -suppression * source
        )
    return ResidualPyramid(
        **levels,
        descriptor_dim=pyramid.descriptor_dim,
        foreground=Foreground(
            masked.tables, summed_area(mask.astype(float)), suppression
        ),
    )


def normalize_cells(grid: np.ndarray) -> np.ndarray:
    """L2-normalize every descriptor of a grid (zero vectors stay zero)"""
    norms = np.linalg.norm(grid, axis=-1, keepdims=True)
    return np.divide(grid, norms, out=np.zeros_like(grid), where=norms > 0)


def normalize_pyramid(pyramid: FeaturePyramid) -> FeaturePyramid:
    tables = pyramid.tables
    if tables is not None:
        tables = tables._replace(normalized=True, foreground=None, corrected=())
    return FeaturePyramid(
        *(normalize_cells(pyramid.level(scale)) for scale in STRIDES),
        descriptor_dim=pyramid.descriptor_dim,
        tables=tables,
    )


def _corrected_cells(source: np.ndarray, correction: np.ndarray) -> np.ndarray:
    """Unit-length directions of source + correction, scaled by the fraction
    of each cell's energy the correction leaves in place (capped at 1)"""
    corrected = source + correction
    before = np.linalg.norm(source, axis=-1, keepdims=True)
    after = np.linalg.norm(corrected, axis=-1, keepdims=True)
    kept = np.divide(after, before, out=np.ones_like(after), where=before > 0)
    return normalize_cells(corrected) * np.minimum(kept, 1.0) ** 2


def correct_deviation(
    pyramid: FeaturePyramid,
    residual: ResidualPyramid,
    scales: Collection[str] = SCALES,
) -> FeaturePyramid:
    """Apply a residual to a pyramid

    Parameters
    ----------
    pyramid : FeaturePyramid
        The main descriptors
    residual : ResidualPyramid
        The predicted correction
    scales : collection of str, optional
        Which levels to correct. Uncorrected levels are just normalized.
        Default is all three.

    Returns
    -------
    FeaturePyramid
        Each cell of pyramid + residual, L2-normalized and then scaled by
        min(1, |p + r| / |p|)², the share of the cell's energy that survives
        the correction. With a zero residual this is plain L2
        normalization, a cell whose residual cancels it comes out as zero
        and a background cell suppressed by λ ends up with norm (1 - λ)².

        The pixel tables are carried over when the residual knows the
        foreground it came from, so that off-grid boxes get corrected the
        same way.

    Raises
    ------
    ValueError
        If the residual's shape doesn't match the pyramid's
    """
    levels: dict[str, np.ndarray] = {}
    for scale in STRIDES:
        source = pyramid.level(scale)
        correction = residual.level(scale)
        if source.shape != correction.shape:
            raise ValueError(
                f"{scale} residual has shape {correction.shape},"
                f" but the pyramid has shape {source.shape}"
            )
        if scale in scales:
            levels[scale] = _corrected_cells(source, correction)
        else:
            levels[scale] = normalize_cells(source)

    tables = None
    if pyramid.tables is not None and residual.foreground is not None:
        tables = pyramid.tables._replace(
            normalized=True,
            foreground=residual.foreground,
            corrected=tuple(scale for scale in SCALES if scale in scales),
        )
    return FeaturePyramid(
        **levels, descriptor_dim=pyramid.descriptor_dim, tables=tables
    )


def dump_descriptor_grid(path: Path, grid: np.ndarray) -> None:
    """Write a descriptor grid as a flat binary file: a 16-byte header
    (b"MPTF", then rows, columns and D as little-endian uint32) followed by
    the float32 descriptors in row-major order"""
    rows, cols, dim = grid.shape
    try:
        with path.open("wb") as grid_file:
            grid_file.write(_GRID_HEADER.pack(_GRID_MAGIC, rows, cols, dim))
            grid_file.write(np.ascontiguousarray(grid, dtype="<f4").tobytes())
    except OSError as write_fail:
        raise OSError(f"Could not write {path}") from write_fail


def load_descriptor_grid(path: Path) -> np.ndarray:
    """Read a descriptor grid written by `dump_descriptor_grid`

    Raises
    ------
    ValueError
        If the file isn't a descriptor grid or is truncated
    """
    contents = path.read_bytes()
    if len(contents) < _GRID_HEADER.size:
        raise ValueError(f"{path} is too short to be a descriptor grid")
    magic, rows, cols, dim = _GRID_HEADER.unpack_from(contents)
    if magic != _GRID_MAGIC:
        raise ValueError(f"{path} is not a descriptor grid")
    data = np.frombuffer(contents, dtype="<f4", offset=_GRID_HEADER.size)
    if data.size != rows * cols * dim:
        raise ValueError(f"{path} is truncated")
    return data.reshape(rows, cols, dim).astype(float)
