"""Detection sources: ground truth corrupted with controlled noise, and
background subtraction"""
from pathlib import Path
from typing import Any, NamedTuple, Sequence

import numpy as np
from scipy import ndimage

from .. import config as cfg
from ..core import BoundingBox, Detection, Frame, GtRecord
from ..features import DEFAULT_DIFF_THRESHOLD, foreground_mask

SECTION_NAME = "detector"

DETECTOR_KINDS = ("oracle", "blob")

# side lengths of spurious boxes, in pixels
_SPURIOUS_SIZE_RANGE = (8.0, 40.0)


class DetectorConfig(NamedTuple):
    """The knobs of the detection sources

    Parameters
    ----------
    kind : str
        "oracle" (noisy ground truth) or "blob" (background subtraction)
    p_fn : float
        The probability that a ground-truth box is missed
    p_fp : float
        The mean number of spurious boxes per frame
    jitter_sigma : float
        The standard deviation of the Gaussian noise added to each corner of
        a kept box, in pixels
    score_sigma : float
        Kept boxes score clip(1 - |N(0, score_sigma)|, 0.5, 1). At the
        default of 0, every kept box scores 1.
    false_score_range : (float, float)
        Spurious boxes score uniformly within this range
    diff_threshold : float
        The difference from the background model above which a pixel is
        foreground (blob detector)
    min_area : int
        The smallest connected component reported, in pixels (blob detector)
    score_scale : float
        Blob scores are min(1, mean difference / score_scale)
    """

    kind: str = "oracle"
    p_fn: float = 0.1
    p_fp: float = 0.5
    jitter_sigma: float = 1.0
    score_sigma: float = 0.0
    false_score_range: tuple[float, float] = (0.05, 0.45)
    diff_threshold: float = DEFAULT_DIFF_THRESHOLD
    min_area: int = 9
    score_scale: float = 64.0

    def validate(self) -> "DetectorConfig":
        """Check the configuration

        Raises
        ------
        ValueError
            If any value is out of bounds
        """
        if self.kind not in DETECTOR_KINDS:
            raise ValueError(
                f"Unknown detector {self.kind!r}."
                f" Choose one of: {', '.join(DETECTOR_KINDS)}"
            )
        if not 0 <= self.p_fn <= 1:
            raise ValueError("p_fn must be in [0, 1]")
        if self.p_fp < 0:
            raise ValueError("p_fp cannot be negative")
        if self.jitter_sigma < 0 or self.score_sigma < 0:
            raise ValueError("Noise levels cannot be negative")
        low, high = self.false_score_range
        if not 0 <= low <= high <= 1:
            raise ValueError("false_score_range must be an ordered range in [0, 1]")
        if self.min_area < 1:
            raise ValueError("min_area must be at least 1")
        if self.score_scale <= 0:
            raise ValueError("score_scale must be positive")
        return self

    @classmethod
    def from_cfg(cls, config_file: Path, **overrides) -> "DetectorConfig":
        """Read the [detector] section of a run config, with any explicit
        overrides applied on top

        Raises
        ------
        FileNotFoundError
            If the config file doesn't exist
        ValueError
            If a setting can't be parsed
        """
        sections = cfg.read_sections(config_file)
        try:
            return cls.from_mapping(sections.get(SECTION_NAME, {}), **overrides)
        except ValueError as bad_value:
            raise ValueError(
                f"Invalid [{SECTION_NAME}] in {config_file}"
            ) from bad_value

    @classmethod
    def from_mapping(cls, section: dict[str, str], **overrides) -> "DetectorConfig":
        """Parse a configuration from INI-style string entries

        Raises
        ------
        ValueError
            If a key is unrecognized or a value can't be parsed
        """
        parsers: dict[str, Any] = {
            "kind": str,
            "p_fn": float,
            "p_fp": float,
            "jitter_sigma": float,
            "score_sigma": float,
            "false_score_range": cfg.parse_ini_range,
            "diff_threshold": float,
            "min_area": int,
            "score_scale": float,
        }
        values: dict[str, Any] = {}
        for key, entry in section.items():
            field_name = key.replace("-", "_")
            if field_name not in parsers:
                raise ValueError(f"Unrecognized detector setting: {key}")
            values[field_name] = parsers[field_name](entry)
        values.update(
            {key: value for key, value in overrides.items() if value is not None}
        )
        return cls(**values).validate()


def _spurious_box(
    rng: np.random.Generator, frame_size: tuple[int, int]
) -> BoundingBox:
    width, height = frame_size
    w, h = (
        min(float(side), limit)
        for side, limit in zip(rng.uniform(*_SPURIOUS_SIZE_RANGE, 2), frame_size)
    )
    x = rng.uniform(0, width - w)
    y = rng.uniform(0, height - h)
    return BoundingBox(x, y, w, h)


def _jitter(
    box: BoundingBox,
    rng: np.random.Generator,
    sigma: float,
    width: int,
    height: int,
) -> BoundingBox | None:
    x1, y1, x2, y2 = np.array((box.x, box.y, box.x2, box.y2)) + rng.normal(
        0.0, sigma, 4
    )
    x1, x2 = sorted((x1, x2))
    y1, y2 = sorted((y1, y2))
    return BoundingBox.from_xyxy(x1, y1, max(x2, x1 + 1), max(y2, y1 + 1)).clip(
        width, height
    )


def oracle_noise_detector(
    gt_frame_records: Sequence[GtRecord],
    rng: np.random.Generator,
    config: DetectorConfig = DetectorConfig(),
    frame_size: tuple[int, int] = (640, 480),
    frame_index: int | None = None,
) -> list[Detection]:
    """Synthesize one frame's detections by corrupting its ground truth

    Parameters
    ----------
    gt_frame_records : list-like of GtRecord
        The ground truth of the frame
    rng : Generator
        The random stream (one per sequence, so runs are reproducible)
    config : DetectorConfig, optional
        The noise settings
    frame_size : (int, int), optional
        The (width, height) of the frame. Default is 640×480.
    frame_index : int, optional
        The frame number, if the frame holds no ground truth to take it from.
        Defaults to the records' frame (or 1).

    Returns
    -------
    list of Detection
        Each ground-truth box, kept with probability 1 - p_fn and its corners
        jittered, followed by Poisson(p_fp) spurious boxes placed uniformly in
        the frame. Boxes jittered entirely out of the frame are dropped.
    """
    if frame_index is None:
        frame_index = gt_frame_records[0].frame if gt_frame_records else 1
    width, height = frame_size
    detections: list[Detection] = []
    for record in sorted(gt_frame_records, key=lambda record: record.id):
        if rng.random() < config.p_fn:
            continue
        box: BoundingBox | None = record.box
        if config.jitter_sigma > 0:
            box = _jitter(record.box, rng, config.jitter_sigma, width, height)
        score = float(np.clip(1 - abs(rng.normal(0.0, config.score_sigma)), 0.5, 1))
        if box is not None:
            detections.append(Detection(box, score, frame_index))

    for _ in range(rng.poisson(config.p_fp)):
        box = _spurious_box(rng, frame_size)
        score = float(rng.uniform(*config.false_score_range))
        detections.append(Detection(box, score, frame_index))
    return detections


def blob_detector(
    frame: Frame,
    background_model: Frame,
    config: DetectorConfig = DetectorConfig(kind="blob"),
) -> list[Detection]:
    """Detect whatever differs from the background model

    Parameters
    ----------
    frame : Frame
        The frame to search
    background_model : Frame
        An estimate of the static background
    config : DetectorConfig, optional
        The threshold, minimum area and score scale

    Returns
    -------
    list of Detection
        The bounding box of every 8-connected foreground component covering
        at least min_area pixels, scored by its mean difference from the
        background, in label order

    Raises
    ------
    ValueError
        If the frame and the background model have different dimensions
    """
    mask = foreground_mask(frame, background_model, config.diff_threshold)
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    if count == 0:
        return []
    difference = np.abs(
        frame.pixels.astype(np.int16) - background_model.pixels.astype(np.int16)
    ).max(axis=2)
    index = np.arange(1, count + 1)
    areas = ndimage.sum_labels(mask, labels, index)
    mean_differences = ndimage.mean(difference, labels, index)

    frame_index = max(frame.index, 1)
    detections: list[Detection] = []
    for label, extent in enumerate(ndimage.find_objects(labels), start=1):
        if extent is None or areas[label - 1] < config.min_area:
            continue
        rows, cols = extent
        box = BoundingBox.from_xyxy(cols.start, rows.start, cols.stop, rows.stop)
        score = min(1.0, float(mean_differences[label - 1]) / config.score_scale)
        detections.append(Detection(box, score, frame_index))
    return detections
