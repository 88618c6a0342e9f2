"""Shared geometry, identifiers and MOTChallenge-format I/O"""
import math
from collections import defaultdict
from dataclasses import dataclass
from io import StringIO
from pathlib import Path
from typing import Iterable, NamedTuple, TextIO

import numpy as np

from . import config as cfg

SPECIES: tuple[str, ...] = (
    "Ceratium furca",
    "Gymnodinium",
    "Ceratium",
    "Anabaena",
    "Copepoda",
    "Copepod nauplii",
    "Coscinodiscus",
    "Chaetoceros",
    "Odontella",
    "Leptocylindru",
    "Paralia sulcata",
    "Melosira",
    "Pseudo-nitzschia",
    "Asterionella",
    "Guinardia",
    "Protoperidinium",
    "Pleurosigma",
    "Bellerochea",
    "Thalassiosira",
    "Stephanopyxis",
    "Ditylum",
    "Entomoneis",
    "Akashiwo sanguinea",
    "Rhizosolenia",
    "Biddulphia",
    "Triceratium",
    "Hemiaulus",
)

UNKNOWN_CLASS = 0

DEFAULT_FPS = 25


class MotParseError(ValueError):
    """Raised when a line of a MOT-format file cannot be parsed

    Parameters
    ----------
    message : str
        What went wrong
    line_number : int
        The (1-indexed) line of the file where the problem was found
    """

    def __init__(self, message: str, line_number: int):
        super().__init__(f"Line {line_number}: {message}")
        self.line_number = line_number


class MotValidationError(ValueError):
    """Raised when MOT records parse but are not a valid record set"""


def species_name(class_id: int) -> str:
    """Look up the species name for a 1-indexed class ID

    Parameters
    ----------
    class_id : int
        The class ID. 0 means "unknown".

    Returns
    -------
    str
        The species name (or "unknown")

    Raises
    ------
    ValueError
        If the class ID is out of range
    """
    if class_id == UNKNOWN_CLASS:
        return "unknown"
    if not 1 <= class_id <= len(SPECIES):
        raise ValueError(f"Class ID {class_id} is not in [1, {len(SPECIES)}]")
    return SPECIES[class_id - 1]


class Frame(NamedTuple):
    """A single video frame

    Parameters
    ----------
    index : int
        The 1-indexed position of the frame in its sequence (0 is used for
        frames that aren't part of a sequence, such as backgrounds)
    pixels : (H, W, 3) uint8 array
        The RGB raster
    """

    index: int
    pixels: np.ndarray

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])


@dataclass(frozen=True)
class BoundingBox:
    """An axis-aligned box in pixel coordinates

    Parameters
    ----------
    x : float
        The left edge
    y : float
        The top edge
    w : float
        The width (must be positive)
    h : float
        The height (must be positive)

    Notes
    -----
    Coordinates are kept as reals. They're only rounded when written to file.
    """

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not all(math.isfinite(value) for value in (self.x, self.y, self.w, self.h)):
            raise ValueError(f"Box coordinates must be finite: {self}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"Box must have positive width and height: {self}")

    @classmethod
    def from_xyxy(cls, x1: float, y1: float, x2: float, y2: float) -> "BoundingBox":
        """Create a box from its corners"""
        return cls(float(x1), float(y1), float(x2 - x1), float(y2 - y1))

    @classmethod
    def from_center(cls, cx: float, cy: float, w: float, h: float) -> "BoundingBox":
        """Create a box from its center and size"""
        return cls(float(cx - w / 2), float(cy - h / 2), float(w), float(h))

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> tuple[float, float]:
        return self.x + self.w / 2, self.y + self.h / 2

    def translate(self, dx: float, dy: float) -> "BoundingBox":
        """Shift the box by the given offset"""
        return BoundingBox(self.x + dx, self.y + dy, self.w, self.h)

    def clip(self, width: float, height: float) -> "BoundingBox | None":
        """Clip the box to the frame [0, width) x [0, height)

        Returns
        -------
        BoundingBox or None
            The clipped box, or None if nothing of the box is left inside
            the frame
        """
        x1, y1 = max(self.x, 0.0), max(self.y, 0.0)
        x2, y2 = min(self.x2, float(width)), min(self.y2, float(height))
        if x2 <= x1 or y2 <= y1:
            return None
        return BoundingBox.from_xyxy(x1, y1, x2, y2)


@dataclass(frozen=True)
class Detection:
    """A scored box reported by a detector

    Parameters
    ----------
    box : BoundingBox
        The detected box
    score : float
        The detection confidence, in [0, 1]
    frame : int
        The 1-indexed frame of the detection
    """

    box: BoundingBox
    score: float
    frame: int

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"Detection score {self.score} is not in [0, 1]")
        if self.frame < 1:
            raise ValueError(f"Frame index {self.frame} must be at least 1")


class GtRecord(NamedTuple):
    """A single line of a MOT-format ground-truth or results file

    Parameters
    ----------
    frame : int
        The 1-indexed frame
    id : int
        The identity (≥ 1)
    box : BoundingBox
        The box
    conf : float, optional
        For ground truth, 1 if the record should be scored. For tracker
        output, the track score. Default is 1.
    class_id : int, optional
        The 1-indexed species, or 0 if unknown (written to file as -1).
        Default is 0.
    visibility : float, optional
        The unoccluded fraction of the object, in [0, 1]. Default is 1.
    """

    frame: int
    id: int
    box: BoundingBox
    conf: float = 1.0
    class_id: int = UNKNOWN_CLASS
    visibility: float = 1.0


class SequenceMeta(NamedTuple):
    """Metadata describing a single sequence

    Parameters
    ----------
    name : str
        The sequence name (also the name of its folder)
    fps : int
        The frame rate
    width : int
        The frame width in pixels
    height : int
        The frame height in pixels
    length : int
        The number of frames
    background_id : int
        Which of the background presets the sequence was rendered over
    im_dir : str, optional
        The name of the image folder. Default is "img1".
    im_ext : str, optional
        The image file extension. Default is ".png".
    """

    name: str
    fps: int
    width: int
    height: int
    length: int
    background_id: int
    im_dir: str = "img1"
    im_ext: str = ".png"


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes

    Parameters
    ----------
    a, b : BoundingBox
        The boxes to compare

    Returns
    -------
    float
        The ratio of the intersection area to the union area, in [0, 1]
    """
    inter_w = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    inter_h = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if inter_w <= 0 or inter_h <= 0:
        return 0.0
    inter = inter_w * inter_h
    return inter / (a.w * a.h + b.w * b.h - inter)


def boxes_to_array(boxes: Iterable[BoundingBox]) -> np.ndarray:
    """Stack boxes into an (N, 4) array of (x, y, w, h)"""
    array = np.array([(box.x, box.y, box.w, box.h) for box in boxes], dtype=float)
    return array.reshape(-1, 4)


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise intersection over union of two stacks of boxes

    Parameters
    ----------
    a : (N, 4) array
        Boxes as (x, y, w, h) rows
    b : (M, 4) array
        Boxes as (x, y, w, h) rows

    Returns
    -------
    (N, M) array
        The IoU of every pair, computed with the same operation order as
        `iou` (so the values agree exactly)
    """
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    ax, ay, aw, ah = (a[:, i : i + 1] for i in range(4))
    bx, by, bw, bh = (b[None, :, i] for i in range(4))
    inter_w = np.minimum(ax + aw, bx + bw) - np.maximum(ax, bx)
    inter_h = np.minimum(ay + ah, by + bh) - np.maximum(ay, by)
    overlapping = (inter_w > 0) & (inter_h > 0)
    inter = np.where(overlapping, inter_w * inter_h, 0.0)
    union = aw * ah + bw * bh - inter
    return np.where(overlapping, inter / union, 0.0)


def _parse_int(token: str, field: str, line_number: int) -> int:
    try:
        value = float(token)
    except ValueError as not_a_number:
        raise MotParseError(
            f"{field} {token!r} is not a number", line_number
        ) from not_a_number
    if not value.is_integer():
        raise MotParseError(f"{field} {token!r} is not an integer", line_number)
    return int(value)


def _parse_real(token: str, field: str, line_number: int) -> float:
    try:
        value = float(token)
    except ValueError as not_a_number:
        raise MotParseError(
            f"{field} {token!r} is not a number", line_number
        ) from not_a_number
    if not math.isfinite(value):
        raise MotParseError(f"{field} {token!r} is not finite", line_number)
    return value


def parse_mot_file(text: str | TextIO) -> list[GtRecord]:
    """Parse the contents of a MOT-format file

    Parameters
    ----------
    text : str or file-like
        The file contents. Each non-blank line must have at least six
        comma-separated numeric fields: frame, id, x, y, w, h, and then,
        optionally, conf, class and visibility. The class is a species
        index (1-27), or 0 or -1 for unknown.

    Returns
    -------
    list of GtRecord
        The records, sorted by (frame, id)

    Raises
    ------
    MotParseError
        If a line cannot be parsed
    MotValidationError
        If a (frame, id) pair appears more than once
    """
    lines = text.splitlines() if isinstance(text, str) else text.read().splitlines()

    records: list[GtRecord] = []
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = [field.strip() for field in line.split(",")]
        if len(fields) < 6:
            raise MotParseError(
                f"expected at least 6 fields, found {len(fields)}", line_number
            )
        frame = _parse_int(fields[0], "frame", line_number)
        identity = _parse_int(fields[1], "id", line_number)
        if frame < 1:
            raise MotParseError(f"frame {frame} must be at least 1", line_number)
        if identity < 1:
            raise MotParseError(f"id {identity} must be at least 1", line_number)
        x, y, w, h = (
            _parse_real(token, name, line_number)
            for token, name in zip(fields[2:6], ("x", "y", "w", "h"))
        )
        try:
            box = BoundingBox(x, y, w, h)
        except ValueError as bad_box:
            raise MotParseError(str(bad_box), line_number) from bad_box

        conf = _parse_real(fields[6], "conf", line_number) if len(fields) > 6 else 1.0
        class_id = (
            _parse_int(fields[7], "class", line_number) if len(fields) > 7 else -1
        )
        if class_id == -1:
            class_id = UNKNOWN_CLASS
        elif class_id != UNKNOWN_CLASS and not 1 <= class_id <= len(SPECIES):
            raise MotParseError(
                f"class {class_id} is not in [1, {len(SPECIES)}]", line_number
            )
        visibility = (
            _parse_real(fields[8], "visibility", line_number)
            if len(fields) > 8
            else 1.0
        )
        if not 0.0 <= visibility <= 1.0:
            raise MotParseError(
                f"visibility {visibility} is not in [0, 1]", line_number
            )
        records.append(GtRecord(frame, identity, box, conf, class_id, visibility))

    records.sort(key=lambda record: (record.frame, record.id))
    for previous, record in zip(records, records[1:]):
        if (previous.frame, previous.id) == (record.frame, record.id):
            raise MotValidationError(
                f"Duplicate record for id {record.id} in frame {record.frame}"
            )
    return records


def _round_half_up(value: float) -> int:
    return math.floor(value + 0.5)


def format_real(value: float) -> str:
    """Render a real number with up to six decimals, trailing zeros stripped"""
    rendered = f"{value:.6f}".rstrip("0").rstrip(".")
    return "0" if rendered in ("-0", "") else rendered


def serialize_mot_file(records: Iterable[GtRecord]) -> str:
    """Render records in the MOT text format

    Parameters
    ----------
    records : list-like of GtRecord
        The records to write

    Returns
    -------
    str
        One line per record, ordered by (frame, id). Box fields are rounded
        half-up to integer pixels (with a minimum size of one pixel), an
        unknown class is written as -1 and reals get up to six decimals.
    """
    buffer = StringIO()
    for record in sorted(records, key=lambda record: (record.frame, record.id)):
        box = record.box
        fields = (
            str(record.frame),
            str(record.id),
            str(_round_half_up(box.x)),
            str(_round_half_up(box.y)),
            str(max(_round_half_up(box.w), 1)),
            str(max(_round_half_up(box.h), 1)),
            format_real(record.conf),
            str(record.class_id if record.class_id != UNKNOWN_CLASS else -1),
            format_real(record.visibility),
        )
        buffer.write(",".join(fields) + "\n")
    return buffer.getvalue()


def read_mot_file(path: Path) -> list[GtRecord]:
    """Read and parse a MOT-format file

    Raises
    ------
    FileNotFoundError
        If there is no file at the specified location
    MotParseError, MotValidationError
        If the contents are invalid. The path is added to the message.
    """
    try:
        text = path.read_text()
    except FileNotFoundError as not_found:
        raise FileNotFoundError(f"Could not open {path}") from not_found
    try:
        return parse_mot_file(text)
    except MotParseError as bad_line:
        raise MotParseError(f"{path}: {bad_line}", bad_line.line_number) from bad_line
    except MotValidationError as invalid:
        raise MotValidationError(f"{path}: {invalid}") from invalid


def write_mot_file(path: Path, records: Iterable[GtRecord]) -> None:
    """Serialize records and write them to file (LF line endings)"""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="\n") as mot_file:
            mot_file.write(serialize_mot_file(records))
    except OSError as write_fail:
        raise OSError(f"Could not write {path}") from write_fail


def group_by_frame(
    records: Iterable[GtRecord], length: int | None = None
) -> dict[int, list[GtRecord]]:
    """Bucket records by frame

    Parameters
    ----------
    records : list-like of GtRecord
        The records to group
    length : int, optional
        If provided, every frame from 1 to `length` will have an entry (even
        if it's empty)

    Returns
    -------
    dict of int to list of GtRecord
        The records in each frame, sorted by id
    """
    grouped: dict[int, list[GtRecord]] = defaultdict(list)
    if length is not None:
        for frame in range(1, length + 1):
            grouped[frame] = []
    for record in sorted(records, key=lambda record: (record.frame, record.id)):
        grouped[record.frame].append(record)
    return dict(sorted(grouped.items()))


def dumps_seqinfo(meta: SequenceMeta) -> str:
    """Render a seqinfo.ini file

    Notes
    -----
    The keys follow the MOTChallenge convention (camelCase), plus a
    `backgroundId` entry
    """
    config = cfg.get_configurator()
    config.add_section("Sequence")
    entries = {
        "name": meta.name,
        "imDir": meta.im_dir,
        "frameRate": meta.fps,
        "seqLength": meta.length,
        "imWidth": meta.width,
        "imHeight": meta.height,
        "imExt": meta.im_ext,
        "backgroundId": meta.background_id,
    }
    for key, value in entries.items():
        config.set("Sequence", key, cfg.to_ini_value(value))
    buffer = StringIO()
    config.write(buffer)
    return buffer.getvalue()


def read_seqinfo(path: Path) -> SequenceMeta:
    """Parse a seqinfo.ini file

    Raises
    ------
    FileNotFoundError
        If there is no file at the specified location
    ValueError
        If the file cannot be parsed or is missing required entries
    """
    config = cfg.read_cfg(path)
    try:
        section = config["Sequence"]
        return SequenceMeta(
            name=section["name"],
            fps=int(section["frameRate"]),
            width=int(section["imWidth"]),
            height=int(section["imHeight"]),
            length=int(section["seqLength"]),
            background_id=int(section.get("backgroundId", "0")),
            im_dir=section.get("imDir", "img1"),
            im_ext=section.get("imExt", ".png"),
        )
    except KeyError as missing:
        raise ValueError(f"{path} is missing the entry {missing}") from missing
