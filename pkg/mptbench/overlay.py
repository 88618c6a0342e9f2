"""Drawing tracker output (or ground truth) over a sequence's frames"""
import colorsys
from pathlib import Path

from PIL import Image, ImageDraw

from . import filesystem as fs
from .core import GtRecord, group_by_frame, read_mot_file, read_seqinfo
from .loggers import IMPORTANT, RENDER_LOGGER
from .synthgen import read_frame

_GOLDEN_RATIO_CONJUGATE = 0.618033988749895


def id_color(track_id: int) -> tuple[int, int, int]:
    """A deterministic color per identity, with hues spread by the golden
    ratio so consecutive ids are easy to tell apart"""
    hue = (track_id * _GOLDEN_RATIO_CONJUGATE) % 1.0
    red, green, blue = colorsys.hsv_to_rgb(hue, 0.85, 1.0)
    return round(red * 255), round(green * 255), round(blue * 255)


def draw_records(image: Image.Image, records: list[GtRecord]) -> Image.Image:
    """Draw id-labeled boxes on a copy of an image"""
    annotated = image.copy()
    draw = ImageDraw.Draw(annotated)
    for record in records:
        color = id_color(record.id)
        box = record.box
        corners = (box.x, box.y, max(box.x2 - 1, box.x), max(box.y2 - 1, box.y))
        draw.rectangle(corners, outline=color, width=2)
        draw.text((box.x + 2, max(box.y - 11, 0)), str(record.id), fill=color)
    return annotated


def render_overlay(
    sequence_folder: Path,
    results_file: Path,
    output_folder: Path,
    overwrite: bool = False,
) -> int:
    """Write annotated copies of a sequence's frames

    Parameters
    ----------
    sequence_folder : Path
        The sequence's folder
    results_file : Path
        A MOT-format file (tracker output or ground truth)
    output_folder : Path
        Where to write the annotated frames (named like the originals)
    overwrite : bool, optional
        Whether to write into a non-empty folder. Default is False.

    Returns
    -------
    int
        The number of frames written

    Raises
    ------
    FileNotFoundError
        If the sequence or the results don't exist
    FileExistsError
        If the output folder isn't empty and overwriting wasn't requested
    """
    meta = read_seqinfo(fs.seqinfo_path(sequence_folder))
    records = group_by_frame(read_mot_file(results_file), meta.length)
    fs.ensure_writable_output(output_folder, overwrite=overwrite)
    output_folder.mkdir(parents=True, exist_ok=True)

    for index in range(1, meta.length + 1):
        source = fs.frame_path(sequence_folder, index, meta.im_dir, meta.im_ext)
        frame = read_frame(source, index)
        annotated = draw_records(
            Image.fromarray(frame.pixels, mode="RGB"), records.get(index, [])
        )
        destination = output_folder / source.name
        try:
            annotated.save(destination, format="PNG")
        except OSError as write_fail:
            raise OSError(f"Could not write {destination}") from write_fail
    RENDER_LOGGER.log(
        IMPORTANT, f"Wrote {meta.length} annotated frames to {output_folder}"
    )
    return meta.length
