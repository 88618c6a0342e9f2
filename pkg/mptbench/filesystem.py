"""Functionality for locating the files and folders of a benchmark dataset"""
from pathlib import Path

import semantic_version as semver
from pathvalidate import is_valid_filename

from . import config as cfg
from ._version import get_versions

SPLITS = ("train", "test")

MANIFEST_NAME = "manifest.cfg"

RUN_CONFIG_NAME = "run.cfg"

SEQINFO_NAME = "seqinfo.ini"

GT_FOLDER_NAME = "gt"

GT_FILE_NAME = "gt.txt"

VERSION_KEY = "generated-by-mptbench-version"


def validate_name(name: str, kind: str = "name") -> str:
    """Make sure that a user-supplied name can safely be used as a file or
    folder name

    Parameters
    ----------
    name : str
        The name to check
    kind : str, optional
        What the name is for (used in the error message)

    Returns
    -------
    str
        The name, unchanged

    Raises
    ------
    ValueError
        If the name is not a valid filename on every supported platform
    """
    if not is_valid_filename(name, platform="universal"):
        raise ValueError(f"{name!r} is not a valid {kind}")
    return name


def sequence_name(background_label: str, sequence_index: int) -> str:
    """Generate the name of a sequence from its background label (such as "b3")
    and its 1-indexed position among that background's sequences"""
    return validate_name(
        f"{background_label}-{sequence_index:02d}", kind="sequence name"
    )


def background_label_of(name: str) -> str:
    """Extract the background label (such as "w5") from a sequence name"""
    return name.split("-", 1)[0]


def split_of(sequence_index: int) -> str:
    """Sequences with odd (1-indexed) positions go to training, even ones to
    testing"""
    return SPLITS[0] if sequence_index % 2 == 1 else SPLITS[1]


def resolve_splits(split: str) -> tuple[str, ...]:
    """Turn a split selection ("train", "test" or "all") into the splits
    to visit

    Raises
    ------
    ValueError
        If the selection isn't recognized
    """
    if split == "all":
        return SPLITS
    if split in SPLITS:
        return (split,)
    raise ValueError(f"Unknown split {split!r}. Options are: all, {', '.join(SPLITS)}")


def sequence_root(dataset_root: Path, split: str, name: str) -> Path:
    """Generate the path to the folder of a single sequence

    Notes
    -----
    This method does not check if a sequence exists at that location
    """
    return dataset_root / split / name


def seqinfo_path(sequence_folder: Path) -> Path:
    return sequence_folder / SEQINFO_NAME


def gt_path(sequence_folder: Path) -> Path:
    return sequence_folder / GT_FOLDER_NAME / GT_FILE_NAME


def frame_path(
    sequence_folder: Path, frame_index: int, im_dir: str = "img1", im_ext: str = ".png"
) -> Path:
    """Generate the path to the image file for the given (1-indexed) frame"""
    return sequence_folder / im_dir / f"{frame_index:06d}{im_ext}"


def manifest_path(dataset_root: Path) -> Path:
    return dataset_root / MANIFEST_NAME


def result_path(results_root: Path, name: str) -> Path:
    """Generate the path to the tracker output for the named sequence"""
    return results_root / f"{name}.txt"


def sequence_folders(dataset_root: Path, split: str = "test") -> list[Path]:
    """Find all sequences in a dataset

    Parameters
    ----------
    dataset_root : Path
        The root of the dataset
    split : str, optional
        "train", "test" (default) or "all"

    Returns
    -------
    list of Path
        The folder of every sequence (that is, every folder with a
        seqinfo.ini) in the selected splits, sorted by split and then by name

    Raises
    ------
    FileNotFoundError
        If the dataset root doesn't exist
    """
    if not dataset_root.is_dir():
        raise FileNotFoundError(f"No dataset exists at {dataset_root}")
    folders: list[Path] = []
    for split_name in resolve_splits(split):
        split_folder = dataset_root / split_name
        folders.extend(
            sorted(path.parent for path in split_folder.glob(f"*/{SEQINFO_NAME}"))
        )
    return folders


def ensure_writable_output(output_root: Path, overwrite: bool = False) -> None:
    """Check, before anything is written, that outputs can go into the
    specified folder

    Parameters
    ----------
    output_root : Path
        The folder that will receive outputs
    overwrite : bool, optional
        Whether it's okay to write into a folder that already has contents.
        Default is False.

    Raises
    ------
    FileExistsError
        If the folder is non-empty and overwriting wasn't requested
    NotADirectoryError
        If the path exists and is a file
    """
    if not output_root.exists():
        return
    if not output_root.is_dir():
        raise NotADirectoryError(f"{output_root} is not a directory")
    if not overwrite and any(output_root.iterdir()):
        raise FileExistsError(
            f"{output_root} is not empty. Use --overwrite to write into it anyway."
        )


def is_compatible_dataset(dataset_root: Path) -> bool:
    """Determine whether the dataset was generated by a compatible version of
    this package (same major version and no newer than the running one)

    Parameters
    ----------
    dataset_root : Path
        The root of the dataset

    Returns
    -------
    bool
        False if the manifest's version stamp is incompatible. True if it's
        compatible or if there's no manifest / stamp to check against (a
        hand-assembled dataset, say).
    """
    try:
        manifest = cfg.read_cfg(manifest_path(dataset_root))
    except (FileNotFoundError, ValueError):
        return True
    stamp = manifest.get("properties", VERSION_KEY, fallback=None)
    if not stamp:
        return True
    try:
        generated_by = semver.Version.coerce(stamp)
    except ValueError:
        return False
    running = semver.Version.coerce(get_versions()["version"])
    return generated_by.major == running.major and generated_by <= running
