"""Rendering scores as aligned tables and machine-readable report files"""
import math
from pathlib import Path
from typing import Any, Sequence

from . import config as cfg
from .metrics import EvalReport, SequenceScore

COLUMNS = ("MOTA", "IDF1", "IDs", "FP", "FN")

REPORT_CONFIG_NAME = "report.cfg"

REPORT_TABLE_NAME = "report.txt"

BLANK = "-"


def format_percentage(value: float, blank_nonpositive: bool = False) -> str:
    """Render a ratio as a percentage with one decimal

    Parameters
    ----------
    value : float
        The ratio
    blank_nonpositive : bool, optional
        Whether values ≤ 0 are rendered as "-" (used for MOTA). Default is
        False.

    Returns
    -------
    str
        The formatted value. NaN is always rendered as "-".
    """
    if math.isnan(value) or (blank_nonpositive and value <= 0):
        return BLANK
    return f"{100 * value:.1f}"


def table_row(score: SequenceScore) -> tuple[str, ...]:
    return (
        format_percentage(score.mota, blank_nonpositive=True),
        format_percentage(score.idf1),
        str(score.idsw),
        str(score.fp),
        str(score.fn),
    )


def format_table(
    rows: Sequence[tuple[str, SequenceScore]], label_header: str = ""
) -> str:
    """Lay out labeled scores as a whitespace-aligned table

    Parameters
    ----------
    rows : list of (str, SequenceScore)
        The label and the scores of each row
    label_header : str, optional
        The header of the label column

    Returns
    -------
    str
        The table, with columns MOTA, IDF1, IDs, FP and FN. Ratios are
        percentages, and a MOTA of zero or less is rendered as "-".
    """
    cells = [(label_header, *COLUMNS)] + [
        (label, *table_row(score)) for label, score in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(cells[0]))]
    lines = [
        "  ".join(
            [row[0].ljust(widths[0])]
            + [cell.rjust(width) for cell, width in zip(row[1:], widths[1:])]
        ).rstrip()
        for row in cells
    ]
    return "\n".join(lines) + "\n"


def render_report(report: EvalReport) -> str:
    """The per-background table, closed by the pooled Average row"""
    rows = [(score.name, score) for score in report.per_background]
    rows.append((report.overall.name, report.overall))
    return format_table(rows, "Background")


def _score_section(score: SequenceScore) -> dict[str, Any]:
    return {
        "mota": score.mota,
        "idf1": score.idf1,
        "idsw": score.idsw,
        "fp": score.fp,
        "fn": score.fn,
        "gt_total": score.gt_total,
        "pred_total": score.pred_total,
        "idtp": score.idtp,
        "idfp": score.idfp,
        "idfn": score.idfn,
    }


def dumps_report(report: EvalReport, **properties: Any) -> str:
    """Serialize a report at full precision

    Parameters
    ----------
    report : EvalReport
        The report
    **properties
        Anything else to record in the [properties] section (the dataset
        and results locations, say)

    Returns
    -------
    str
        INI text whose [properties] hold the pooled scores, with one
        `[background:<label>]` section per background and one
        `[sequence:<name>]` section per sequence. MOTA keeps its numeric
        value even when the table shows "-".
    """
    sections: dict[str, dict[str, Any]] = {}
    for score in report.per_background:
        sections[f"background:{score.name}"] = _score_section(score)
    for score in report.per_sequence:
        sections[f"sequence:{score.name}"] = _score_section(score)
    return cfg.dumps(
        "mptbench evaluation report",
        {**properties, **_score_section(report.overall)},
        **sections,
    )


def write_report(report: EvalReport, output_root: Path, **properties: Any) -> str:
    """Write report.cfg and report.txt into a folder

    Returns
    -------
    str
        The rendered table

    Raises
    ------
    OSError
        If either file can't be written
    """
    table = render_report(report)
    output_root.mkdir(parents=True, exist_ok=True)
    for name, contents in (
        (REPORT_CONFIG_NAME, dumps_report(report, **properties)),
        (REPORT_TABLE_NAME, table),
    ):
        path = output_root / name
        try:
            path.write_text(contents)
        except OSError as write_fail:
            raise OSError(f"Could not write {path}") from write_fail
    return table
