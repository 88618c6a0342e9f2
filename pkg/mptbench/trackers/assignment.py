"""Gated minimum-cost bipartite assignment"""
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment


class Assignment(NamedTuple):
    """The outcome of an assignment

    Parameters
    ----------
    matches : list of (int, int)
        The admitted (row, column) pairs, in row order
    unmatched_rows : list of int
        The rows left without a partner
    unmatched_cols : list of int
        The columns left without a partner
    """

    matches: list[tuple[int, int]]
    unmatched_rows: list[int]
    unmatched_cols: list[int]


def hungarian_assign(cost: np.ndarray, gate: float = np.inf) -> Assignment:
    """Solve the one-to-one assignment of minimum total cost, then discard
    the pairs costing more than the gate

    Parameters
    ----------
    cost : (N, M) array
        The cost of pairing each row with each column
    gate : float, optional
        The largest admissible cost. By default every pair is admitted.

    Returns
    -------
    Assignment
        The matches and the leftovers. An empty matrix gives an empty
        assignment.

    Raises
    ------
    ValueError
        If the matrix isn't two-dimensional or holds non-finite costs
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2:
        raise ValueError(f"Cost matrix must be 2D, not {cost.ndim}D")
    n_rows, n_cols = cost.shape
    if cost.size == 0:
        return Assignment([], list(range(n_rows)), list(range(n_cols)))
    if not np.isfinite(cost).all():
        raise ValueError("Cost matrix contains non-finite values")

    rows, cols = linear_sum_assignment(cost)
    matches = [
        (int(row), int(col))
        for row, col in zip(rows, cols)
        if cost[row, col] <= gate
    ]
    matched_rows = {row for row, _ in matches}
    matched_cols = {col for _, col in matches}
    return Assignment(
        matches,
        [row for row in range(n_rows) if row not in matched_rows],
        [col for col in range(n_cols) if col not in matched_cols],
    )
