"""Constraint-based verifier for sudoku: a fill is valid iff it writes the
digit of the unique solution grid.

The verifier consults the solution stored at generation time instead of
re-solving per step; the generator guarantees the two agree.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Fill, VerifierVerdict
from .errors import OutOfRangeError, TerminalError
from .sudoku import SudokuEpisode, SudokuGrid, terminal


@dataclass(frozen=True)
class SolutionRef:
    """The full solution grid a fill is checked against."""

    grid: SudokuGrid

    def __post_init__(self) -> None:
        if not self.grid.full:
            raise ValueError("solution grid must be complete")


def oracle_valid_constraint(ep: SudokuEpisode) -> frozenset:
    """One action per empty cell: the solution digit at that cell."""
    if terminal(ep):
        raise TerminalError("episode is over")
    return frozenset(
        Fill(i // 9 + 1, i % 9 + 1, ep.solution.cells[i])
        for i, d in enumerate(ep.current.cells)
        if d == 0
    )


def verify_fill(sol: SolutionRef, action: Fill, current: SudokuGrid) -> VerifierVerdict:
    """Binary verdict for a fill against the solution.

    ``current`` supplies the empty cells that make up the oracle-valid set
    the verdict reports alongside the bit.
    """
    if not (1 <= action.row <= 9 and 1 <= action.col <= 9 and 1 <= action.digit <= 9):
        raise OutOfRangeError(f"fill out of range: {action}")
    valid_set = frozenset(
        Fill(i // 9 + 1, i % 9 + 1, sol.grid.cells[i])
        for i, d in enumerate(current.cells)
        if d == 0
    )
    return VerifierVerdict.for_action(action, valid_set)
