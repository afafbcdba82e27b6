"""9x9 sudoku episodes: seeded generation with a fixed blank count, exact
solution counting, and fill-based step dynamics.

Puzzles are generated so that exactly one completion exists; the stored
solution grid is what the constraint verifier checks fills against.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

from .core import Fill
from .errors import (
    GenerationError,
    IllegalMoveError,
    InconsistentGridError,
    NonTerminalError,
)
from .seeding import derive_seed


def _box(r: int, c: int) -> int:
    return (r // 3) * 3 + c // 3


@dataclass(frozen=True)
class SudokuGrid:
    """81 cells row-major, 0 = empty, otherwise 1..9."""

    cells: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.cells) != 81:
            raise ValueError("grid needs 81 cells")
        if any(d < 0 or d > 9 for d in self.cells):
            raise ValueError("cell values must be 0..9")

    def at(self, r: int, c: int) -> int:
        """0-indexed accessor."""
        return self.cells[r * 9 + c]

    @property
    def n_empty(self) -> int:
        return self.cells.count(0)

    @property
    def full(self) -> bool:
        return 0 not in self.cells

    def to_line(self) -> str:
        """81-character row-major string with '.' for empty cells."""
        return "".join("." if d == 0 else str(d) for d in self.cells)

    @classmethod
    def from_line(cls, line: str) -> "SudokuGrid":
        if len(line) != 81:
            raise ValueError("line needs 81 characters")
        return cls(tuple(0 if ch in ".0" else int(ch) for ch in line))


def _constraint_masks(grid: SudokuGrid):
    """Bitmask of used digits per row/column/box; raises on duplicates."""
    rows, cols, boxes = [0] * 9, [0] * 9, [0] * 9
    for r in range(9):
        for c in range(9):
            d = grid.at(r, c)
            if d == 0:
                continue
            bit = 1 << d
            b = _box(r, c)
            if rows[r] & bit or cols[c] & bit or boxes[b] & bit:
                raise InconsistentGridError(
                    f"duplicate digit {d} touching cell ({r + 1},{c + 1})"
                )
            rows[r] |= bit
            cols[c] |= bit
            boxes[b] |= bit
    return rows, cols, boxes


def is_consistent(grid: SudokuGrid) -> bool:
    try:
        _constraint_masks(grid)
    except InconsistentGridError:
        return False
    return True


def _search(grid: SudokuGrid, cap: int) -> List[Tuple[int, ...]]:
    """Backtracking with most-constrained-cell ordering; up to ``cap`` solutions."""
    cells = list(grid.cells)
    rows, cols, boxes = _constraint_masks(grid)
    empties = [i for i, d in enumerate(cells) if d == 0]
    found: List[Tuple[int, ...]] = []

    def recurse() -> None:
        if len(found) >= cap:
            return
        best_i = -1
        best_opts: Optional[List[int]] = None
        for i in empties:
            if cells[i]:
                continue
            r, c = divmod(i, 9)
            used = rows[r] | cols[c] | boxes[_box(r, c)]
            opts = [d for d in range(1, 10) if not (used >> d) & 1]
            if not opts:
                return
            if best_opts is None or len(opts) < len(best_opts):
                best_i, best_opts = i, opts
                if len(opts) == 1:
                    break
        if best_opts is None:
            found.append(tuple(cells))
            return
        r, c = divmod(best_i, 9)
        b = _box(r, c)
        for d in best_opts:
            bit = 1 << d
            cells[best_i] = d
            rows[r] |= bit
            cols[c] |= bit
            boxes[b] |= bit
            recurse()
            cells[best_i] = 0
            rows[r] &= ~bit
            cols[c] &= ~bit
            boxes[b] &= ~bit
            if len(found) >= cap:
                return

    recurse()
    return found


def count_solutions(grid: SudokuGrid, cap: int = 2) -> int:
    """Exact number of completions, truncated at ``cap``."""
    return len(_search(grid, cap))


def solve_unique(grid: SudokuGrid) -> SudokuGrid:
    """The unique completion of ``grid``; raises if none or several exist."""
    sols = _search(grid, cap=2)
    if len(sols) != 1:
        raise InconsistentGridError(f"expected 1 solution, found {len(sols)}")
    return SudokuGrid(sols[0])


@dataclass(frozen=True)
class SudokuEpisode:
    """A puzzle, its unique solution, and the live fill state."""

    puzzle: SudokuGrid
    solution: SudokuGrid
    current: SudokuGrid
    givens_mask: Tuple[bool, ...]

    @classmethod
    def new(cls, puzzle: SudokuGrid, solution: SudokuGrid) -> "SudokuEpisode":
        return cls(
            puzzle=puzzle,
            solution=solution,
            current=puzzle,
            givens_mask=tuple(d != 0 for d in puzzle.cells),
        )

    @property
    def initial_blanks(self) -> int:
        return self.puzzle.n_empty


def _random_full_grid(rng: random.Random) -> SudokuGrid:
    cells = [0] * 81
    rows, cols, boxes = [0] * 9, [0] * 9, [0] * 9

    def fill(i: int) -> bool:
        if i == 81:
            return True
        r, c = divmod(i, 9)
        b = _box(r, c)
        used = rows[r] | cols[c] | boxes[b]
        digits = [d for d in range(1, 10) if not (used >> d) & 1]
        rng.shuffle(digits)
        for d in digits:
            bit = 1 << d
            cells[i] = d
            rows[r] |= bit
            cols[c] |= bit
            boxes[b] |= bit
            if fill(i + 1):
                return True
            cells[i] = 0
            rows[r] &= ~bit
            cols[c] &= ~bit
            boxes[b] &= ~bit
        return False

    fill(0)
    return SudokuGrid(tuple(cells))


def generate(seed: int, blanks: int = 40, max_attempts: int = 50) -> SudokuEpisode:
    """Seed-deterministic episode with exactly ``blanks`` empty cells and a
    unique solution.

    Cells are removed in random order, keeping a removal only if the puzzle
    still has exactly one completion; a fresh full grid is tried (from a
    derived seed) whenever a removal sequence gets stuck.
    """
    if not 0 <= blanks <= 64:
        raise ValueError(f"blanks {blanks} outside 0..64")
    for attempt in range(max_attempts):
        rng = random.Random(derive_seed(seed, attempt))
        solution = _random_full_grid(rng)
        cells = list(solution.cells)
        order = list(range(81))
        rng.shuffle(order)
        removed = 0
        for idx in order:
            if removed == blanks:
                break
            kept = cells[idx]
            cells[idx] = 0
            if count_solutions(SudokuGrid(tuple(cells)), cap=2) == 1:
                removed += 1
            else:
                cells[idx] = kept
        if removed == blanks:
            puzzle = SudokuGrid(tuple(cells))
            return SudokuEpisode.new(puzzle, solution)
    raise GenerationError(
        f"no uniqueness-preserving removal sequence after {max_attempts} attempts"
    )


def legal(ep: SudokuEpisode) -> frozenset:
    """Fills on empty cells whose digit does not conflict in row/column/box."""
    rows, cols, boxes = _constraint_masks(ep.current)
    out = []
    for i, d in enumerate(ep.current.cells):
        if d:
            continue
        r, c = divmod(i, 9)
        used = rows[r] | cols[c] | boxes[_box(r, c)]
        out.extend(
            Fill(r + 1, c + 1, digit)
            for digit in range(1, 10)
            if not (used >> digit) & 1
        )
    return frozenset(out)


def terminal(ep: SudokuEpisode) -> bool:
    return ep.current.full or not legal(ep)


def apply(ep: SudokuEpisode, action: Fill) -> SudokuEpisode:
    """Write the digit; 1-indexed coordinates per the action grammar."""
    r, c = action.row - 1, action.col - 1
    if not (0 <= r < 9 and 0 <= c < 9 and 1 <= action.digit <= 9):
        raise IllegalMoveError(f"coordinates/digit out of range: {action}")
    i = r * 9 + c
    if ep.givens_mask[i]:
        raise IllegalMoveError(f"cell ({action.row},{action.col}) is pre-filled")
    if ep.current.cells[i]:
        raise IllegalMoveError(f"cell ({action.row},{action.col}) already filled")
    rows, cols, boxes = _constraint_masks(ep.current)
    bit = 1 << action.digit
    if (rows[r] | cols[c] | boxes[_box(r, c)]) & bit:
        raise IllegalMoveError(
            f"digit {action.digit} conflicts at ({action.row},{action.col})"
        )
    cells = list(ep.current.cells)
    cells[i] = action.digit
    return replace(ep, current=SudokuGrid(tuple(cells)))


def metrics(ep: SudokuEpisode, forfeited: bool = False) -> Tuple[bool, float]:
    """(success, completion_rate) for a finished episode.

    Completion rate counts agent-filled cells that match the solution over
    the puzzle's initial blanks, so wrong-but-consistent fills earn nothing.
    """
    if not (terminal(ep) or forfeited):
        raise NonTerminalError("episode still has legal fills")
    blanks = ep.initial_blanks
    if blanks == 0:
        return True, 1.0
    correct = sum(
        1
        for i in range(81)
        if not ep.givens_mask[i]
        and ep.current.cells[i] != 0
        and ep.current.cells[i] == ep.solution.cells[i]
    )
    return ep.current == ep.solution, correct / blanks


_HEADER = "   C1 C2 C3   C4 C5 C6   C7 C8 C9  "
_SEPARATOR = "   " + "- " * 16


def render(grid: SudokuGrid) -> str:
    """12-line GAME STATE grid with 3x3 box separators."""
    lines = [_HEADER]
    for r in range(9):
        row = f"R{r + 1}"
        for c in range(9):
            d = grid.at(r, c)
            row += f"  {'.' if d == 0 else d}"
            if c in (2, 5):
                row += " |"
        lines.append(row)
        if r in (2, 5):
            lines.append(_SEPARATOR)
    return "\n".join(lines)
