"""5x5 minesweeper with 5 hidden mines: reveal/flag dynamics under partial
observability.

Flood-fill of zero-adjacency regions is off by default (every reveal opens a
single cell) but can be enabled per board for comparison studies.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Tuple

from .core import Flag, Reveal
from .errors import ConfigError, IllegalMoveError, NonTerminalError
from .seeding import derive_seed

ONGOING = "ongoing"
LOST = "lost"
WON = "won"

Cell = Tuple[int, int]


@dataclass(frozen=True)
class MineBoard:
    rows: int
    cols: int
    mines: FrozenSet[Cell]
    revealed: FrozenSet[Cell] = frozenset()
    flags: FrozenSet[Cell] = frozenset()
    flood_fill: bool = False

    @property
    def n_mines(self) -> int:
        return len(self.mines)

    @property
    def safe_cells(self) -> int:
        return self.rows * self.cols - len(self.mines)

    @property
    def status(self) -> str:
        if self.revealed & self.mines:
            return LOST
        if len(self.revealed) == self.safe_cells:
            return WON
        return ONGOING

    def in_bounds(self, r: int, c: int) -> bool:
        return 0 <= r < self.rows and 0 <= c < self.cols

    def neighbors(self, r: int, c: int):
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == dc == 0:
                    continue
                if self.in_bounds(r + dr, c + dc):
                    yield (r + dr, c + dc)

    def adjacency(self, r: int, c: int) -> int:
        """Number of mines among the <=8 neighbors."""
        return sum(1 for cell in self.neighbors(r, c) if cell in self.mines)


def initial(
    seed: int, rows: int = 5, cols: int = 5, n_mines: int = 5, flood_fill: bool = False
) -> MineBoard:
    """Fresh board with mines sampled uniformly without replacement."""
    if n_mines >= rows * cols:
        raise ConfigError(f"{n_mines} mines do not fit a {rows}x{cols} board")
    rng = random.Random(derive_seed(seed, rows, cols, n_mines))
    cells = [(r, c) for r in range(rows) for c in range(cols)]
    mines = frozenset(rng.sample(cells, n_mines))
    return MineBoard(rows=rows, cols=cols, mines=mines, flood_fill=flood_fill)


def from_layout(layout: str, flood_fill: bool = False) -> MineBoard:
    """Test fixture format: newline-separated rows, 'M' = mine, '.' = safe."""
    rows = [line for line in layout.strip().splitlines()]
    mines = frozenset(
        (r, c) for r, line in enumerate(rows) for c, ch in enumerate(line) if ch == "M"
    )
    return MineBoard(
        rows=len(rows), cols=len(rows[0]), mines=mines, flood_fill=flood_fill
    )


def legal(board: MineBoard) -> frozenset:
    """Reveals on unrevealed unflagged cells plus flag toggles on unrevealed cells."""
    if board.status != ONGOING:
        raise IllegalMoveError(f"board is {board.status}")
    actions = []
    for r in range(board.rows):
        for c in range(board.cols):
            if (r, c) in board.revealed:
                continue
            actions.append(Flag(r, c))
            if (r, c) not in board.flags:
                actions.append(Reveal(r, c))
    return frozenset(actions)


def reveal(board: MineBoard, r: int, c: int) -> MineBoard:
    """Open one cell; hitting a mine loses immediately."""
    if board.status != ONGOING:
        raise IllegalMoveError(f"board is {board.status}")
    if not board.in_bounds(r, c):
        raise IllegalMoveError(f"({r},{c}) off the board")
    if (r, c) in board.revealed:
        raise IllegalMoveError(f"({r},{c}) already revealed")
    if (r, c) in board.flags:
        raise IllegalMoveError(f"({r},{c}) is flagged; unflag before revealing")
    opened = {(r, c)}
    if (r, c) not in board.mines and board.flood_fill:
        frontier = [(r, c)]
        while frontier:
            cell = frontier.pop()
            if board.adjacency(*cell) != 0:
                continue
            for nb in board.neighbors(*cell):
                if nb in opened or nb in board.revealed or nb in board.flags:
                    continue
                opened.add(nb)
                frontier.append(nb)
    return replace(
        board,
        revealed=board.revealed | frozenset(opened),
        flags=board.flags - frozenset(opened),
    )


def flag(board: MineBoard, r: int, c: int) -> MineBoard:
    """Toggle the flag on an unrevealed cell."""
    if board.status != ONGOING:
        raise IllegalMoveError(f"board is {board.status}")
    if not board.in_bounds(r, c):
        raise IllegalMoveError(f"({r},{c}) off the board")
    if (r, c) in board.revealed:
        raise IllegalMoveError(f"({r},{c}) is already revealed")
    if (r, c) in board.flags:
        return replace(board, flags=board.flags - {(r, c)})
    return replace(board, flags=board.flags | {(r, c)})


def apply(board: MineBoard, action) -> MineBoard:
    if isinstance(action, Reveal):
        return reveal(board, action.row, action.col)
    if isinstance(action, Flag):
        return flag(board, action.row, action.col)
    raise IllegalMoveError(f"not a minesweeper action: {action!r}")


def observation(board: MineBoard) -> Dict[Cell, int]:
    """Adjacency digits of every revealed safe cell (what the agent can see)."""
    return {
        cell: board.adjacency(*cell)
        for cell in board.revealed
        if cell not in board.mines
    }


def metrics(board: MineBoard, forfeited: bool = False) -> Tuple[bool, float]:
    """(success, completion_rate); CR is the fraction of safe cells revealed."""
    if board.status == ONGOING and not forfeited:
        raise NonTerminalError("board still ongoing")
    safe_revealed = len(board.revealed - board.mines)
    return board.status == WON, safe_revealed / board.safe_cells


def render(board: MineBoard) -> str:
    """(rows+1)-line GAME STATE grid: '.' unrevealed, 'F' flagged, digits
    for revealed cells."""
    digits = observation(board)
    lines = ["    " + "  ".join(str(c) for c in range(board.cols))]
    for r in range(board.rows):
        row = f" {r}"
        for c in range(board.cols):
            if (r, c) in digits:
                sym = str(digits[(r, c)])
            elif (r, c) in board.revealed:
                sym = "M"  # only reachable on a lost board
            elif (r, c) in board.flags:
                sym = "F"
            else:
                sym = "."
            row += f"  {sym}"
        lines.append(row + " ")
    return "\n".join(lines).rstrip(" ")
