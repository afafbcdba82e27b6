"""Exact 3x3 tic-tac-toe state machine on 9-bit masks.

Masks keep states hashable and cheap to copy, which the search oracle leans
on heavily; the human-facing cell grid is derived on demand.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from .core import Place
from .errors import IllegalMoveError, NonTerminalError, TerminalError

WIN_MASKS = (
    0b111000000, 0b000111000, 0b000000111,  # rows
    0b100100100, 0b010010010, 0b001001001,  # columns
    0b100010001, 0b001010100,  # diagonals
)
FULL_MASK = 0b111111111

ONGOING = "ongoing"
X_WINS = "x_wins"
O_WINS = "o_wins"
DRAW = "draw"


def _bit(row: int, col: int) -> int:
    return 1 << (row * 3 + col)


def has_line(mask: int) -> bool:
    return any(mask & w == w for w in WIN_MASKS)


@dataclass(frozen=True)
class TttState:
    x_mask: int = 0
    o_mask: int = 0

    def __post_init__(self) -> None:
        if self.x_mask & self.o_mask:
            raise ValueError("overlapping marks")
        nx, no = bin(self.x_mask).count("1"), bin(self.o_mask).count("1")
        if nx - no not in (0, 1):
            raise ValueError(f"unreachable mark counts x={nx} o={no}")
        if has_line(self.x_mask) and has_line(self.o_mask):
            raise ValueError("two winners")

    @property
    def to_move(self) -> str:
        nx, no = bin(self.x_mask).count("1"), bin(self.o_mask).count("1")
        return "X" if nx == no else "O"

    @property
    def status(self) -> str:
        if has_line(self.x_mask):
            return X_WINS
        if has_line(self.o_mask):
            return O_WINS
        if (self.x_mask | self.o_mask) == FULL_MASK:
            return DRAW
        return ONGOING

    @property
    def cells(self) -> Tuple[str, ...]:
        out = []
        for i in range(9):
            if (self.x_mask >> i) & 1:
                out.append("X")
            elif (self.o_mask >> i) & 1:
                out.append("O")
            else:
                out.append(".")
        return tuple(out)


def initial() -> TttState:
    return TttState()


def from_cells(cells) -> TttState:
    """Build a state from a 9-item iterable of '.', 'X', 'O' (row-major)."""
    x = o = 0
    for i, ch in enumerate(cells):
        if ch == "X":
            x |= 1 << i
        elif ch == "O":
            o |= 1 << i
        elif ch != ".":
            raise ValueError(f"bad cell {ch!r}")
    return TttState(x, o)


def legal(state: TttState) -> frozenset:
    """All empty cells as :class:`Place` actions for the player to move."""
    if state.status != ONGOING:
        raise TerminalError(f"game is over: {state.status}")
    mark = state.to_move
    occupied = state.x_mask | state.o_mask
    return frozenset(
        Place(mark, i // 3, i % 3) for i in range(9) if not (occupied >> i) & 1
    )


def apply(state: TttState, action: Place) -> TttState:
    """Place the mark and recompute status over all eight lines."""
    if state.status != ONGOING:
        raise TerminalError(f"game is over: {state.status}")
    if action.mark != state.to_move:
        raise IllegalMoveError(f"it is {state.to_move}'s turn, not {action.mark}'s")
    bit = _bit(action.row, action.col)
    if (state.x_mask | state.o_mask) & bit:
        raise IllegalMoveError(f"cell ({action.row},{action.col}) is occupied")
    if action.mark == "X":
        return TttState(state.x_mask | bit, state.o_mask)
    return TttState(state.x_mask, state.o_mask | bit)


def game_return(state: TttState, protagonist: str) -> int:
    """Terminal return for ``protagonist``: win +1, draw 0, loss -1."""
    status = state.status
    if status == ONGOING:
        raise NonTerminalError("game still in progress")
    if status == DRAW:
        return 0
    winner = "X" if status == X_WINS else "O"
    return 1 if winner == protagonist else -1


_HEADER = "    0  1  2"


def render(state: TttState) -> str:
    """4-line GAME STATE grid: column header plus three labelled rows."""
    cells = state.cells
    lines = [_HEADER]
    for r in range(3):
        lines.append(f" {r}" + "".join(f"  {cells[r * 3 + c]}" for c in range(3)))
    return "\n".join(lines)
