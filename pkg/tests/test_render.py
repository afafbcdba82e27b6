"""Rendered observations must be byte-identical to the canonical grid blocks."""

from vprlab import minesweeper, sudoku, tictactoe
from vprlab.core import render_observation

EMPTY_TTT_BLOCK = "\n".join(
    [
        "    0  1  2",
        " 0  .  .  .",
        " 1  .  .  .",
        " 2  .  .  .",
    ]
)

SUDOKU_PUZZLE_LINE = (
    "4..95.2.1"
    "...36...."
    ".6..84953"
    ".98.75..2"
    "....931.4"
    "37.62..89"
    ".3.24.8.."
    "..6.1..25"
    "...53841."
)

SUDOKU_BLOCK = "\n".join(
    [
        "   C1 C2 C3   C4 C5 C6   C7 C8 C9  ",
        "R1  4  .  . |  9  5  . |  2  .  1",
        "R2  .  .  . |  3  6  . |  .  .  .",
        "R3  .  6  . |  .  8  4 |  9  5  3",
        "   - - - - - - - - - - - - - - - - ",
        "R4  .  9  8 |  .  7  5 |  .  .  2",
        "R5  .  .  . |  .  9  3 |  1  .  4",
        "R6  3  7  . |  6  2  . |  .  8  9",
        "   - - - - - - - - - - - - - - - - ",
        "R7  .  3  . |  2  4  . |  8  .  .",
        "R8  .  .  6 |  .  1  . |  .  2  5",
        "R9  .  .  . |  5  3  8 |  4  1  .",
    ]
)

FRESH_MINE_BLOCK = "\n".join(
    [
        "    0  1  2  3  4",
        " 0  .  .  .  .  . ",
        " 1  .  .  .  .  . ",
        " 2  .  .  .  .  . ",
        " 3  .  .  .  .  . ",
        " 4  .  .  .  .  .",
    ]
)


class TestTicTacToe:
    def test_empty_board_block(self):
        assert tictactoe.render(tictactoe.initial()) == EMPTY_TTT_BLOCK

    def test_has_four_lines(self):
        assert len(tictactoe.render(tictactoe.initial()).splitlines()) == 4

    def test_marks_rendered_in_place(self):
        state = tictactoe.from_cells("X.O" "..." "..X")
        block = tictactoe.render(state)
        lines = block.splitlines()
        assert lines[1] == " 0  X  .  O"
        assert lines[3] == " 2  .  .  X"


class TestSudoku:
    def test_puzzle_block(self):
        grid = sudoku.SudokuGrid.from_line(SUDOKU_PUZZLE_LINE)
        assert sudoku.render(grid) == SUDOKU_BLOCK

    def test_has_twelve_lines(self):
        grid = sudoku.SudokuGrid.from_line(SUDOKU_PUZZLE_LINE)
        assert len(sudoku.render(grid).splitlines()) == 12

    def test_line_roundtrip(self):
        grid = sudoku.SudokuGrid.from_line(SUDOKU_PUZZLE_LINE)
        assert grid.to_line() == SUDOKU_PUZZLE_LINE


class TestMinesweeper:
    def test_fresh_board_block(self):
        board = minesweeper.initial(seed=3)
        assert minesweeper.render(board) == FRESH_MINE_BLOCK

    def test_has_six_lines(self):
        board = minesweeper.initial(seed=3)
        assert len(minesweeper.render(board).splitlines()) == 6

    def test_flag_and_digit_symbols(self):
        board = minesweeper.from_layout("M....\n.....\n.....\n.....\n....M")
        board = minesweeper.flag(board, 0, 0)
        board = minesweeper.reveal(board, 0, 1)
        block = minesweeper.render(board)
        lines = block.splitlines()
        assert lines[1].startswith(" 0  F  1")

    def test_interior_rows_keep_trailing_space(self):
        block = minesweeper.render(minesweeper.initial(seed=3))
        lines = block.splitlines()
        assert all(line.endswith(" ") for line in lines[1:-1])
        assert not lines[-1].endswith(" ")


def test_dispatch_matches_env_renderers():
    assert render_observation(tictactoe.initial()) == EMPTY_TTT_BLOCK
    board = minesweeper.initial(seed=3)
    assert render_observation(board) == minesweeper.render(board)
    grid = sudoku.SudokuGrid.from_line(SUDOKU_PUZZLE_LINE)
    assert render_observation(grid) == sudoku.render(grid)


def test_rendering_is_deterministic():
    a = minesweeper.initial(seed=11)
    b = minesweeper.initial(seed=11)
    assert minesweeper.render(a) == minesweeper.render(b)
