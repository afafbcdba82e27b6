import pytest
from hypothesis import given
from hypothesis import strategies as st

from vprlab.core import (
    EnvKind,
    Fill,
    Flag,
    Place,
    Reveal,
    action_from_token,
    action_token,
    parse_action,
    wrap_action,
)
from vprlab.errors import FormatError, OutOfRangeError


class TestParse:
    def test_tictactoe_listing_example(self):
        assert parse_action("<answer><X(0,0)></answer>", EnvKind.TICTACTOE) == Place(
            "X", 0, 0
        )

    def test_sudoku_listing_example(self):
        assert parse_action("<answer><fill(1,1,5)></answer>", EnvKind.SUDOKU) == Fill(
            1, 1, 5
        )

    def test_minesweeper_actions(self):
        assert parse_action(
            "<answer><reveal(0,0)></answer>", EnvKind.MINESWEEPER
        ) == Reveal(0, 0)
        assert parse_action(
            "<answer><flag(1,2)></answer>", EnvKind.MINESWEEPER
        ) == Flag(1, 2)

    def test_reasoning_text_before_wrapper_is_ignored(self):
        text = "I should take the center.\nSo: <answer><X(1,1)></answer>"
        assert parse_action(text, EnvKind.TICTACTOE) == Place("X", 1, 1)

    def test_no_wrapper_is_format_error(self):
        with pytest.raises(FormatError):
            parse_action("I think... no answer tag", EnvKind.TICTACTOE)

    def test_text_after_wrapper_is_format_error(self):
        with pytest.raises(FormatError):
            parse_action("<answer><X(0,0)></answer> final answer!", EnvKind.TICTACTOE)

    def test_trailing_whitespace_is_tolerated(self):
        assert parse_action(
            "<answer><X(0,0)></answer>\n  ", EnvKind.TICTACTOE
        ) == Place("X", 0, 0)

    def test_multiple_wrappers_is_format_error(self):
        text = "<answer><X(0,0)></answer><answer><X(1,1)></answer>"
        with pytest.raises(FormatError):
            parse_action(text, EnvKind.TICTACTOE)

    def test_wrong_env_grammar_is_format_error(self):
        with pytest.raises(FormatError):
            parse_action("<answer><fill(1,1,5)></answer>", EnvKind.TICTACTOE)

    def test_out_of_range_minesweeper(self):
        with pytest.raises(OutOfRangeError):
            parse_action("<answer><reveal(9,9)></answer>", EnvKind.MINESWEEPER)

    def test_out_of_range_tictactoe(self):
        with pytest.raises(OutOfRangeError):
            parse_action("<answer><X(3,0)></answer>", EnvKind.TICTACTOE)

    def test_sudoku_zero_is_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            parse_action("<answer><fill(0,1,5)></answer>", EnvKind.SUDOKU)
        with pytest.raises(OutOfRangeError):
            parse_action("<answer><fill(1,1,0)></answer>", EnvKind.SUDOKU)

    def test_negative_coordinate_is_format_error(self):
        # sign characters are not part of the grammar at all
        with pytest.raises(FormatError):
            parse_action("<answer><reveal(-1,0)></answer>", EnvKind.MINESWEEPER)


ttt_actions = st.builds(
    Place,
    mark=st.sampled_from(["X", "O"]),
    row=st.integers(0, 2),
    col=st.integers(0, 2),
)
sudoku_actions = st.builds(
    Fill,
    row=st.integers(1, 9),
    col=st.integers(1, 9),
    digit=st.integers(1, 9),
)
mine_actions = st.one_of(
    st.builds(Reveal, row=st.integers(0, 4), col=st.integers(0, 4)),
    st.builds(Flag, row=st.integers(0, 4), col=st.integers(0, 4)),
)


@given(ttt_actions)
def test_roundtrip_tictactoe(action):
    assert parse_action(wrap_action(action), EnvKind.TICTACTOE) == action


@given(sudoku_actions)
def test_roundtrip_sudoku(action):
    assert parse_action(wrap_action(action), EnvKind.SUDOKU) == action


@given(mine_actions)
def test_roundtrip_minesweeper(action):
    assert parse_action(wrap_action(action), EnvKind.MINESWEEPER) == action


@given(mine_actions)
def test_token_roundtrip(action):
    assert action_from_token(action_token(action), EnvKind.MINESWEEPER) == action


@given(st.text(max_size=120), st.sampled_from(list(EnvKind)))
def test_grammar_totality(text, env):
    """Any string either parses or raises exactly one declared error."""
    try:
        parse_action(text, env)
    except (FormatError, OutOfRangeError):
        pass
