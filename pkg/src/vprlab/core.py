"""Shared episode data model, action grammar, and observation-rendering contract.

Actions travel as tagged text (``<answer><X(0,0)></answer>``); every
environment renders its state as a fixed-width text grid. Both directions are
exact: parsing round-trips every legal action and rendering is byte-stable so
verdicts can be recomputed from logged episodes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Optional, Union

from .errors import FormatError, OutOfRangeError, SequenceError


class EnvKind(str, Enum):
    TICTACTOE = "tictactoe"
    SUDOKU = "sudoku"
    MINESWEEPER = "minesweeper"


@dataclass(frozen=True)
class Place:
    """Tic-tac-toe move: put ``mark`` at a 0-indexed cell."""

    mark: str
    row: int
    col: int


@dataclass(frozen=True)
class Fill:
    """Sudoku move: write ``digit`` at a 1-indexed cell."""

    row: int
    col: int
    digit: int


@dataclass(frozen=True)
class Reveal:
    """Minesweeper move: open a 0-indexed cell."""

    row: int
    col: int


@dataclass(frozen=True)
class Flag:
    """Minesweeper move: toggle the flag on a 0-indexed cell."""

    row: int
    col: int


Action = Union[Place, Fill, Reveal, Flag]

_ANSWER_RE = re.compile(r"<answer>(.*?)</answer>", re.DOTALL)
_TOKEN_RES = {
    EnvKind.TICTACTOE: re.compile(r"^<([XO])\((\d+),(\d+)\)>$"),
    EnvKind.SUDOKU: re.compile(r"^<fill\((\d+),(\d+),(\d+)\)>$"),
    EnvKind.MINESWEEPER: re.compile(r"^<(reveal|flag)\((\d+),(\d+)\)>$"),
}


def action_token(action: Action) -> str:
    """Canonical tag for an action, e.g. ``<fill(1,1,5)>``."""
    if isinstance(action, Place):
        return f"<{action.mark}({action.row},{action.col})>"
    if isinstance(action, Fill):
        return f"<fill({action.row},{action.col},{action.digit})>"
    if isinstance(action, Reveal):
        return f"<reveal({action.row},{action.col})>"
    if isinstance(action, Flag):
        return f"<flag({action.row},{action.col})>"
    raise TypeError(f"not an action: {action!r}")


def wrap_action(action: Action) -> str:
    """Canonical full response for an action: ``<answer>{token}</answer>``."""
    return f"<answer>{action_token(action)}</answer>"


def parse_action(text: str, env: EnvKind) -> Action:
    """Extract exactly one action from an ``<answer>`` wrapper.

    Reasoning text before the wrapper is ignored; anything but whitespace
    after the closing tag, a missing or duplicated wrapper, or an inner token
    that does not match the environment grammar raises :class:`FormatError`.
    In-grammar coordinates outside the declared board ranges raise
    :class:`OutOfRangeError`.
    """
    matches = list(_ANSWER_RE.finditer(text))
    if not matches:
        raise FormatError("no <answer>...</answer> wrapper found")
    if len(matches) > 1:
        raise FormatError("multiple <answer> wrappers; choose only one action")
    match = matches[0]
    if text[match.end():].strip():
        raise FormatError("extra text after </answer>")
    token = match.group(1).strip()
    grammar = _TOKEN_RES[env]
    m = grammar.match(token)
    if m is None:
        raise FormatError(f"token {token!r} does not match the {env.value} grammar")
    if env is EnvKind.TICTACTOE:
        mark, row, col = m.group(1), int(m.group(2)), int(m.group(3))
        _check_range(env, row=row, col=col, lo=0, hi=2)
        return Place(mark, row, col)
    if env is EnvKind.SUDOKU:
        row, col, digit = (int(m.group(i)) for i in (1, 2, 3))
        _check_range(env, row=row, col=col, lo=1, hi=9)
        if not 1 <= digit <= 9:
            raise OutOfRangeError(f"sudoku digit {digit} outside 1..9")
        return Fill(row, col, digit)
    verb, row, col = m.group(1), int(m.group(2)), int(m.group(3))
    _check_range(env, row=row, col=col, lo=0, hi=4)
    return Reveal(row, col) if verb == "reveal" else Flag(row, col)


def _check_range(env: EnvKind, row: int, col: int, lo: int, hi: int) -> None:
    if not (lo <= row <= hi and lo <= col <= hi):
        raise OutOfRangeError(
            f"{env.value} coordinates ({row},{col}) outside {lo}..{hi}"
        )


def action_from_token(token: str, env: EnvKind) -> Action:
    """Parse a bare action tag (no wrapper); used for serialized records."""
    return parse_action(f"<answer>{token}</answer>", env)


@dataclass(frozen=True)
class VerifierVerdict:
    """Binary oracle outcome for one action plus the full oracle-valid set."""

    valid: int
    oracle_valid_set: frozenset
    oracle_meta: Optional[dict] = None

    @classmethod
    def for_action(
        cls,
        action: Action,
        oracle_valid_set: frozenset,
        oracle_meta: Optional[dict] = None,
    ) -> "VerifierVerdict":
        return cls(
            valid=int(action in oracle_valid_set),
            oracle_valid_set=frozenset(oracle_valid_set),
            oracle_meta=oracle_meta,
        )


@dataclass(frozen=True)
class TurnRecord:
    """One agent turn: what it saw, what it did, and what the oracle said."""

    turn_index: int
    observation_text: str
    action: Action
    verdict: VerifierVerdict
    reward_vpr: int
    terminal: bool

    def __post_init__(self) -> None:
        if self.turn_index < 1:
            raise ValueError("turn_index starts at 1")
        if self.reward_vpr not in (0, 1):
            raise ValueError("reward_vpr must be 0 or 1")


@dataclass(frozen=True)
class Outcome:
    """Terminal episode summary."""

    success: bool
    game_return: Optional[float] = None
    completion_rate: Optional[float] = None
    forfeited: bool = False


@dataclass(frozen=True)
class Trajectory:
    """Ordered turn records for one seeded episode of one environment."""

    env: EnvKind
    seed: int
    turns: tuple = ()
    outcome: Optional[Outcome] = None

    def __len__(self) -> int:
        return len(self.turns)

    @property
    def terminal(self) -> bool:
        return bool(self.turns) and self.turns[-1].terminal


def append_turn(traj: Trajectory, rec: TurnRecord) -> Trajectory:
    """Return ``traj`` extended by one record; rejects gaps and closed episodes."""
    if traj.terminal:
        raise SequenceError("cannot append to a terminal trajectory")
    expected = len(traj.turns) + 1
    if rec.turn_index != expected:
        raise SequenceError(
            f"turn_index {rec.turn_index} does not follow {len(traj.turns)} turns"
        )
    return replace(traj, turns=traj.turns + (rec,))


def render_observation(state: Any) -> str:
    """Render any environment state as its canonical GAME STATE grid."""
    from . import minesweeper, sudoku, tictactoe

    if isinstance(state, tictactoe.TttState):
        return tictactoe.render(state)
    if isinstance(state, sudoku.SudokuGrid):
        return sudoku.render(state)
    if isinstance(state, sudoku.SudokuEpisode):
        return sudoku.render(state.current)
    if isinstance(state, minesweeper.MineBoard):
        return minesweeper.render(state)
    raise TypeError(f"no renderer for {type(state).__name__}")


SCHEMA_VERSION = 1


def trajectory_to_dict(traj: Trajectory) -> dict:
    """Logical JSON schema for one trajectory (one object per episode)."""
    return {
        "schema": SCHEMA_VERSION,
        "env": traj.env.value,
        "seed": traj.seed,
        "turns": [
            {
                "turn": rec.turn_index,
                "observation": rec.observation_text,
                "action": action_token(rec.action),
                "valid": rec.verdict.valid,
                "oracle_valid": sorted(
                    action_token(a) for a in rec.verdict.oracle_valid_set
                ),
                "reward_vpr": rec.reward_vpr,
                "terminal": rec.terminal,
            }
            for rec in traj.turns
        ],
        "outcome": None
        if traj.outcome is None
        else {
            "success": traj.outcome.success,
            "game_return": traj.outcome.game_return,
            "completion_rate": traj.outcome.completion_rate,
            "forfeited": traj.outcome.forfeited,
        },
    }


def trajectory_from_dict(payload: dict) -> Trajectory:
    """Inverse of :func:`trajectory_to_dict`."""
    if payload.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported trajectory schema: {payload.get('schema')!r}")
    env = EnvKind(payload["env"])
    traj = Trajectory(env=env, seed=payload["seed"])
    for rec in payload["turns"]:
        action = action_from_token(rec["action"], env)
        valid_set = frozenset(
            action_from_token(tok, env) for tok in rec["oracle_valid"]
        )
        traj = append_turn(
            traj,
            TurnRecord(
                turn_index=rec["turn"],
                observation_text=rec["observation"],
                action=action,
                verdict=VerifierVerdict(valid=rec["valid"], oracle_valid_set=valid_set),
                reward_vpr=rec["reward_vpr"],
                terminal=rec["terminal"],
            ),
        )
    out = payload.get("outcome")
    if out is not None:
        traj = replace(
            traj,
            outcome=Outcome(
                success=out["success"],
                game_return=out.get("game_return"),
                completion_rate=out.get("completion_rate"),
                forfeited=out.get("forfeited", False),
            ),
        )
    return traj
