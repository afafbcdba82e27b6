"""Verifiable process rewards over densely-verifiable games.

Three text-grid environments (tic-tac-toe, sudoku, minesweeper), one exact
oracle verifier per environment, the turn-level reward/advantage pipeline,
a numerical lab for the policy-gradient theory, and an episode server for
external agents.
"""

from .core import (
    Action,
    EnvKind,
    Fill,
    Flag,
    Outcome,
    Place,
    Reveal,
    Trajectory,
    TurnRecord,
    VerifierVerdict,
    action_token,
    append_turn,
    parse_action,
    render_observation,
    wrap_action,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "EnvKind",
    "Fill",
    "Flag",
    "Outcome",
    "Place",
    "Reveal",
    "Trajectory",
    "TurnRecord",
    "VerifierVerdict",
    "action_token",
    "append_turn",
    "parse_action",
    "render_observation",
    "wrap_action",
    "__version__",
]
