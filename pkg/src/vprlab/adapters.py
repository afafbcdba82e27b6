"""Uniform episode interface binding each environment to its verifier and,
for tic-tac-toe, to its opponent.

From the agent's side every environment is a single-agent MDP: ``apply``
advances past the opponent's reply where one exists. Opponent choices are
deterministic functions of (episode seed, turn index, position), which is
what makes recorded trajectories replayable state-for-state.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import minesweeper, sudoku, tictactoe
from .core import EnvKind, Outcome, Trajectory, VerifierVerdict
from .errors import ReplayError
from .posterior_oracle import enumerate_consistent, full_valid_set, verdict_probabilistic
from .search_oracle import (
    SearchStats,
    SearchVerdictConfig,
    mcts_search,
    minimax,
    oracle_set_from_stats,
)
from .seeding import derive_seed
from .solution_oracle import SolutionRef, oracle_valid_constraint, verify_fill

_OPPONENT_STREAM = 101
_ROLLOUT_STREAM = 202

_search_cache: Dict[Tuple[int, int, int, float, int], SearchStats] = {}


def clear_search_cache() -> None:
    _search_cache.clear()


def _cached_search(state: tictactoe.TttState, cfg: SearchVerdictConfig) -> SearchStats:
    key = (state.x_mask, state.o_mask, cfg.n_simulations, cfg.uct_c, cfg.seed)
    stats = _search_cache.get(key)
    if stats is None:
        stats = mcts_search(state, cfg)
        _search_cache[key] = stats
    return stats


@dataclass
class TictactoeAdapter:
    """Protagonist-vs-opponent tic-tac-toe as a single-agent episode.

    ``opponent`` is any policy; its per-turn tie-break stream derives from
    the episode seed so episodes replay exactly. The verifier runs the
    search oracle with a position-derived seed, making re-verification of
    logged trajectories bit-stable.
    """

    opponent: object
    protagonist: str = "X"
    verifier_cfg: SearchVerdictConfig = field(default_factory=SearchVerdictConfig)
    verifier_seed: int = 7_777
    kind = EnvKind.TICTACTOE
    horizon = 9

    def reset(self, seed: int) -> tictactoe.TttState:
        state = tictactoe.initial()
        if self.protagonist == "O":
            state = self._opponent_move(state, seed, ply=0)
        return state

    def _opponent_move(self, state, seed: int, ply: int):
        rng = random.Random(derive_seed(seed, _OPPONENT_STREAM, ply))
        action = self.opponent.choose(self, state, rng)
        return tictactoe.apply(state, action)

    def legal(self, state) -> frozenset:
        return tictactoe.legal(state)

    def apply(self, state, action, seed: int, ply: int):
        state = tictactoe.apply(state, action)
        if state.status == tictactoe.ONGOING:
            state = self._opponent_move(state, seed, ply)
        return state

    def is_terminal(self, state) -> bool:
        return state.status != tictactoe.ONGOING

    def render(self, state) -> str:
        return tictactoe.render(state)

    def _verifier_stats(self, state) -> SearchStats:
        cfg = SearchVerdictConfig(
            n_simulations=self.verifier_cfg.n_simulations,
            uct_c=self.verifier_cfg.uct_c,
            tie_tolerance=self.verifier_cfg.tie_tolerance,
            seed=derive_seed(self.verifier_seed, state.x_mask, state.o_mask),
        )
        return _cached_search(state, cfg)

    def verdict(self, state, action) -> VerifierVerdict:
        stats = self._verifier_stats(state)
        valid_set = oracle_set_from_stats(stats, self.verifier_cfg.tie_tolerance)
        meta = {"simulations": stats.total_simulations}
        return VerifierVerdict.for_action(action, valid_set, oracle_meta=meta)

    def optimal_set(self, state) -> frozenset:
        return minimax(state)[1]

    def outcome(self, state, forfeited: bool = False, truncated: bool = False) -> Outcome:
        if forfeited:
            return Outcome(success=False, game_return=-1.0, forfeited=True)
        ret = float(tictactoe.game_return(state, self.protagonist))
        return Outcome(success=ret > 0, game_return=ret)

    def replay_states(self, traj: Trajectory) -> List[tictactoe.TttState]:
        states = []
        state = self.reset(traj.seed)
        for rec in traj.turns:
            states.append(state)
            try:
                state = self.apply(state, rec.action, traj.seed, rec.turn_index)
            except Exception as exc:
                raise ReplayError(f"turn {rec.turn_index}: {exc}") from exc
        return states

    def rollout_return(self, state, policy, seed: int) -> float:
        rng = random.Random(derive_seed(seed, _ROLLOUT_STREAM))
        ply = 1000  # rollout opponent stream, disjoint from recorded plies
        while state.status == tictactoe.ONGOING:
            action = policy.choose(self, state, rng)
            state = self.apply(state, action, seed, ply)
            ply += 1
        return float(tictactoe.game_return(state, self.protagonist))

    def realized_return(self, traj: Trajectory) -> float:
        return float(traj.outcome.game_return)


@dataclass
class SudokuAdapter:
    """Sudoku episodes generated per seed; the verifier checks fills against
    the stored unique solution."""

    blanks: int = 40
    kind = EnvKind.SUDOKU
    horizon = 40

    def reset(self, seed: int) -> sudoku.SudokuEpisode:
        return sudoku.generate(seed, blanks=self.blanks)

    def legal(self, ep) -> frozenset:
        return sudoku.legal(ep)

    def apply(self, ep, action, seed: int, ply: int):
        return sudoku.apply(ep, action)

    def is_terminal(self, ep) -> bool:
        return sudoku.terminal(ep)

    def render(self, ep) -> str:
        return sudoku.render(ep.current)

    def verdict(self, ep, action) -> VerifierVerdict:
        return verify_fill(SolutionRef(ep.solution), action, ep.current)

    def optimal_set(self, ep) -> frozenset:
        return oracle_valid_constraint(ep)

    def outcome(self, ep, forfeited: bool = False, truncated: bool = False) -> Outcome:
        success, cr = sudoku.metrics(ep, forfeited=forfeited or truncated)
        return Outcome(success=success, completion_rate=cr, forfeited=forfeited)

    def replay_states(self, traj: Trajectory) -> List[sudoku.SudokuEpisode]:
        states = []
        ep = self.reset(traj.seed)
        for rec in traj.turns:
            states.append(ep)
            try:
                ep = sudoku.apply(ep, rec.action)
            except Exception as exc:
                raise ReplayError(f"turn {rec.turn_index}: {exc}") from exc
        return states

    def rollout_return(self, ep, policy, seed: int) -> float:
        rng = random.Random(derive_seed(seed, _ROLLOUT_STREAM))
        steps = 0
        while not sudoku.terminal(ep) and steps < self.horizon:
            action = policy.choose(self, ep, rng)
            ep = sudoku.apply(ep, action)
            steps += 1
        return float(sudoku.metrics(ep)[0])

    def realized_return(self, traj: Trajectory) -> float:
        return float(traj.outcome.success)


@dataclass
class MinesweeperAdapter:
    """Minesweeper boards sampled per seed; the verifier enumerates the
    posterior exactly at every step."""

    rows: int = 5
    cols: int = 5
    n_mines: int = 5
    flood_fill: bool = False
    horizon: int = 60
    kind = EnvKind.MINESWEEPER

    def reset(self, seed: int) -> minesweeper.MineBoard:
        return minesweeper.initial(
            seed, self.rows, self.cols, self.n_mines, self.flood_fill
        )

    def legal(self, board) -> frozenset:
        return minesweeper.legal(board)

    def apply(self, board, action, seed: int, ply: int):
        return minesweeper.apply(board, action)

    def is_terminal(self, board) -> bool:
        return board.status != minesweeper.ONGOING

    def render(self, board) -> str:
        return minesweeper.render(board)

    def verdict(self, board, action) -> VerifierVerdict:
        return verdict_probabilistic(board, action)

    def optimal_set(self, board) -> frozenset:
        pm = enumerate_consistent(board)
        return full_valid_set(board, pm)

    def outcome(self, board, forfeited: bool = False, truncated: bool = False) -> Outcome:
        success, cr = minesweeper.metrics(board, forfeited=forfeited or truncated)
        return Outcome(success=success, completion_rate=cr, forfeited=forfeited)

    def replay_states(self, traj: Trajectory) -> List[minesweeper.MineBoard]:
        states = []
        board = self.reset(traj.seed)
        for rec in traj.turns:
            states.append(board)
            try:
                board = minesweeper.apply(board, rec.action)
            except Exception as exc:
                raise ReplayError(f"turn {rec.turn_index}: {exc}") from exc
        return states

    def rollout_return(self, board, policy, seed: int) -> float:
        rng = random.Random(derive_seed(seed, _ROLLOUT_STREAM))
        steps = 0
        while board.status == minesweeper.ONGOING and steps < self.horizon:
            action = policy.choose(self, board, rng)
            board = minesweeper.apply(board, action)
            steps += 1
        return float(board.status == minesweeper.WON)

    def realized_return(self, traj: Trajectory) -> float:
        return float(traj.outcome.success)


def make_adapter(
    env: EnvKind,
    opponent=None,
    seat: str = "first",
    verifier_cfg: Optional[SearchVerdictConfig] = None,
):
    """Adapter factory used by the harness, the CLI, and the server."""
    if env is EnvKind.TICTACTOE:
        from .policies import MctsPlayerPolicy

        return TictactoeAdapter(
            opponent=opponent or MctsPlayerPolicy(),
            protagonist="X" if seat == "first" else "O",
            verifier_cfg=verifier_cfg or SearchVerdictConfig(),
        )
    if env is EnvKind.SUDOKU:
        return SudokuAdapter()
    if env is EnvKind.MINESWEEPER:
        return MinesweeperAdapter()
    raise ValueError(f"unknown environment {env!r}")
