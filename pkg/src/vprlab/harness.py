"""Episode runner, evaluation protocol, and trajectory persistence.

Episodes are deterministic in (adapter config, seed): policy tie-breaks,
opponent choices, and verifier searches all derive their randomness from the
episode seed or the position. Malformed or illegal actions forfeit the
episode; forfeited episodes carry no record for the offending turn, only a
flagged outcome.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from random import Random
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .adapters import make_adapter
from .core import (
    EnvKind,
    Trajectory,
    TurnRecord,
    append_turn,
    parse_action,
    trajectory_from_dict,
    trajectory_to_dict,
)
from .errors import FormatError, OutOfRangeError
from .seeding import derive_seed

_POLICY_STREAM = 303


def run_episode(adapter, policy, seed: int) -> Trajectory:
    """Play one episode to termination, horizon, or forfeit.

    Every executed turn carries the observation the agent saw, the verifier
    verdict for (state, action), and the dense reward bit.
    """
    state = adapter.reset(seed)
    traj = Trajectory(env=adapter.kind, seed=seed)
    forfeited = False
    t = 0
    while not adapter.is_terminal(state) and t < adapter.horizon:
        t += 1
        observation = adapter.render(state)
        rng = Random(derive_seed(seed, _POLICY_STREAM, t))
        move = policy.choose(adapter, state, rng)
        if isinstance(move, str):
            try:
                action = parse_action(move, adapter.kind)
            except (FormatError, OutOfRangeError):
                forfeited = True
                break
        else:
            action = move
        if action not in adapter.legal(state):
            forfeited = True
            break
        verdict = adapter.verdict(state, action)
        state = adapter.apply(state, action, seed=seed, ply=t)
        done = adapter.is_terminal(state) or t >= adapter.horizon
        traj = append_turn(
            traj,
            TurnRecord(
                turn_index=t,
                observation_text=observation,
                action=action,
                verdict=verdict,
                reward_vpr=verdict.valid,
                terminal=done,
            ),
        )
    truncated = not forfeited and not adapter.is_terminal(state)
    outcome = adapter.outcome(state, forfeited=forfeited, truncated=truncated)
    return replace(traj, outcome=outcome)


def verify_trajectory(adapter, traj: Trajectory) -> List[int]:
    """Recompute every verdict of a logged trajectory from scratch."""
    states = adapter.replay_states(traj)
    return [
        adapter.verdict(state, rec.action).valid
        for state, rec in zip(states, traj.turns)
    ]


@dataclass(frozen=True)
class EvalConfig:
    env: EnvKind
    n_games: int = 1024
    n_runs: int = 5
    seat: str = "first"
    base_seed: int = 0
    opponent: Optional[object] = None

    def __post_init__(self) -> None:
        if self.n_games < 1 or self.n_runs < 1:
            raise ValueError("n_games and n_runs must be >= 1")
        if self.seat not in ("first", "second"):
            raise ValueError("seat must be 'first' or 'second'")


@dataclass(frozen=True)
class EvalSummary:
    """Per-metric mean and standard deviation across evaluation runs."""

    env: EnvKind
    n_games: int
    n_runs: int
    seat: str
    metrics: Dict[str, Tuple[float, float]]
    per_run: Dict[str, Tuple[float, ...]]

    def format_lines(self) -> List[str]:
        label = self.env.value + (f" ({self.seat})" if self.env is EnvKind.TICTACTOE else "")
        lines = [f"{label}: {self.n_runs} runs x {self.n_games} games"]
        for name, (mean, std) in self.metrics.items():
            lines.append(f"  {name}: {mean:.2f} +/- {std:.2f}")
        return lines


def _run_metrics(env: EnvKind, outcomes) -> Dict[str, float]:
    n = len(outcomes)
    if env is EnvKind.TICTACTOE:
        return {"return": sum(o.game_return for o in outcomes) / n}
    return {
        "sr": 100.0 * sum(o.success for o in outcomes) / n,
        "cr": 100.0 * sum(o.completion_rate for o in outcomes) / n,
    }


def evaluate(cfg: EvalConfig, policy) -> EvalSummary:
    """Evaluation protocol: ``n_runs`` independent runs of ``n_games`` games,
    reporting mean and standard deviation across runs."""
    adapter = make_adapter(cfg.env, opponent=cfg.opponent, seat=cfg.seat)
    per_run: Dict[str, List[float]] = {}
    for run in range(cfg.n_runs):
        outcomes = []
        for game in range(cfg.n_games):
            seed = derive_seed(cfg.base_seed, run, game)
            outcomes.append(run_episode(adapter, policy, seed).outcome)
        for name, value in _run_metrics(cfg.env, outcomes).items():
            per_run.setdefault(name, []).append(value)
    metrics = {}
    for name, values in per_run.items():
        mean = sum(values) / len(values)
        std = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
        metrics[name] = (mean, std)
    return EvalSummary(
        env=cfg.env,
        n_games=cfg.n_games,
        n_runs=cfg.n_runs,
        seat=cfg.seat,
        metrics=metrics,
        per_run={k: tuple(v) for k, v in per_run.items()},
    )


def persist_trajectories(trajs: Sequence[Trajectory], path: Union[str, Path]) -> int:
    """Write one JSON object per line; returns the number written."""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8") as fh:
            for traj in trajs:
                fh.write(json.dumps(trajectory_to_dict(traj)) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write trajectories to {path}: {exc}") from exc
    return len(trajs)


def load_trajectories(path: Union[str, Path]) -> List[Trajectory]:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise OSError(f"cannot read trajectories from {path}: {exc}") from exc
    return [trajectory_from_dict(json.loads(line)) for line in lines if line.strip()]
