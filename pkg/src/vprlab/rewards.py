"""Reward constructors and the turn-level advantage pipeline.

Three reward modes over the same trajectories: dense per-turn verifier bits,
sparse terminal outcomes, and Monte Carlo process rewards built from value
differences of consecutive states. Advantages are normalized per turn across
a group of trajectories, with a global fallback once too few trajectories
remain active at a turn. No discounting anywhere: a turn's advantage depends
only on that turn's rewards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence

from .core import EnvKind, Trajectory
from .errors import (
    EmptyBatchError,
    MissingVerdictError,
    NonTerminalError,
    ShapeError,
)
from .seeding import derive_seed


class RewardMode(str, Enum):
    VPR = "vpr"
    OUTCOME = "outcome"
    MCPR = "mcpr"


def vpr_rewards(traj: Trajectory) -> List[int]:
    """Per-turn verifier bits: reward_t = verdict.valid."""
    rewards = []
    for rec in traj.turns:
        if rec.verdict is None:
            raise MissingVerdictError(f"turn {rec.turn_index} lacks a verdict")
        rewards.append(rec.verdict.valid)
    return rewards


def outcome_rewards(traj: Trajectory) -> List[float]:
    """Sparse rewards: zero everywhere except the terminal turn.

    The terminal reward is the success indicator, generalized to the
    win/draw/loss return for tic-tac-toe where returns are the reported
    metric.
    """
    if traj.outcome is None:
        raise NonTerminalError("trajectory has no terminal outcome")
    if not traj.turns:
        return []
    if traj.env is EnvKind.TICTACTOE and traj.outcome.game_return is not None:
        final = float(traj.outcome.game_return)
    else:
        final = float(traj.outcome.success)
    return [0.0] * (len(traj.turns) - 1) + [final]


def mcpr_rewards(
    traj: Trajectory,
    adapter,
    policy,
    m_rollouts: int = 100,
    seed: int = 0,
) -> List[float]:
    """Monte Carlo process rewards: value differences of consecutive states.

    Every recorded state is re-derived from the trajectory (adapter replay),
    and its value is estimated as the mean terminal return of ``m_rollouts``
    playouts under ``policy``. The value after the final action is the
    realized terminal return, so the rewards telescope to
    ``realized - V(s_1)`` exactly.
    """
    if m_rollouts < 1:
        raise ValueError("m_rollouts must be >= 1")
    if traj.outcome is None:
        raise NonTerminalError("trajectory has no terminal outcome")
    if not traj.turns:
        return []
    states = adapter.replay_states(traj)
    values = []
    for t, state in enumerate(states):
        total = 0.0
        for k in range(m_rollouts):
            rollout_seed = derive_seed(seed, t, k)
            total += adapter.rollout_return(state, policy, rollout_seed)
        values.append(total / m_rollouts)
    realized = adapter.realized_return(traj)
    values.append(realized)
    return [values[t + 1] - values[t] for t in range(len(traj.turns))]


@dataclass(frozen=True)
class AdvantageBatch:
    """Per-turn group statistics and normalized advantages for one batch."""

    rewards: tuple
    advantages: tuple
    mu: tuple
    sigma: tuple
    active_count: tuple
    fallback: tuple
    mu_global: float
    sigma_global: float
    delta: float

    def to_records(self) -> List[dict]:
        """Flat per-(trajectory, turn) records for inspection or export."""
        out = []
        for i, (rs, advs) in enumerate(zip(self.rewards, self.advantages)):
            for t, (r, a) in enumerate(zip(rs, advs)):
                out.append(
                    {
                        "trajectory": i,
                        "turn": t + 1,
                        "reward": r,
                        "mu": self.mu[t],
                        "sigma": self.sigma[t],
                        "advantage": a,
                        "fallback": self.fallback[t],
                    }
                )
        return out


MIN_ACTIVE = 4


def normalize_advantages(
    groups: Sequence[Sequence[float]], delta: float = 1e-6
) -> AdvantageBatch:
    """Standardize rewards per turn across the batch.

    For each turn the mean and population standard deviation are taken over
    the trajectories still active at that turn; turns where fewer than
    ``MIN_ACTIVE`` remain fall back to the global mean and standard deviation
    over every (trajectory, turn) pair in the batch.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not groups:
        raise EmptyBatchError("batch has no trajectories")
    flat = [r for rs in groups for r in rs]
    if not flat:
        raise EmptyBatchError("batch has no turns")
    mu_g = sum(flat) / len(flat)
    sigma_g = math.sqrt(sum((r - mu_g) ** 2 for r in flat) / len(flat))
    max_t = max(len(rs) for rs in groups)
    mu, sigma, counts, fallback = [], [], [], []
    for t in range(max_t):
        active = [rs[t] for rs in groups if len(rs) > t]
        counts.append(len(active))
        if len(active) < MIN_ACTIVE:
            fallback.append(True)
            mu.append(mu_g)
            sigma.append(sigma_g)
        else:
            fallback.append(False)
            m = sum(active) / len(active)
            mu.append(m)
            sigma.append(math.sqrt(sum((r - m) ** 2 for r in active) / len(active)))
    advantages = tuple(
        tuple((rs[t] - mu[t]) / (sigma[t] + delta) for t in range(len(rs)))
        for rs in groups
    )
    return AdvantageBatch(
        rewards=tuple(tuple(rs) for rs in groups),
        advantages=advantages,
        mu=tuple(mu),
        sigma=tuple(sigma),
        active_count=tuple(counts),
        fallback=tuple(fallback),
        mu_global=mu_g,
        sigma_global=sigma_g,
        delta=delta,
    )


@dataclass(frozen=True)
class SurrogateInputs:
    """Importance ratios and advantages, ragged over (trajectory, turn)."""

    ratios: tuple
    advantages: tuple
    epsilon: float

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0,1)")
        if len(self.ratios) != len(self.advantages) or any(
            len(r) != len(a) for r, a in zip(self.ratios, self.advantages)
        ):
            raise ShapeError("ratios and advantages must have identical shapes")
        if any(rho <= 0 for row in self.ratios for rho in row):
            raise ValueError("importance ratios must be positive")


def clipped_surrogate(inp: SurrogateInputs) -> float:
    """Clipped-ratio objective: mean over trajectories of the per-trajectory
    sum of ``min(rho*A, clip(rho, 1-eps, 1+eps)*A)``."""
    if not inp.ratios:
        raise ShapeError("need at least one trajectory")
    lo, hi = 1 - inp.epsilon, 1 + inp.epsilon
    total = 0.0
    for ratios, advs in zip(inp.ratios, inp.advantages):
        total += sum(
            min(rho * a, max(lo, min(hi, rho)) * a) for rho, a in zip(ratios, advs)
        )
    return total / len(inp.ratios)
