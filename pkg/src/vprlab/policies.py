"""Scripted policies for episode generation and evaluation.

Policies choose actions through the adapter interface: they may inspect the
legal set and the exact-oracle set, never hidden state. Oracle followers
break ties uniformly at random.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple, Union

from .core import Action, action_token
from .search_oracle import SearchStats, SearchVerdictConfig, best_move, mcts_search
from .seeding import derive_seed
from .tictactoe import TttState


def _pick(actions, rng: random.Random) -> Action:
    ordered = sorted(actions, key=action_token)
    return ordered[rng.randrange(len(ordered))]


class UniformRandomPolicy:
    """Uniform choice over the legal set."""

    tag = "uniform_random"

    def choose(self, adapter, state, rng: random.Random) -> Action:
        return _pick(adapter.legal(state), rng)


class OracleFollowingPolicy:
    """Uniform choice within the exact-oracle set (the Optimal row)."""

    tag = "oracle_following"

    def choose(self, adapter, state, rng: random.Random) -> Action:
        return _pick(adapter.optimal_set(state), rng)


@dataclass
class EpsilonOraclePolicy:
    """Oracle-following with probability 1-epsilon, uniform otherwise."""

    epsilon: float
    tag = "epsilon_oracle"

    def __post_init__(self) -> None:
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0,1]")

    def choose(self, adapter, state, rng: random.Random) -> Action:
        if rng.random() < self.epsilon:
            return _pick(adapter.legal(state), rng)
        return _pick(adapter.optimal_set(state), rng)


@dataclass
class MctsPlayerPolicy:
    """Tic-tac-toe player backed by the tree search, robust-child selection.

    The search seed derives from the position and ``seed_base`` alone, so the
    player is a fixed deterministic opponent and searches can be cached
    across games; tie-breaking among equally visited moves uses the per-game
    stream.
    """

    cfg: SearchVerdictConfig = field(default_factory=SearchVerdictConfig)
    seed_base: int = 0
    tag = "mcts_player"
    _cache: Dict[Tuple[int, int], SearchStats] = field(
        default_factory=dict, repr=False
    )

    def search(self, state: TttState) -> SearchStats:
        key = (state.x_mask, state.o_mask)
        stats = self._cache.get(key)
        if stats is None:
            seed = derive_seed(self.seed_base, state.x_mask, state.o_mask)
            stats = mcts_search(
                state,
                SearchVerdictConfig(
                    n_simulations=self.cfg.n_simulations,
                    uct_c=self.cfg.uct_c,
                    tie_tolerance=self.cfg.tie_tolerance,
                    seed=seed,
                ),
            )
            self._cache[key] = stats
        return stats

    def choose(self, adapter, state, rng: random.Random) -> Action:
        if not isinstance(state, TttState):
            raise TypeError("mcts_player only plays tic-tac-toe")
        return best_move(self.search(state), rng)


@dataclass
class ScriptedReplayPolicy:
    """Plays a fixed list of actions (or raw response texts) in order."""

    items: Sequence[Union[Action, str]]
    tag = "scripted_replay"
    _cursor: int = 0

    def choose(self, adapter, state, rng: random.Random) -> Union[Action, str]:
        if self._cursor >= len(self.items):
            raise IndexError("scripted replay ran out of actions")
        item = self.items[self._cursor]
        self._cursor += 1
        return item


Policy = Union[
    UniformRandomPolicy,
    OracleFollowingPolicy,
    EpsilonOraclePolicy,
    MctsPlayerPolicy,
    ScriptedReplayPolicy,
]


def make_policy(tag: str, **kwargs) -> Policy:
    """Build a policy from its tag; used by the CLI and the server."""
    if tag == "uniform_random":
        return UniformRandomPolicy()
    if tag == "oracle_following":
        return OracleFollowingPolicy()
    if tag == "epsilon_oracle":
        return EpsilonOraclePolicy(epsilon=float(kwargs.get("epsilon", 0.1)))
    if tag == "mcts_player":
        cfg = SearchVerdictConfig(
            n_simulations=int(kwargs.get("n_simulations", 10000)),
            seed=int(kwargs.get("seed", 0)),
        )
        return MctsPlayerPolicy(cfg=cfg, seed_base=int(kwargs.get("seed", 0)))
    raise ValueError(f"unknown policy tag {tag!r}")
