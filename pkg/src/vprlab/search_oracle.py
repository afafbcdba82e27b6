"""Search-based verifier for tic-tac-toe: UCT tree search with proven-value
backpropagation, an exact negamax reference, and verifier-vs-exact
disagreement measurement.

The searcher augments plain UCT with subgame proving (win cuts plus
all-children collapse). Proven root moves carry exact values, so equally
optimal moves tie exactly instead of being separated by rollout noise; the
budget stops early once every root move is proven. Verdicts extracted from
the argmax then converge to the exact optimal set as the simulation budget
grows, which is what makes the verifier's disagreement rate measurable and
small at the default budget.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .core import Place
from .errors import EmptyInputError, TerminalError
from .seeding import derive_seed
from .tictactoe import FULL_MASK, ONGOING, TttState, has_line


def _terminal_value(own: int, opp: int) -> Optional[int]:
    """Exact value for the player to move, or None while ongoing."""
    if has_line(opp):
        return -1
    if (own | opp) == FULL_MASK:
        return 0
    return None


def _playout(own: int, opp: int, rng: random.Random) -> int:
    """Uniform-random playout; value from the perspective of ``own`` to move."""
    sign = 1
    while True:
        occupied = own | opp
        empties = [i for i in range(9) if not (occupied >> i) & 1]
        if not empties:
            return 0
        own |= 1 << rng.choice(empties)
        if has_line(own):
            return sign
        own, opp, sign = opp, own, -sign


class _Node:
    __slots__ = ("own", "opp", "move", "children", "visits", "value_sum", "proven")

    def __init__(self, own: int, opp: int, move: int = -1):
        self.own = own
        self.opp = opp
        self.move = move
        self.children: Optional[List["_Node"]] = None
        self.visits = 0
        self.value_sum = 0.0
        self.proven: Optional[int] = None

    def expand(self) -> None:
        occupied = self.own | self.opp
        self.children = [
            _Node(self.opp, self.own | (1 << i), i)
            for i in range(9)
            if not (occupied >> i) & 1
        ]

    def mean(self) -> float:
        return self.value_sum / self.visits


@dataclass(frozen=True)
class SearchVerdictConfig:
    n_simulations: int = 10000
    uct_c: float = math.sqrt(2)
    tie_tolerance: float = 1e-9
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_simulations < 1:
            raise ValueError("n_simulations must be >= 1")
        if self.tie_tolerance < 0:
            raise ValueError("tie_tolerance must be >= 0")


@dataclass(frozen=True)
class SearchStats:
    """Root-level search summary, all values from the to-move perspective."""

    actions: Tuple[Place, ...]
    mean_value: Dict[Place, Optional[float]]
    visits: Dict[Place, int]
    proven_value: Dict[Place, Optional[int]]
    total_simulations: int

    def value(self, action: Place) -> Optional[float]:
        """Proven value when available, otherwise the running mean."""
        proven = self.proven_value[action]
        if proven is not None:
            return float(proven)
        return self.mean_value[action]


def _select_uct(parent_visits: int, kids: List[_Node], c: float, rng: random.Random) -> _Node:
    fresh = [k for k in kids if k.visits == 0]
    if fresh:
        return rng.choice(fresh)
    log_n = math.log(parent_visits + 1)
    best, best_ucb = kids[0], -math.inf
    for k in kids:
        ucb = -k.mean() + c * math.sqrt(log_n / k.visits)
        if ucb > best_ucb:
            best_ucb, best = ucb, k
    return best


def _propagate_proofs(path: List[_Node], root: _Node) -> None:
    for nd in reversed(path[:-1]):
        if nd is root or nd.proven is not None or nd.children is None:
            continue
        if any(k.proven is not None and -k.proven == 1 for k in nd.children):
            nd.proven = 1
        elif all(k.proven is not None for k in nd.children):
            nd.proven = max(-k.proven for k in nd.children)


def mcts_search(state: TttState, cfg: SearchVerdictConfig) -> SearchStats:
    """Run up to ``cfg.n_simulations`` UCT iterations from ``state``.

    Deterministic in ``cfg.seed``. Stops early once every root move is
    proven, since further simulations cannot change any verdict.
    """
    if state.status != ONGOING:
        raise TerminalError("cannot search a finished game")
    own, opp = (
        (state.x_mask, state.o_mask)
        if state.to_move == "X"
        else (state.o_mask, state.x_mask)
    )
    rng = random.Random(cfg.seed)
    root = _Node(own, opp)
    root.expand()
    executed = 0
    for _ in range(cfg.n_simulations):
        unproven_root = [k for k in root.children if k.proven is None]
        if not unproven_root:
            break
        executed += 1
        node = _select_uct(root.visits, unproven_root, cfg.uct_c, rng)
        path = [root, node]
        while True:
            if node.proven is not None:
                value = node.proven
                break
            terminal = _terminal_value(node.own, node.opp)
            if terminal is not None:
                node.proven = terminal
                value = terminal
                break
            if node.children is None:
                node.expand()
            if any(k.proven is not None and -k.proven == 1 for k in node.children):
                node.proven = 1
                value = 1
                break
            unproven = [k for k in node.children if k.proven is None]
            if not unproven:
                node.proven = max(-k.proven for k in node.children)
                value = node.proven
                break
            kid = _select_uct(node.visits, unproven, cfg.uct_c, rng)
            path.append(kid)
            if kid.visits == 0 and kid.proven is None:
                terminal = _terminal_value(kid.own, kid.opp)
                if terminal is not None:
                    kid.proven = terminal
                    value = terminal
                else:
                    value = _playout(kid.own, kid.opp, rng)
                node = kid
                break
            node = kid
        backup = float(value)
        for nd in reversed(path):
            nd.visits += 1
            nd.value_sum += backup
            backup = -backup
        _propagate_proofs(path, root)

    mark = state.to_move
    actions, means, visits, proven = [], {}, {}, {}
    for kid in root.children:
        act = Place(mark, kid.move // 3, kid.move % 3)
        actions.append(act)
        visits[act] = kid.visits
        # child stats are from the opponent's perspective; negate for the mover
        means[act] = -kid.mean() if kid.visits else None
        proven[act] = -kid.proven if kid.proven is not None else None
    return SearchStats(
        actions=tuple(actions),
        mean_value=means,
        visits=visits,
        proven_value=proven,
        total_simulations=executed,
    )


def oracle_set_from_stats(stats: SearchStats, tie_tolerance: float) -> frozenset:
    """Actions whose value is within ``tie_tolerance`` of the best value."""
    scored = [(a, stats.value(a)) for a in stats.actions if stats.value(a) is not None]
    best = max(v for _, v in scored)
    return frozenset(a for a, v in scored if v >= best - tie_tolerance)


def search_oracle_set(state: TttState, cfg: SearchVerdictConfig) -> frozenset:
    """Oracle-valid set: the argmax of search values at the root."""
    return oracle_set_from_stats(mcts_search(state, cfg), cfg.tie_tolerance)


def best_move(stats: SearchStats, rng: Optional[random.Random] = None) -> Place:
    """Robust-child move choice for play: proven wins first, never a proven
    loss while an alternative exists, most-visited otherwise."""
    rng = rng or random.Random(0)
    wins = [a for a in stats.actions if stats.proven_value[a] == 1]
    if wins:
        pool = wins
    else:
        pool = [a for a in stats.actions if stats.proven_value[a] != -1] or list(
            stats.actions
        )
    top = max(stats.visits[a] for a in pool)
    candidates = [a for a in pool if stats.visits[a] == top]
    return candidates[rng.randrange(len(candidates))]


_MINIMAX_MEMO: Dict[Tuple[int, int], Tuple[int, Tuple[int, ...]]] = {}


def _negamax(own: int, opp: int) -> Tuple[int, Tuple[int, ...]]:
    key = (own, opp)
    hit = _MINIMAX_MEMO.get(key)
    if hit is not None:
        return hit
    terminal = _terminal_value(own, opp)
    if terminal is not None:
        result = (terminal, ())
    else:
        occupied = own | opp
        best = -2
        moves: List[int] = []
        for i in range(9):
            if (occupied >> i) & 1:
                continue
            child_own = own | (1 << i)
            value = 1 if has_line(child_own) else -_negamax(opp, child_own)[0]
            if value > best:
                best, moves = value, [i]
            elif value == best:
                moves.append(i)
        result = (best, tuple(moves))
    _MINIMAX_MEMO[key] = result
    return result


def minimax(state: TttState) -> Tuple[int, frozenset]:
    """Exact game value for the player to move and every optimal action."""
    own, opp = (
        (state.x_mask, state.o_mask)
        if state.to_move == "X"
        else (state.o_mask, state.x_mask)
    )
    value, moves = _negamax(own, opp)
    mark = state.to_move
    return value, frozenset(Place(mark, m // 3, m % 3) for m in moves)


def reachable_states(include_terminal: bool = False) -> List[TttState]:
    """Every position reachable from the empty board under legal play."""
    seen = set()
    ordered: List[Tuple[int, int]] = []
    stack = [(0, 0)]
    while stack:
        x, o = stack.pop()
        if (x, o) in seen:
            continue
        seen.add((x, o))
        state = TttState(x, o)
        terminal = state.status != ONGOING
        if include_terminal or not terminal:
            ordered.append((x, o))
        if terminal:
            continue
        occupied = x | o
        mover_is_x = state.to_move == "X"
        for i in range(9):
            if not (occupied >> i) & 1:
                bit = 1 << i
                stack.append((x | bit, o) if mover_is_x else (x, o | bit))
    ordered.sort()
    return [TttState(x, o) for x, o in ordered]


def sample_positions(n: int, seed: int) -> List[TttState]:
    """Uniform sample (without replacement) from the reachable ongoing states."""
    pool = reachable_states()
    rng = random.Random(derive_seed(seed, len(pool)))
    return rng.sample(pool, n)


def disagreement_rate(cfg: SearchVerdictConfig, positions: List[TttState]) -> float:
    """Fraction of (position, uniformly sampled action) pairs on which the
    search verdict contradicts the exact-optimal verdict.

    The search seed and the sampled action for each position derive from
    ``cfg.seed`` and the position alone, so sweeps over ``n_simulations``
    compare the same pairs.
    """
    if not positions:
        raise EmptyInputError("need at least one position")
    disagreements = 0
    for state in positions:
        per_pos = derive_seed(cfg.seed, state.x_mask, state.o_mask)
        stats = mcts_search(
            state,
            SearchVerdictConfig(
                n_simulations=cfg.n_simulations,
                uct_c=cfg.uct_c,
                tie_tolerance=cfg.tie_tolerance,
                seed=per_pos,
            ),
        )
        search_set = oracle_set_from_stats(stats, cfg.tie_tolerance)
        _, exact_set = minimax(state)
        legal_actions = sorted(
            stats.actions, key=lambda a: (a.row, a.col)
        )
        rng = random.Random(derive_seed(per_pos, 1))
        action = legal_actions[rng.randrange(len(legal_actions))]
        if (action in search_set) != (action in exact_set):
            disagreements += 1
    return disagreements / len(positions)
