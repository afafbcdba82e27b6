"""Posterior-based verifier for minesweeper: exact enumeration of the mine
configurations consistent with the revealed digits.

Counting is exact-integer throughout. Cells adjacent to a revealed digit
(the frontier) are branched over with constraint pruning; the remaining
interior cells contribute binomial closures, so the full 5x5/5-mine case
stays cheap. Probabilities come out as exact rationals, which makes
minimum/one comparisons noise-free. Flags never constrain the enumeration;
they only affect which actions are candidates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, List, Tuple

from .core import Flag, Reveal, VerifierVerdict
from .errors import (
    IllegalMoveError,
    InconsistentObservationError,
    TerminalError,
)
from .minesweeper import ONGOING, Cell, MineBoard, legal, observation


@dataclass(frozen=True)
class PosteriorMap:
    """Per-cell mine-membership counts over all consistent configurations."""

    rows: int
    cols: int
    remaining_mines: int
    config_count: int
    membership: Dict[Cell, int]

    def probability(self, cell: Cell) -> Fraction:
        """Exact posterior mine probability of an unrevealed cell."""
        return Fraction(self.membership[cell], self.config_count)

    @property
    def cells(self) -> Tuple[Cell, ...]:
        return tuple(sorted(self.membership))

    def as_floats(self) -> Dict[Cell, float]:
        return {cell: float(self.probability(cell)) for cell in self.membership}


def posterior_from_observation(
    rows: int,
    cols: int,
    n_mines: int,
    digits: Dict[Cell, int],
) -> PosteriorMap:
    """Enumerate every placement of ``n_mines`` over the unrevealed cells that
    reproduces all revealed adjacency digits exactly."""
    revealed = set(digits)
    unrevealed = [
        (r, c) for r in range(rows) for c in range(cols) if (r, c) not in revealed
    ]

    def neighbors(cell: Cell):
        r, c = cell
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == dc == 0:
                    continue
                rr, cc = r + dr, c + dc
                if 0 <= rr < rows and 0 <= cc < cols:
                    yield (rr, cc)

    # Constraint cells: unrevealed neighbors of each revealed digit.
    constraints: List[Tuple[int, List[int]]] = []
    frontier_index: Dict[Cell, int] = {}
    per_cell_constraints: Dict[int, List[int]] = {}
    for cell, digit in sorted(digits.items()):
        members = []
        for nb in neighbors(cell):
            if nb in revealed:
                continue
            if nb not in frontier_index:
                frontier_index[nb] = len(frontier_index)
                per_cell_constraints[frontier_index[nb]] = []
            members.append(frontier_index[nb])
        cid = len(constraints)
        constraints.append((digit, members))
        for idx in members:
            per_cell_constraints[idx].append(cid)

    frontier = sorted(frontier_index, key=frontier_index.get)
    frontier_order = sorted(
        range(len(frontier)), key=lambda i: -len(per_cell_constraints[i])
    )
    interior = [cell for cell in unrevealed if cell not in frontier_index]
    n_interior = len(interior)

    need = [digit for digit, _ in constraints]
    slack = [len(members) for _, members in constraints]
    if any(d < 0 or d > s for d, (_, members), s in zip(need, constraints, slack)):
        raise InconsistentObservationError("a digit exceeds its hidden neighbors")

    config_count = 0
    membership = {cell: 0 for cell in unrevealed}
    assigned: List[bool] = [False] * len(frontier)

    def close(frontier_mines: int) -> None:
        nonlocal config_count
        rest = n_mines - frontier_mines
        if rest < 0 or rest > n_interior:
            return
        ways = comb(n_interior, rest)
        if ways == 0:
            return
        config_count += ways
        for i, is_mine in enumerate(assigned):
            if is_mine:
                membership[frontier[i]] += ways
        if rest > 0:
            interior_ways = comb(n_interior - 1, rest - 1)
            for cell in interior:
                membership[cell] += interior_ways

    def recurse(pos: int, frontier_mines: int) -> None:
        if pos == len(frontier_order):
            if all(n == 0 for n in need):
                close(frontier_mines)
            return
        idx = frontier_order[pos]
        touched = per_cell_constraints[idx]
        for is_mine in (False, True):
            ok = True
            for cid in touched:
                slack[cid] -= 1
                if is_mine:
                    need[cid] -= 1
                if need[cid] < 0 or need[cid] > slack[cid]:
                    ok = False
            if ok and frontier_mines + is_mine <= n_mines:
                assigned[idx] = is_mine
                recurse(pos + 1, frontier_mines + is_mine)
                assigned[idx] = False
            for cid in touched:
                slack[cid] += 1
                if is_mine:
                    need[cid] += 1

    recurse(0, 0)
    if config_count == 0:
        raise InconsistentObservationError(
            "no mine configuration matches the revealed digits"
        )
    return PosteriorMap(
        rows=rows,
        cols=cols,
        remaining_mines=n_mines,
        config_count=config_count,
        membership=membership,
    )


_posterior_cache: Dict[tuple, PosteriorMap] = {}
_POSTERIOR_CACHE_MAX = 200_000


def enumerate_consistent(board: MineBoard) -> PosteriorMap:
    """Posterior map over the board's observable part.

    Maps are pure functions of the observation, so they are memoized; the
    verifier and the oracle-following policy hit the same board states
    constantly.
    """
    digits = observation(board)
    key = (board.rows, board.cols, board.n_mines, tuple(sorted(digits.items())))
    pm = _posterior_cache.get(key)
    if pm is None:
        if len(_posterior_cache) >= _POSTERIOR_CACHE_MAX:
            _posterior_cache.clear()
        pm = posterior_from_observation(board.rows, board.cols, board.n_mines, digits)
        _posterior_cache[key] = pm
    return pm


def oracle_valid_probabilistic(board: MineBoard, pm: PosteriorMap) -> frozenset:
    """Minimum-posterior reveals plus certain-mine flags.

    The reveal minimum is taken over unrevealed, unflagged cells with exact
    rational comparison; flag placements are valid only at probability one.
    """
    if board.status != ONGOING:
        raise TerminalError(f"board is {board.status}")
    candidates = [cell for cell in pm.membership if cell not in board.flags]
    actions = []
    if candidates:
        low = min(pm.probability(cell) for cell in candidates)
        actions.extend(Reveal(*cell) for cell in candidates if pm.probability(cell) == low)
    actions.extend(
        Flag(*cell)
        for cell in pm.membership
        if cell not in board.flags and pm.probability(cell) == 1
    )
    return frozenset(actions)


def full_valid_set(board: MineBoard, pm: PosteriorMap) -> frozenset:
    """Oracle-valid set including unflag toggles.

    Removing a flag is treated as valid exactly when the flagged cell is not
    a certain mine (posterior < 1); unflagging a certain mine contradicts the
    flag rule.
    """
    base = set(oracle_valid_probabilistic(board, pm))
    base.update(
        Flag(*cell) for cell in board.flags if pm.probability(cell) < 1
    )
    return frozenset(base)


def verdict_probabilistic(board: MineBoard, action) -> VerifierVerdict:
    """Binary verdict for a reveal or flag toggle under the current posterior."""
    if action not in legal(board):
        raise IllegalMoveError(f"{action} is not legal here")
    pm = enumerate_consistent(board)
    valid_set = full_valid_set(board, pm)
    meta = {
        "config_count": pm.config_count,
        "remaining_mines": pm.remaining_mines,
    }
    return VerifierVerdict.for_action(action, valid_set, oracle_meta=meta)
