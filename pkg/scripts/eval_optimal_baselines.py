#!/usr/bin/env python3
"""Evaluate the oracle-following (optimal) and uniform-random baselines on all
three environments with the fixed protocol, printing one summary block each.

This is the desk-scale reference table: tic-tac-toe reports mean return per
seat against the strong search opponent; sudoku and minesweeper report
success and completion rates.
"""

import argparse
import time

from vprlab.core import EnvKind
from vprlab.harness import EvalConfig, evaluate
from vprlab.policies import make_policy


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--games", type=int, default=1024)
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--policies", default="oracle_following,uniform_random")
    args = ap.parse_args()

    for tag in args.policies.split(","):
        print(f"=== policy: {tag} ===")
        for env in EnvKind:
            seats = ["first", "second"] if env is EnvKind.TICTACTOE else ["first"]
            for seat in seats:
                opponent = (
                    make_policy("mcts_player", n_simulations=10000, seed=args.seed)
                    if env is EnvKind.TICTACTOE
                    else None
                )
                cfg = EvalConfig(
                    env=env,
                    n_games=args.games,
                    n_runs=args.runs,
                    seat=seat,
                    base_seed=args.seed,
                    opponent=opponent,
                )
                started = time.time()
                summary = evaluate(cfg, make_policy(tag, seed=args.seed))
                for line in summary.format_lines():
                    print(line)
                print(f"  [{time.time() - started:.1f}s]")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
