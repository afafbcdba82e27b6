#!/usr/bin/env python3
"""Sweep the search verifier's simulation budget and measure (a) its
disagreement rate against the exact minimax oracle and (b) the playing
strength of a search player at that budget versus the strong default
opponent. Writes a CSV when --out is given.
"""

import argparse
import csv
import sys

from vprlab.core import EnvKind
from vprlab.harness import EvalConfig, evaluate
from vprlab.policies import make_policy
from vprlab.search_oracle import SearchVerdictConfig, disagreement_rate, sample_positions


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sims", default="100,1000,10000")
    ap.add_argument("--positions", type=int, default=200)
    ap.add_argument("--eval-games", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="CSV output path")
    args = ap.parse_args()

    positions = sample_positions(args.positions, seed=args.seed)
    rows = []
    for n_sims in (int(x) for x in args.sims.split(",")):
        cfg = SearchVerdictConfig(n_simulations=n_sims, seed=args.seed)
        eps = disagreement_rate(cfg, positions)
        row = {"n_simulations": n_sims, "eps_bar": eps}
        for seat in ("first", "second"):
            player = make_policy("mcts_player", n_simulations=n_sims, seed=args.seed + 1)
            opponent = make_policy("mcts_player", n_simulations=10000, seed=args.seed)
            summary = evaluate(
                EvalConfig(
                    env=EnvKind.TICTACTOE,
                    n_games=args.eval_games,
                    n_runs=1,
                    seat=seat,
                    base_seed=args.seed,
                    opponent=opponent,
                ),
                player,
            )
            row[f"return_{seat}"] = summary.metrics["return"][0]
        rows.append(row)
        print(
            f"N={n_sims:>6}: eps_bar={eps:.4f}  "
            f"return 1st={row['return_first']:+.3f}  2nd={row['return_second']:+.3f}"
        )
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
