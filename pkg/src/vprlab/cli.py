"""Command-line interface.

Subcommands: ``play`` (run scripted episodes), ``eval`` (the fixed evaluation
protocol), ``ablate-oracle`` (verifier disagreement vs search budget),
``theory`` (gradient-identity reports), ``gen-sudoku`` (puzzle fixtures), and
``serve`` (the episode wire protocol).

Defaults can come from a config file of ``key = value`` lines (same names as
the long flags, underscores for dashes); explicit flags win. Set VPRLAB_LOG
to debug/info/warning to control verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .core import EnvKind
from .harness import EvalConfig, evaluate, persist_trajectories, run_episode
from .policies import make_policy
from .search_oracle import SearchVerdictConfig, disagreement_rate, sample_positions
from .seeding import derive_seed

log = logging.getLogger("vprlab")


def _read_config(path: str) -> dict:
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"config line without '=': {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _apply_config(subparsers: dict, argv) -> None:
    """Turn config-file values into typed defaults on every subcommand."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = _read_config(known.config)
    for sp in subparsers.values():
        overrides = {}
        for action in sp._actions:
            if action.dest in values:
                raw = values[action.dest]
                overrides[action.dest] = action.type(raw) if action.type else raw
        sp.set_defaults(**overrides)


def cmd_play(args) -> int:
    import random as _random

    from .adapters import make_adapter

    env = EnvKind(args.env)

    def adapter_for(game: int):
        opponent = None
        if env is EnvKind.TICTACTOE:
            tag = args.opponent
            if tag == "mixed":  # half random, half search opponents
                coin = _random.Random(derive_seed(args.seed, game, 55)).random()
                tag = "uniform_random" if coin < 0.5 else "mcts_player"
            opponent = make_policy(
                tag, n_simulations=args.opponent_sims, seed=args.seed
            )
        return make_adapter(env, opponent=opponent, seat=args.seat)

    policy = make_policy(args.policy, epsilon=args.epsilon, seed=args.seed)
    trajs = []
    for game in range(args.games):
        traj = run_episode(adapter_for(game), policy, derive_seed(args.seed, game))
        trajs.append(traj)
        log.info("game %d: %s", game, traj.outcome)
    succ = sum(t.outcome.success for t in trajs)
    print(f"{env.value}: {succ}/{len(trajs)} successes under {args.policy}")
    if env is EnvKind.TICTACTOE:
        mean_ret = sum(t.outcome.game_return for t in trajs) / len(trajs)
        print(f"mean return: {mean_ret:+.3f}")
    else:
        mean_cr = sum(t.outcome.completion_rate for t in trajs) / len(trajs)
        print(f"mean completion rate: {mean_cr:.3f}")
    if args.out:
        n = persist_trajectories(trajs, args.out)
        print(f"wrote {n} trajectories to {args.out}")
    return 0


def cmd_eval(args) -> int:
    env = EnvKind(args.env)
    if env is not EnvKind.TICTACTOE:
        seats = ["first"]  # seat only means something in the two-player game
    elif args.seat == "both":
        seats = ["first", "second"]
    else:
        seats = [args.seat]
    policy = make_policy(args.policy, epsilon=args.epsilon, seed=args.seed)
    for seat in seats:
        opponent = None
        if env is EnvKind.TICTACTOE:
            opponent = make_policy(
                "mcts_player", n_simulations=args.opponent_sims, seed=args.opponent_seed
            )
        cfg = EvalConfig(
            env=env,
            n_games=args.games,
            n_runs=args.runs,
            seat=seat,
            base_seed=args.seed,
            opponent=opponent,
        )
        summary = evaluate(cfg, policy)
        for line in summary.format_lines():
            print(line)
    return 0


def cmd_ablate_oracle(args) -> int:
    budgets = [int(n) for n in args.sims.split(",")]
    positions = sample_positions(args.positions, seed=args.seed)
    print(f"verifier disagreement vs exact oracle over {len(positions)} positions")
    rates = {}
    for n_sims in budgets:
        cfg = SearchVerdictConfig(n_simulations=n_sims, seed=args.seed)
        rates[n_sims] = disagreement_rate(cfg, positions)
        print(f"  N={n_sims:>6}: eps_bar = {rates[n_sims]:.4f}")
    if args.eval_games:
        from .harness import EvalConfig, evaluate

        print(f"mean return of the search player vs the strong opponent "
              f"({args.eval_games} games per seat)")
        for n_sims in budgets:
            player = make_policy("mcts_player", n_simulations=n_sims, seed=args.seed + 1)
            for seat in ("first", "second"):
                opponent = make_policy("mcts_player", n_simulations=10000, seed=args.seed)
                cfg = EvalConfig(
                    env=EnvKind.TICTACTOE,
                    n_games=args.eval_games,
                    n_runs=1,
                    seat=seat,
                    base_seed=args.seed,
                    opponent=opponent,
                )
                summary = evaluate(cfg, player)
                mean, _ = summary.metrics["return"]
                print(f"  N={n_sims:>6} {seat:>6}: return = {mean:+.3f}")
    return 0


def cmd_theory(args) -> int:
    import numpy as np

    from .theory import (
        OR_ESTIMATOR,
        VPR_ESTIMATOR,
        BernoulliRegime,
        bernoulli_closed_forms,
        bernoulli_closed_forms_exact,
        bias_bound_check,
        exact_gradient_finite,
        finite_difference_gradient,
        imitation_equivalence_check,
        mc_gradient,
        random_bandit,
    )
    from fractions import Fraction

    checks = args.check.split(",") if args.check != "all" else [
        "identities", "bias-bound", "scaling"
    ]
    if "identities" in checks:
        worst_il, worst_base, worst_fd = 0.0, 0.0, 0.0
        for seed in range(args.instances):
            fb = random_bandit(5, 4, seed=seed)
            worst_il = max(worst_il, imitation_equivalence_check(fb))
            baseline = np.random.default_rng(seed).normal(size=(fb.n_states, 1))
            diff = exact_gradient_finite(fb) - exact_gradient_finite(
                fb, table=fb.verifier - baseline
            )
            worst_base = max(worst_base, float(np.abs(diff).max()))
            fd = finite_difference_gradient(fb)
            grad = exact_gradient_finite(fb)
            worst_fd = max(
                worst_fd, float(np.abs(grad - fd).max() / max(np.abs(grad).max(), 1e-12))
            )
        print(f"imitation-equivalence max gap: {worst_il:.2e} (tolerance 1e-12)")
        print(f"baseline-invariance max gap:   {worst_base:.2e} (tolerance 1e-12)")
        print(f"finite-difference max rel err: {worst_fd:.2e} (tolerance 1e-6)")
    if "bias-bound" in checks:
        violations, worst_ratio = 0, 0.0
        for seed in range(args.instances):
            fb = random_bandit(5, 4, seed=seed)
            for rate in (0.05, 0.1, 0.2):
                bias, bound = bias_bound_check(fb, flip_rate=rate, seed=seed)
                if bound > 0:
                    worst_ratio = max(worst_ratio, bias / bound)
                if bias > bound * (1 + 1e-9):
                    violations += 1
        print(f"bias <= G*eps_bar violations: {violations} "
              f"(max bias/bound = {worst_ratio:.4f})")
    if "scaling" in checks:
        print(f"{'p':>5} {'T':>3} {'dense(exact)':>13} {'dense(mc)':>11} "
              f"{'sparse(exact)':>14} {'sparse(mc)':>12} {'ratio-ok':>8}")
        for p in (0.3, 0.5, 0.7):
            for T in (1, 5, 10, 20):
                reg = BernoulliRegime(p, T)
                dense, sparse = bernoulli_closed_forms(reg)
                rd = mc_gradient(reg, VPR_ESTIMATOR, args.samples, seed=args.seed)
                rs = mc_gradient(reg, OR_ESTIMATOR, args.samples, seed=args.seed)
                de, se = bernoulli_closed_forms_exact(reg)
                ratio_ok = se * Fraction(p) ** (-(T - 1)) == de
                print(f"{p:>5} {T:>3} {dense:>13.6g} {rd.mean:>11.6g} "
                      f"{sparse:>14.6g} {rs.mean:>12.6g} {str(ratio_ok):>8}")
    return 0


def cmd_gen_sudoku(args) -> int:
    from . import sudoku

    lines = []
    for i in range(args.count):
        ep = sudoku.generate(derive_seed(args.seed, i), blanks=args.blanks)
        lines.append(f"{ep.puzzle.to_line()},{ep.solution.to_line()}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.count} puzzles to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_serve(args) -> int:
    from .server import EpisodeServer, serve_http, serve_stdio

    engine = EpisodeServer(session_timeout=args.timeout)
    if args.transport == "stdio":
        serve_stdio(engine)
        return 0
    httpd = serve_http(args.host, args.port, server=engine)
    print(f"serving on http://{args.host}:{httpd.server_address[1]}", flush=True)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="vprlab", description=__doc__)
    parser.add_argument("--config", help="key = value defaults file")
    sub = parser.add_subparsers(dest="command", required=True)
    registry = {}

    p = sub.add_parser("play", help="run scripted episodes")
    p.add_argument("--env", required=True, choices=[e.value for e in EnvKind])
    p.add_argument("--policy", default="oracle_following")
    p.add_argument("--games", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seat", default="first", choices=["first", "second"])
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--opponent", default="mixed",
                   choices=["mcts_player", "uniform_random", "mixed"],
                   help="tic-tac-toe opponent population for data generation")
    p.add_argument("--opponent-sims", type=int, default=10000)
    p.add_argument("--out", help="write trajectories as JSON lines")
    p.set_defaults(func=cmd_play)
    registry["play"] = p

    p = sub.add_parser("eval", help="fixed evaluation protocol")
    p.add_argument("--env", required=True, choices=[e.value for e in EnvKind])
    p.add_argument("--policy", default="oracle_following")
    p.add_argument("--games", type=int, default=1024)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--seat", default="both", choices=["first", "second", "both"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--opponent-sims", type=int, default=10000)
    p.add_argument("--opponent-seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)
    registry["eval"] = p

    p = sub.add_parser("ablate-oracle", help="verifier quality vs search budget")
    p.add_argument("--sims", default="100,1000,10000")
    p.add_argument("--positions", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eval-games", type=int, default=0,
                   help="also evaluate the search player at each budget")
    p.set_defaults(func=cmd_ablate_oracle)
    registry["ablate_oracle"] = p

    p = sub.add_parser("theory", help="gradient identity reports")
    p.add_argument("--check", default="all",
                   help="identities, bias-bound, scaling, or all")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_theory)
    registry["theory"] = p

    p = sub.add_parser("gen-sudoku", help="generate puzzle/solution fixtures")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--blanks", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_sudoku)
    registry["gen_sudoku"] = p

    p = sub.add_parser("serve", help="episode wire protocol server")
    p.add_argument("--transport", default="stdio", choices=["stdio", "http"])
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8750)
    p.add_argument("--timeout", type=float, default=600.0)
    p.set_defaults(func=cmd_serve)
    registry["serve"] = p
    return parser, registry


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    level = os.environ.get("VPRLAB_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser, registry = build_parser()
    _apply_config(registry, argv)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
