"""Acceptance suite: every release criterion at its pinned tolerance.

One test per criterion; each prints a PASS line with the measured values
(run with ``pytest tests/test_acceptance.py -v -s`` to see them live).
"""

import math
import random
import time
from fractions import Fraction

import pytest

from vprlab import minesweeper, sudoku, tictactoe
from vprlab.adapters import MinesweeperAdapter, SudokuAdapter, TictactoeAdapter
from vprlab.core import EnvKind, Fill, Flag, Place, Reveal, parse_action, wrap_action
from vprlab.harness import EvalConfig, evaluate, run_episode
from vprlab.policies import (
    MctsPlayerPolicy,
    OracleFollowingPolicy,
    UniformRandomPolicy,
)
from vprlab.posterior_oracle import posterior_from_observation
from vprlab.rewards import (
    MIN_ACTIVE,
    SurrogateInputs,
    clipped_surrogate,
    mcpr_rewards,
    normalize_advantages,
)
from vprlab.search_oracle import (
    SearchVerdictConfig,
    disagreement_rate,
    minimax,
    reachable_states,
    sample_positions,
)
from vprlab.seeding import derive_seed
from vprlab.theory import (
    OR_ESTIMATOR,
    VPR_ESTIMATOR,
    BernoulliRegime,
    bernoulli_closed_forms_exact,
    bias_bound_check,
    exact_gradient_finite,
    finite_difference_gradient,
    imitation_equivalence_check,
    mc_gradient,
    random_bandit,
)

from tests.test_posterior_oracle import naive_posterior, random_fixture
from tests.test_render import EMPTY_TTT_BLOCK, FRESH_MINE_BLOCK, SUDOKU_BLOCK, SUDOKU_PUZZLE_LINE


def report(criterion: str, detail: str) -> None:
    print(f"PASS  {criterion}: {detail}")


class TestGradientScaling:
    def test_bernoulli_scaling(self):
        started = time.monotonic()
        worst = 0.0
        for p in (0.3, 0.5, 0.7):
            for T in (1, 5, 10, 20):
                reg = BernoulliRegime(p, T)
                dense_exact, sparse_exact = bernoulli_closed_forms_exact(reg)
                for estimator, closed in (
                    (VPR_ESTIMATOR, dense_exact),
                    (OR_ESTIMATOR, sparse_exact),
                ):
                    rep = mc_gradient(reg, estimator, 100_000, seed=2024)
                    assert rep.within(3.0), (p, T, estimator, rep)
                    if rep.exact_std_error > 0:
                        worst = max(
                            worst,
                            abs(rep.mean - rep.closed_form) / rep.exact_std_error,
                        )
                # exact-ratio identity, in exact rational arithmetic
                assert sparse_exact * Fraction(p) ** (-(T - 1)) == dense_exact
        elapsed = time.monotonic() - started
        assert elapsed < 60.0, f"took {elapsed:.1f}s"
        report(
            "gradient-scaling",
            f"12 grid cells x 2 estimators within 3 exact SEs "
            f"(worst {worst:.2f}), ratio identity exact, {elapsed:.1f}s < 60s",
        )


class TestGradientIdentities:
    def test_imitation_and_baseline_invariance(self):
        import numpy as np

        worst_il = worst_base = worst_fd = 0.0
        for seed in range(20):
            fb = random_bandit(5, 4, seed=seed)
            worst_il = max(worst_il, imitation_equivalence_check(fb))
            baseline = np.random.default_rng(seed).normal(size=(fb.n_states, 1))
            gap = exact_gradient_finite(fb) - exact_gradient_finite(
                fb, table=fb.verifier - baseline
            )
            worst_base = max(worst_base, float(np.abs(gap).max()))
            grad = exact_gradient_finite(fb)
            fd = finite_difference_gradient(fb)
            worst_fd = max(
                worst_fd,
                float(np.abs(grad - fd).max() / max(np.abs(grad).max(), 1e-300)),
            )
        assert worst_il <= 1e-12
        assert worst_base <= 1e-12
        assert worst_fd <= 1e-6
        report(
            "gradient-identities",
            f"20 instances: imitation gap {worst_il:.1e} <= 1e-12, baseline gap "
            f"{worst_base:.1e} <= 1e-12, finite-diff rel err {worst_fd:.1e} <= 1e-6",
        )


class TestBiasBound:
    def test_bias_bound_zero_violations(self):
        violations = 0
        worst_ratio = 0.0
        for seed in range(100):
            fb = random_bandit(5, 4, seed=seed)
            for rate in (0.05, 0.1, 0.2):
                bias, bound = bias_bound_check(fb, flip_rate=rate, seed=seed)
                if bound > 0:
                    worst_ratio = max(worst_ratio, bias / bound)
                # equality is attained when a lone flip hits the entry whose
                # score norm defines G; tolerate last-ulp rounding there only
                if bias > bound and not math.isclose(bias, bound, rel_tol=1e-9):
                    violations += 1
        assert violations == 0
        report(
            "verifier-bias-bound",
            f"300 corrupted-verifier checks, 0 violations "
            f"(max bias/bound {worst_ratio:.4f})",
        )


class TestPosteriorEquivalence:
    def test_against_naive_oracle_500_fixtures(self):
        rng = random.Random(20240811)
        checked = 0
        for _ in range(500):
            rows, cols, n_mines, digits = random_fixture(rng, max_dim=4, max_mines=3)
            pm = posterior_from_observation(rows, cols, n_mines, digits)
            count, member = naive_posterior(rows, cols, n_mines, digits)
            assert pm.config_count == count
            assert pm.membership == member
            for cell in pm.membership:
                assert pm.probability(cell) == Fraction(member[cell], count)
            # mass conservation as an exact integer identity
            assert sum(pm.membership.values()) == n_mines * pm.config_count
            checked += 1
        assert checked == 500
        report(
            "posterior-oracle-equivalence",
            "500 fixtures <=4x4/<=3 mines: exact rational match + mass conservation",
        )


class TestSudokuSoundness:
    def test_generation_oracle_and_trap(self):
        adapter = SudokuAdapter()
        solved = 0
        for seed in range(100):
            ep = sudoku.generate(seed)
            assert ep.puzzle.n_empty == 40
            assert sudoku.count_solutions(ep.puzzle) == 1
            traj = run_episode(adapter, OracleFollowingPolicy(), seed)
            assert traj.outcome.success and traj.outcome.completion_rate == 1.0
            solved += 1
        assert solved == 100

        rng = random.Random(7)
        traps = 0
        while traps < 50:
            ep = sudoku.generate(rng.randrange(10_000))
            wrong = [
                a
                for a in sorted(sudoku.legal(ep), key=lambda a: (a.row, a.col, a.digit))
                if ep.solution.cells[(a.row - 1) * 9 + (a.col - 1)] != a.digit
            ]
            if not wrong:
                continue
            action = wrong[rng.randrange(len(wrong))]
            after = sudoku.apply(ep, action)
            assert sudoku.count_solutions(after.current) == 0
            traps += 1
        report(
            "sudoku-soundness",
            "100 seeds: 40 blanks + unique solution + oracle SR/CR 100.00; "
            "50 wrong fills all kill solvability",
        )


class TestTictactoeOracles:
    def test_minimax_exactness(self):
        value, optimal = minimax(tictactoe.initial())
        assert value == 0
        states = reachable_states()
        for state in states:
            val, opt = minimax(state)
            child = {
                a: -minimax(tictactoe.apply(state, a))[0] for a in tictactoe.legal(state)
            }
            assert val == max(child.values())
            assert opt == frozenset(a for a, v in child.items() if v == val)
        report(
            "tictactoe-minimax",
            f"empty-board value 0; negamax identity on all {len(states)} "
            "reachable ongoing states",
        )

    def test_optimal_vs_strong_search_draws_exactly(self):
        returns = {}
        for seat in ("first", "second"):
            cfg = EvalConfig(
                env=EnvKind.TICTACTOE,
                n_games=1024,
                n_runs=1,
                seat=seat,
                base_seed=0,
                opponent=MctsPlayerPolicy(),
            )
            summary = evaluate(cfg, OracleFollowingPolicy())
            returns[seat] = summary.metrics["return"]
            assert summary.metrics["return"] == (0.0, 0.0)
        report(
            "tictactoe-optimal-eval",
            f"1024 games per seat vs search(10000): returns "
            f"{returns['first'][0]:.2f} / {returns['second'][0]:.2f} (exact draws)",
        )

    def test_disagreement_small_and_monotone(self):
        positions = sample_positions(200, seed=42)
        rates = {}
        for n_sims in (100, 1000, 10_000):
            cfg = SearchVerdictConfig(n_simulations=n_sims, seed=42)
            rates[n_sims] = disagreement_rate(cfg, positions)
        assert rates[10_000] <= 0.05
        assert rates[100] >= rates[1000] >= rates[10_000]
        report(
            "tictactoe-verifier-quality",
            f"eps_bar = {rates[100]:.4f} / {rates[1000]:.4f} / {rates[10_000]:.4f} "
            "at N = 100 / 1000 / 10000 (<= 0.05 at the default budget, non-increasing)",
        )


class TestAdvantagePipeline:
    def test_zero_mean_and_fallback(self):
        rng = random.Random(99)
        delta = 1e-6
        for _ in range(1000):
            k = rng.randint(1, 12)
            groups = [
                [float(rng.randint(0, 1)) for _ in range(rng.randint(1, 8))]
                for _ in range(k)
            ]
            batch = normalize_advantages(groups, delta)
            for t in range(len(batch.mu)):
                assert batch.fallback[t] == (batch.active_count[t] < MIN_ACTIVE)
                if batch.fallback[t] or batch.sigma[t] == 0:
                    continue
                total = sum(rs[t] for rs in batch.advantages if len(rs) > t)
                assert abs(total) <= k * delta / batch.sigma[t] + 1e-9
        report(
            "advantage-normalization",
            "1000 random batches: per-turn zero mean within the delta bound; "
            "fallback exactly when fewer than 4 trajectories remain",
        )

    def test_mcpr_telescoping_exact(self):
        # dyadic rollout counts make every value arithmetic float-exact,
        # so the telescoping identity is checked with equality, not tolerance
        adapters = {
            "tictactoe": TictactoeAdapter(
                opponent=UniformRandomPolicy(),
                verifier_cfg=SearchVerdictConfig(n_simulations=200),
            ),
            "minesweeper": MinesweeperAdapter(),
            "sudoku": SudokuAdapter(blanks=8),
        }
        policy = UniformRandomPolicy()
        checked = 0
        seed = 0
        while checked < 100:
            seed += 1
            name = ("tictactoe", "minesweeper", "sudoku")[seed % 3]
            adapter = adapters[name]
            traj = run_episode(adapter, policy, seed=derive_seed(1234, seed))
            if not traj.turns:
                continue
            m = 8
            rewards = mcpr_rewards(traj, adapter, policy, m_rollouts=m, seed=seed)
            states = adapter.replay_states(traj)
            v_first = (
                sum(
                    adapter.rollout_return(states[0], policy, derive_seed(seed, 0, k))
                    for k in range(m)
                )
                / m
            )
            realized = adapter.realized_return(traj)
            assert math.fsum(rewards) == realized - v_first
            checked += 1
        report(
            "mcpr-telescoping",
            "100 random trajectories: sum of value differences equals "
            "terminal return minus first-state value, exactly",
        )

    def test_surrogate_spot_values(self):
        inp = SurrogateInputs(ratios=((1.5,),), advantages=((1.0,),), epsilon=0.2)
        assert clipped_surrogate(inp) == pytest.approx(1.2, abs=1e-12)
        inp = SurrogateInputs(ratios=((0.5,),), advantages=((-1.0,),), epsilon=0.2)
        assert clipped_surrogate(inp) == pytest.approx(-0.8, abs=1e-12)
        report("clipped-surrogate", "spot values 1.2 and -0.8 match hand computation")


class TestRenderingAndGrammar:
    def test_byte_identical_blocks(self):
        assert tictactoe.render(tictactoe.initial()) == EMPTY_TTT_BLOCK
        assert sudoku.render(sudoku.SudokuGrid.from_line(SUDOKU_PUZZLE_LINE)) == SUDOKU_BLOCK
        assert minesweeper.render(minesweeper.initial(seed=3)) == FRESH_MINE_BLOCK
        report(
            "rendering-fidelity",
            "all three canonical GAME STATE blocks byte-identical",
        )

    def test_grammar_roundtrips_every_legal_action(self):
        count = 0
        for mark in "XO":
            for r in range(3):
                for c in range(3):
                    a = Place(mark, r, c)
                    assert parse_action(wrap_action(a), EnvKind.TICTACTOE) == a
                    count += 1
        for r in range(1, 10):
            for c in range(1, 10):
                for d in range(1, 10):
                    a = Fill(r, c, d)
                    assert parse_action(wrap_action(a), EnvKind.SUDOKU) == a
                    count += 1
        for r in range(5):
            for c in range(5):
                for a in (Reveal(r, c), Flag(r, c)):
                    assert parse_action(wrap_action(a), EnvKind.MINESWEEPER) == a
                    count += 1
        report("action-grammar", f"{count} legal actions round-trip exactly")


class TestPairedPolicyDominance:
    @pytest.mark.parametrize("env_name", ["sudoku", "minesweeper"])
    def test_oracle_beats_random_on_paired_seeds(self, env_name):
        adapter = SudokuAdapter() if env_name == "sudoku" else MinesweeperAdapter()
        oracle, rand = OracleFollowingPolicy(), UniformRandomPolicy()
        stats = {"oracle": [0.0, 0.0], "random": [0.0, 0.0]}
        n = 1024
        for game in range(n):
            seed = derive_seed(777, game)
            for name, policy in (("oracle", oracle), ("random", rand)):
                out = run_episode(adapter, policy, seed).outcome
                stats[name][0] += out.success
                stats[name][1] += out.completion_rate
        sr_o, cr_o = (v / n * 100 for v in stats["oracle"])
        sr_r, cr_r = (v / n * 100 for v in stats["random"])
        assert sr_o > sr_r
        assert cr_o > cr_r
        report(
            f"paired-dominance-{env_name}",
            f"oracle SR {sr_o:.2f} > random SR {sr_r:.2f}; "
            f"oracle CR {cr_o:.2f} > random CR {cr_r:.2f} over {n} paired seeds",
        )
