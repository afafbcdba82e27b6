"""Numerical validation lab for the policy-gradient claims behind dense
verifier rewards.

Two settings: a one-parameter Bernoulli regime with a shared logit, where
the dense and sparse gradient magnitudes have closed forms, and a finite
softmax bandit over explicit state weights, where every expectation is
enumerable exactly. Monte Carlo estimates, finite differences, and exact
rational identities cross-check each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np

from .seeding import derive_seed

VPR_ESTIMATOR = "vpr"
OR_ESTIMATOR = "or"


@dataclass(frozen=True)
class BernoulliRegime:
    """T independent Bernoulli(p) steps from one shared logit; success is the
    conjunction of all steps."""

    p: float
    horizon: int

    def __post_init__(self) -> None:
        if not 0 < self.p < 1:
            raise ValueError("p must lie strictly inside (0,1)")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


def bernoulli_closed_forms(reg: BernoulliRegime) -> Tuple[float, float]:
    """(dense_norm, sparse_norm) = (T*p*(1-p), T*p^T*(1-p))."""
    dense, sparse = bernoulli_closed_forms_exact(reg)
    return float(dense), float(sparse)


def bernoulli_closed_forms_exact(reg: BernoulliRegime) -> Tuple[Fraction, Fraction]:
    """Closed forms as exact rationals (p taken at its binary value)."""
    p = Fraction(reg.p)
    T = reg.horizon
    dense = T * p * (1 - p)
    sparse = T * p**T * (1 - p)
    return dense, sparse


def bernoulli_estimator_variance(reg: BernoulliRegime, estimator: str) -> Fraction:
    """Exact per-draw variance of either estimator.

    The sparse estimator's variance is dominated by the success spike, which
    a finite sample rarely contains at long horizons; tests against the
    closed-form mean must therefore use this exact value, not the sample
    estimate.
    """
    p = Fraction(reg.p)
    T = reg.horizon
    if estimator == VPR_ESTIMATOR:
        # sum of T iid (a-p)^2 terms
        second = p * (1 - p) ** 4 + (1 - p) * p**4
        return T * (second - (p * (1 - p)) ** 2)
    if estimator == OR_ESTIMATOR:
        # draw = (S - q) * W with S = prod(a), q = p^T, W = sum(a - p)
        q = p**T
        e_w2 = T * p * (1 - p)
        e_sw2 = q * (T * (1 - p)) ** 2  # W is deterministic given S = 1
        mean = T * q * (1 - p)
        return (1 - 2 * q) * e_sw2 + q**2 * e_w2 - mean**2
    raise ValueError(f"unknown estimator {estimator!r}")


@dataclass(frozen=True)
class GradientReport:
    """Monte Carlo summary of one scalar gradient estimator."""

    estimator: str
    mean: float
    std_error: Optional[float]
    exact_std_error: float
    n_samples: int
    closed_form: Optional[float]

    @property
    def norm(self) -> float:
        return abs(self.mean)

    def within(self, k_std_errors: float, exact: bool = True) -> bool:
        """Whether the mean lies within k standard errors of the closed form.

        ``exact`` uses the analytically known standard error; the sample
        estimate misses the sparse estimator's success spike entirely at
        long horizons.
        """
        se = self.exact_std_error if exact else self.std_error
        if se is None or self.closed_form is None:
            return False
        return abs(self.mean - self.closed_form) <= k_std_errors * se

    def to_record(self) -> Dict:
        return {
            "estimator": self.estimator,
            "mean": self.mean,
            "std_error": self.std_error,
            "exact_std_error": self.exact_std_error,
            "n_samples": self.n_samples,
            "closed_form": self.closed_form,
        }


def mc_gradient(
    reg: BernoulliRegime, estimator: str, n_samples: int, seed: int = 0
) -> GradientReport:
    """Sample the shared-logit gradient estimator.

    Per trajectory of T Bernoulli(p) actions with score ``a_t - p``: the dense
    estimator sums per-step (verifier - p) * score terms; the sparse one
    multiplies the centered success indicator by the summed score.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(derive_seed(seed, reg.horizon))
    p, T = reg.p, reg.horizon
    actions = (rng.random((n_samples, T)) < p).astype(np.float64)
    score = actions - p
    if estimator == VPR_ESTIMATOR:
        draws = (score**2).sum(axis=1)
        closed = float(Fraction(p) * (1 - Fraction(p)) * T)
    elif estimator == OR_ESTIMATOR:
        success = actions.prod(axis=1)
        baseline = float(Fraction(p) ** T)
        draws = (success - baseline) * score.sum(axis=1)
        closed = float(T * Fraction(p) ** T * (1 - Fraction(p)))
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    mean = float(draws.mean())
    se = (
        float(draws.std(ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else None
    )
    exact_var = bernoulli_estimator_variance(reg, estimator)
    exact_se = float(exact_var) ** 0.5 / n_samples**0.5
    return GradientReport(
        estimator=estimator,
        mean=mean,
        std_error=se,
        exact_std_error=exact_se,
        n_samples=n_samples,
        closed_form=closed,
    )


@dataclass(frozen=True)
class FiniteBandit:
    """Finite softmax policy over explicit state weights with a verifier table."""

    d: np.ndarray
    logits: np.ndarray
    verifier: np.ndarray

    def __post_init__(self) -> None:
        if self.logits.shape != self.verifier.shape:
            raise ValueError("logits and verifier shapes differ")
        if self.d.shape != (self.logits.shape[0],):
            raise ValueError("state weights do not match the number of states")
        if not np.isclose(self.d.sum(), 1.0):
            raise ValueError("state weights must sum to 1")

    @property
    def n_states(self) -> int:
        return self.logits.shape[0]

    @property
    def n_actions(self) -> int:
        return self.logits.shape[1]


def random_bandit(
    n_states: int, n_actions: int, seed: int, valid_fraction: float = 0.4
) -> FiniteBandit:
    """Randomized instance: Gaussian logits, random state weights, and a
    Bernoulli verifier table with at least one valid action per state."""
    rng = np.random.default_rng(derive_seed(seed, n_states, n_actions))
    d = rng.random(n_states) + 0.1
    d /= d.sum()
    logits = rng.normal(size=(n_states, n_actions))
    verifier = (rng.random((n_states, n_actions)) < valid_fraction).astype(np.float64)
    for s in range(n_states):
        if verifier[s].sum() == 0:
            verifier[s, rng.integers(n_actions)] = 1.0
    return FiniteBandit(d=d, logits=logits, verifier=verifier)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def objective_value(
    fb: FiniteBandit, table: Optional[np.ndarray] = None, logits: Optional[np.ndarray] = None
) -> float:
    """J(theta) = sum_s d(s) sum_a pi_theta(a|s) V(s,a), by full enumeration."""
    table = fb.verifier if table is None else table
    pi = softmax(fb.logits if logits is None else logits)
    return float((fb.d[:, None] * pi * table).sum())


def exact_gradient_finite(
    fb: FiniteBandit, table: Optional[np.ndarray] = None, logits: Optional[np.ndarray] = None
) -> np.ndarray:
    """Exact policy gradient of the verifier objective w.r.t. every logit.

    d/dtheta[s,b] = d(s) * pi(b|s) * (V(s,b) - E_pi[V|s]).
    """
    table = fb.verifier if table is None else table
    pi = softmax(fb.logits if logits is None else logits)
    expected = (pi * table).sum(axis=1, keepdims=True)
    return fb.d[:, None] * pi * (table - expected)


def finite_difference_gradient(
    fb: FiniteBandit, table: Optional[np.ndarray] = None, step: float = 1e-5
) -> np.ndarray:
    """Central finite differences of the enumerated objective."""
    table = fb.verifier if table is None else table
    grad = np.zeros_like(fb.logits)
    for s in range(fb.n_states):
        for a in range(fb.n_actions):
            bumped = fb.logits.copy()
            bumped[s, a] += step
            hi = objective_value(fb, table, logits=bumped)
            bumped[s, a] -= 2 * step
            lo = objective_value(fb, table, logits=bumped)
            grad[s, a] = (hi - lo) / (2 * step)
    return grad


def imitation_gradient(
    fb: FiniteBandit, logits: Optional[np.ndarray] = None
) -> np.ndarray:
    """Gradient of the verifier-weighted log-likelihood of sampled actions.

    Sampling weights stay at the behavior policy (fb.logits); the log
    probabilities are differentiated at ``logits``:
    d/dtheta[s,b] = d(s) * (pi_old(b|s) V(s,b) - pi_theta(b|s) E_old[V|s]).
    """
    pi_old = softmax(fb.logits)
    pi_theta = softmax(fb.logits if logits is None else logits)
    weighted = pi_old * fb.verifier
    return fb.d[:, None] * (weighted - pi_theta * weighted.sum(axis=1, keepdims=True))


def imitation_equivalence_check(
    fb: FiniteBandit, logits: Optional[np.ndarray] = None
) -> float:
    """Max componentwise gap between the policy gradient and the imitation
    gradient, both at ``logits`` (behavior policy by default).

    Zero at the behavior policy; generally positive elsewhere, which serves
    as the negative control.
    """
    pg = exact_gradient_finite(fb, logits=logits)
    il = imitation_gradient(fb, logits=logits)
    return float(np.abs(pg - il).max())


def score_norm_bound(fb: FiniteBandit) -> float:
    """G = max ||grad log pi(a|s)|| over the (full-support) state-action space."""
    pi = softmax(fb.logits)
    best = 0.0
    for s in range(fb.n_states):
        for a in range(fb.n_actions):
            row = -pi[s].copy()
            row[a] += 1.0
            best = max(best, float(np.linalg.norm(row)))
    return best


def disagreement_mass(
    fb: FiniteBandit, table_a: np.ndarray, table_b: np.ndarray
) -> float:
    """Probability mass where two verifier tables disagree, under d x pi."""
    pi = softmax(fb.logits)
    return float((fb.d[:, None] * pi * (table_a != table_b)).sum())


def corrupt_verifier(
    fb: FiniteBandit, flip_rate: float, seed: int
) -> np.ndarray:
    """Flip each verifier entry independently with the given probability."""
    if not 0 <= flip_rate <= 1:
        raise ValueError("flip_rate must lie in [0,1]")
    rng = np.random.default_rng(derive_seed(seed, fb.n_states, fb.n_actions, 17))
    flips = rng.random(fb.verifier.shape) < flip_rate
    return np.where(flips, 1.0 - fb.verifier, fb.verifier)


def bias_bound_check(
    fb: FiniteBandit, flip_rate: float, seed: int
) -> Tuple[float, float]:
    """(bias_norm, G * eps_bar) for a randomly corrupted verifier.

    Everything is enumerated exactly: the corrupted-vs-oracle disagreement
    mass, the score-norm bound, and both gradients.
    """
    corrupted = corrupt_verifier(fb, flip_rate, seed)
    g_star = exact_gradient_finite(fb, table=fb.verifier)
    g_hat = exact_gradient_finite(fb, table=corrupted)
    bias = float(np.linalg.norm(g_hat - g_star))
    eps_bar = disagreement_mass(fb, corrupted, fb.verifier)
    return bias, score_norm_bound(fb) * eps_bar
