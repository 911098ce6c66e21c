#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: diagnostics
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 4/3/2023

Checks behind the learning guarantees.

- The error process eta_i = mean_t (V_i^(t) - r_hat_{i+1})^+ - E[(V_i - r_hat_{i+1})^+] and the
  pointwise bounds it gives on the regret of the empirical-DP welfare policy.
- Simulation of sums of conditional means for sequences with sum(Y) <= 1.
- Good sets {rho : pi_rho(v) >= z} of the change-point class as unions of prefix-interval boxes.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from pricelearning.core.dp_policy import eval_exact, realized_objective, welfare_dp
from pricelearning.core.learners import (
    SegmentPrices,
    empirical_recursion,
    expand,
    learn_product_welfare,
)
from pricelearning.enums import Objective, SequenceLaw, is_reject
from pricelearning.exceptions import LengthMismatchError, UnsupportedGeneratorError
from pricelearning.utils import uniform_block

logger = logging.getLogger(__name__)

NEG_INF = -math.inf
POS_INF = math.inf
TRIAL_BLOCK = 2048


@dataclass(frozen=True, eq=False)
class ErrorProcess:
    eta: np.ndarray

    def __post_init__(self):
        eta = np.array(self.eta, dtype=np.float64).reshape(-1)
        eta.setflags(write=False)
        object.__setattr__(self, "eta", eta)

    @property
    def prefix_sums(self):
        return np.cumsum(self.eta)


def error_process(s, pd_true):
    if s.n != pd_true.n:
        raise LengthMismatchError(f"samples have {s.n} columns, distribution has {pd_true.n}")
    r_hat = empirical_recursion(s)
    eta = np.empty(s.n)
    for i in range(s.n):
        empirical = math.fsum(np.maximum(s.values[:, i] - r_hat[i + 1], 0.0)) / s.T
        eta[i] = empirical - pd_true[i].expected_excess(r_hat[i + 1])
    return ErrorProcess(eta)


def max_partial_sum(e):
    """max_j |sum_{i<=j} eta_i| over j = 1..n (0 for an empty process)."""
    if e.eta.size == 0:
        return 0.0
    return float(np.max(np.abs(e.prefix_sums)))


def prefix_extrema(e):
    """(max_j sum_{i<=j} eta_i, max_j -sum_{i<=j} eta_i) with j ranging over 0..n."""
    sums = np.concatenate(([0.0], e.prefix_sums))
    return float(np.max(sums)), float(np.max(-sums))


@dataclass(frozen=True)
class RegretCertificate:
    learned_value: float
    empirical_value: float
    optimal_value: float
    upper_excursion: float
    lower_excursion: float
    max_partial_sum: float

    @property
    def regret(self):
        return self.optimal_value - self.learned_value

    @property
    def learned_slack(self):
        """r_1 - (r_hat_1 - max_j sum eta); nonnegative up to rounding."""
        return self.learned_value - (self.empirical_value - self.upper_excursion)

    @property
    def empirical_slack(self):
        """r_hat_1 - (r*_1 - max_j (-sum eta)); nonnegative up to rounding."""
        return self.empirical_value - (self.optimal_value - self.lower_excursion)

    @property
    def regret_slack(self):
        """r_1 - (r*_1 - 2 max_j |sum eta|); nonnegative up to rounding."""
        return self.learned_value - (self.optimal_value - 2.0 * self.max_partial_sum)


def regret_certificate(s, pd_true, optimal_value=None):
    """Score the empirical-DP welfare policy learned from ``s`` against the known truth."""
    policy, result = learn_product_welfare(s)
    if optimal_value is None:
        optimal_value = welfare_dp(pd_true).optimum
    e = error_process(s, pd_true)
    upper, lower = prefix_extrema(e)
    return RegretCertificate(
        learned_value=eval_exact(pd_true, policy, Objective.WELFARE),
        empirical_value=result.optimum,
        optimal_value=float(optimal_value),
        upper_excursion=upper,
        lower_excursion=lower,
        max_partial_sum=max_partial_sum(e),
    )


def theorem1_sample_size(eps, delta):
    """Smallest T with T >= (5 ln(2e/delta) / eps)^2."""
    if not 0.0 < eps < 1.0 or not 0.0 < delta < 1.0:
        raise ValueError(f"eps and delta must lie in (0, 1), got {eps}, {delta}")
    return int(math.ceil((5.0 * math.log(2.0 * math.e / delta) / eps) ** 2))


def conditional_sum_threshold(delta):
    return math.e / (math.e - 1.0) * math.log(math.e / delta)


def conditional_mean_sums(law, trials, n, seed, q=0.01):
    """sum_i E[Y_i | Y_1..Y_{i-1}] for trials ``trials`` (an index array) of the given law."""
    law = SequenceLaw(law)
    trials = np.asarray(trials)
    if law is SequenceLaw.DETERMINISTIC_SPLIT:
        return np.full(trials.size, math.fsum([1.0 / n] * n))

    u = uniform_block(seed, trials, n)
    if law is SequenceLaw.BERNOULLI_CASCADE:
        # Conditional mean q while the budget is intact, 0 after the first success.
        hit = u < q
        steps = np.where(hit.any(axis=1), np.argmax(hit, axis=1) + 1, n)
        return q * steps
    if law is SequenceLaw.UNIFORM_FRACTION:
        # Budget b_i before step i; Y_i = b_i U_i, so E[Y_i | past] = b_i / 2.
        budgets = np.cumprod(np.hstack([np.ones((trials.size, 1)), 1.0 - u[:, :-1]]), axis=1)
        return budgets.sum(axis=1) / 2.0
    raise UnsupportedGeneratorError(f"no generator for {law!r}")


def conditional_sum_check(num_trials, n, gen, delta, seed, q=0.01, threads=1):
    """Fraction of trials whose conditional-mean sum reaches (e/(e-1)) ln(e/delta)."""
    try:
        law = SequenceLaw(gen)
    except ValueError:
        raise UnsupportedGeneratorError(f"unknown sequence law {gen!r}") from None
    if num_trials < 1 or n < 1:
        raise ValueError("num_trials and n must be positive")
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    threshold = conditional_sum_threshold(delta)
    blocks = [
        np.arange(a, min(a + TRIAL_BLOCK, num_trials)) for a in range(0, num_trials, TRIAL_BLOCK)
    ]

    def _count(block):
        return int(np.count_nonzero(conditional_mean_sums(law, block, n, seed, q) >= threshold))

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hits = sum(pool.map(_count, blocks))
    else:
        hits = sum(_count(b) for b in blocks)
    logger.debug(
        "conditional_sum_check %s: %d/%d exceed %r", law.value, hits, num_trials, threshold
    )
    return hits / num_trials


@dataclass(frozen=True)
class GoodSetDecomposition:
    """Union over j of (u_1, inf) x ... x (u_{j-1}, inf) x (l_j, u_j] x R^{k-j}.

    ``lower_closed[j]`` turns (l_j, u_j] into [l_j, u_j]; only revenue sets use it.
    """

    bounds: Tuple[Tuple[float, float], ...]
    lower_closed: Tuple[bool, ...]
    z: float
    objective: Objective

    @property
    def k(self):
        return len(self.bounds)


def good_set(v, z, cps, objective):
    """Exact decomposition of {rho : pi_rho(v) >= z}."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    objective = Objective(objective)
    if v.size != cps.n:
        raise LengthMismatchError(f"trajectory has {v.size} values, class covers {cps.n}")
    if z <= 0.0:
        full = ((NEG_INF, POS_INF),) * cps.k
        return GoodSetDecomposition(full, (False,) * cps.k, float(z), objective)

    bounds = []
    closed = []
    for start, stop in cps.segments:
        w = v[start:stop]
        u = float(w.max())
        if objective is Objective.WELFARE:
            reach = np.flatnonzero(w >= z)
            if reach.size == 0:
                lower = u
            elif reach[0] == 0:
                lower = NEG_INF
            else:
                lower = float(w[: reach[0]].max())
            closed.append(False)
        else:
            lower = min(float(z), u)
            closed.append(z <= u)
        bounds.append((lower, u))
    return GoodSetDecomposition(tuple(bounds), tuple(closed), float(z), objective)


def _as_price(p):
    return POS_INF if is_reject(p) else float(p)


def member(g, rho):
    """rho lies in the decomposition: strict lower bound (unless closed), closed upper bound."""
    if not isinstance(rho, SegmentPrices):
        rho = SegmentPrices(tuple(rho))
    if len(rho) != g.k:
        raise LengthMismatchError(f"{len(rho)} segment prices for {g.k} segments")
    for (lower, upper), closed, p in zip(g.bounds, g.lower_closed, rho.rho):
        p = _as_price(p)
        above = p >= lower if closed else p > lower
        if above and p <= upper:
            return True
        if not p > upper:
            return False
    return False


def simulate_objective(v, cps, rho, objective):
    """pi_rho(v) on a single trajectory."""
    v = np.asarray(v, dtype=np.float64).reshape(1, -1)
    return float(realized_objective(v, expand(cps, rho), objective)[0])
