#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: dp_policy
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 3/14/2023

Posted-price policies for one item and n sequential buyers. The first buyer i with
V_i >= price_i takes the item; welfare counts that buyer's value, revenue counts the price.

Backward induction gives the optimal policy for a known product distribution (welfare_dp,
revenue_dp). Any policy can be scored exactly (eval_exact), by Monte Carlo
(eval_monte_carlo) or on a fixed SampleSet (eval_on_samples).
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from pricelearning.core.distributions import as_source, sample_trajectories
from pricelearning.enums import REJECT, Objective, is_reject
from pricelearning.exceptions import LengthMismatchError, OutOfRangeError

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12


@dataclass(frozen=True)
class PricePolicy:
    prices: Tuple[Union[float, object], ...]

    def __post_init__(self):
        prices = tuple(REJECT if is_reject(p) else float(p) for p in self.prices)
        if len(prices) < 1:
            raise LengthMismatchError("a policy needs at least one price")
        for p in prices:
            if not is_reject(p) and not 0.0 <= p <= 1.0:
                raise OutOfRangeError(f"price {p!r} outside [0, 1]")
        object.__setattr__(self, "prices", prices)

    @property
    def n(self):
        return len(self.prices)

    def __len__(self):
        return len(self.prices)

    def __getitem__(self, i):
        return self.prices[i]

    def as_array(self):
        """Prices as floats with REJECT encoded as +inf."""
        return np.array([math.inf if is_reject(p) else p for p in self.prices], dtype=np.float64)


def reject_all(n):
    return PricePolicy((REJECT,) * n)


@dataclass(frozen=True, eq=False)
class DPResult:
    value_to_go: np.ndarray
    policy: PricePolicy
    objective: Objective

    @property
    def optimum(self):
        return float(self.value_to_go[0])


def _check_width(n_src, policy):
    if policy.n != n_src:
        raise LengthMismatchError(f"policy has {policy.n} prices, instance has {n_src} buyers")


def welfare_dp(pd):
    """r_n = 0, r_i = r_{i+1} + E[(V_i - r_{i+1})^+]; the policy posts pi_i = r_{i+1}."""
    n = pd.n
    r = np.zeros(n + 1)
    for i in range(n - 1, -1, -1):
        r[i] = r[i + 1] + pd[i].expected_excess(r[i + 1])
    r.setflags(write=False)
    policy = PricePolicy(tuple(float(x) for x in r[1:]))
    logger.debug("welfare_dp: n=%d optimum=%r", n, r[0])
    return DPResult(r, policy, Objective.WELFARE)


def revenue_dp(pd):
    """Backward induction over candidate prices support(D_i) and REJECT.

    Posting p earns r_{i+1} + (p - r_{i+1}) * P[V_i >= p]; REJECT earns r_{i+1}. Gains within
    TIE_TOL of the best are ties; ties go to the lowest support price, then REJECT.
    """
    n = pd.n
    r = np.zeros(n + 1)
    prices = [REJECT] * n
    for i in range(n - 1, -1, -1):
        dist = pd[i]
        tail = np.cumsum(dist.probs[::-1])[::-1]
        gains = (dist.support - r[i + 1]) * tail
        top = gains.max()
        if top >= -TIE_TOL:
            best = int(np.flatnonzero(gains >= top - TIE_TOL)[0])
            prices[i] = float(dist.support[best])
            r[i] = r[i + 1] + max(gains[best], 0.0)
        else:
            r[i] = r[i + 1]
    r.setflags(write=False)
    logger.debug("revenue_dp: n=%d optimum=%r", n, r[0])
    return DPResult(r, PricePolicy(tuple(prices)), Objective.REVENUE)


def solve_dp(pd, objective):
    return welfare_dp(pd) if Objective(objective) is Objective.WELFARE else revenue_dp(pd)


def _product_value(pd, price_array, objective):
    w = 0.0
    for i in range(pd.n - 1, -1, -1):
        p = price_array[i]
        if math.isinf(p):
            continue
        dist = pd[i]
        sold = dist.prob_at_least(p)
        if objective is Objective.WELFARE:
            gain = dist.partial_expectation(p)
        else:
            gain = p * sold
        w = gain + (1.0 - sold) * w
    return w


def eval_exact(src, policy, objective):
    """Exact expected objective of ``policy`` on a product or finite-mixture source."""
    src = as_source(src)
    objective = Objective(objective)
    _check_width(src.n, policy)
    prices = policy.as_array()
    return math.fsum(w * _product_value(pd, prices, objective) for w, pd in src.components)


def realized_objective(values, policy, objective):
    """Per-row objective of ``policy`` on a T-by-n value matrix (first acceptance, V >= price)."""
    values = np.asarray(values, dtype=np.float64)
    objective = Objective(objective)
    _check_width(values.shape[1], policy)
    prices = policy.as_array()
    accept = values >= prices[None, :]
    sold = accept.any(axis=1)
    first = np.argmax(accept, axis=1)
    if objective is Objective.WELFARE:
        won = values[np.arange(values.shape[0]), first]
    else:
        won = prices[first]
    return np.where(sold, won, 0.0)


def eval_on_samples(s, policy, objective):
    """Average realized objective over the rows of a SampleSet."""
    return math.fsum(realized_objective(s.values, policy, objective)) / s.T


def eval_monte_carlo(src, policy, objective, T, seed, threads=1):
    """(mean, standard error) of the realized objective over T sampled trajectories."""
    if T < 2:
        raise ValueError(f"Monte Carlo evaluation needs T >= 2, got {T}")
    src = as_source(src)
    _check_width(src.n, policy)
    s = sample_trajectories(src, T, seed, threads=threads)
    outcomes = realized_objective(s.values, policy, objective)
    mean = math.fsum(outcomes) / T
    var = math.fsum((outcomes - mean) ** 2) / (T - 1)
    return mean, math.sqrt(var / T)
