#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: hard_instances
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 3/27/2023

Lower-bound instances with closed-form optima.

Product instance (revenue): buyer i (0-based) draws from High or Low, both supported on
{0, 1/4 + s_i, 1/2 + s_i} with s_i = (n - 1 - i) / (4n). Whatever the configuration the optimal
value-to-go is r_i = (n - i) / (4n), and every "mistake" (posting the other distribution's
optimal price) costs revenue.

Correlated instance: a decision point is drawn uniformly from S'; only that point's prices
matter on the trajectory and every other buyer's value is 0.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from pricelearning.core.distributions import (
    ProductDist,
    hellinger_sq,
    make_discrete,
    mixture_source,
    point_mass,
)
from pricelearning.core.dp_policy import PricePolicy
from pricelearning.core.learners import ChangePointSet, SegmentPrices
from pricelearning.enums import Bit, Objective, is_reject
from pricelearning.exceptions import (
    DomainError,
    InvalidConfigError,
    LengthMismatchError,
    NonCanonicalPriceError,
)
from pricelearning.utils import uniform_block

logger = logging.getLogger(__name__)

CANONICAL_TOL = 1e-9
ROW_SUM_TOL = 1e-15
MAX_PRODUCT_EPS = 1.0 / 32.0


def random_bits(count, seed):
    """``count`` independent fair High/Low choices."""
    u = uniform_block(seed, [0], max(count, 1))[0][:count]
    return tuple(Bit.HIGH if x < 0.5 else Bit.LOW for x in u)


def parse_bits(given, count):
    """Bits from a list of "High"/"Low" strings or the string "random:<seed>"."""
    if isinstance(given, str):
        if not given.startswith("random:"):
            raise InvalidConfigError(f"bits must be a list or 'random:<seed>', got {given!r}")
        return random_bits(count, int(given.split(":", 1)[1]))
    try:
        bits = tuple(b if isinstance(b, Bit) else Bit(str(b).capitalize()) for b in given)
    except ValueError:
        raise InvalidConfigError(f"bits must be 'High' or 'Low', got {given!r}") from None
    if len(bits) != count:
        raise InvalidConfigError(f"expected {count} bits, got {len(bits)}")
    return bits


@dataclass(frozen=True)
class ProductHardConfig:
    n: int
    eps: float
    bits: Tuple[Bit, ...]

    def __post_init__(self):
        if self.n < 2:
            raise InvalidConfigError(f"n must be at least 2, got {self.n}")
        if not 0.0 < self.eps <= MAX_PRODUCT_EPS:
            raise InvalidConfigError(f"eps must lie in (0, 1/32], got {self.eps}")
        bits = tuple(Bit(b) for b in self.bits)
        if len(bits) != self.n:
            raise InvalidConfigError(f"{len(bits)} bits for {self.n} buyers")
        object.__setattr__(self, "bits", bits)


def _shift(n, i):
    return (n - 1 - i) / (4.0 * n)


def canonical_prices(n, i):
    """(Low-optimal, High-optimal) price for buyer i: (1/4 + s_i, 1/2 + s_i)."""
    s = _shift(n, i)
    return 0.25 + s, 0.5 + s


def _table_row(n, eps, bit):
    if bit is Bit.HIGH:
        return (1.0 - 1.0 / n + 16.0 * eps / n, 1.0 / (2 * n) - 16.0 * eps / n, 1.0 / (2 * n))
    return (1.0 - 1.0 / n, 1.0 / (2 * n) + 8.0 * eps / n, 1.0 / (2 * n) - 8.0 * eps / n)


def product_hard_marginal(n, eps, i, bit):
    low, high = canonical_prices(n, i)
    probs = _table_row(n, eps, bit)
    if abs(math.fsum(probs) - 1.0) > ROW_SUM_TOL:
        raise InvalidConfigError(f"table row for buyer {i} sums to {math.fsum(probs)!r}")
    return make_discrete([0.0, low, high], probs)


def gen_product_revenue_hard(cfg):
    return ProductDist(
        tuple(product_hard_marginal(cfg.n, cfg.eps, i, b) for i, b in enumerate(cfg.bits))
    )


def hard_optimal_values(n):
    """r_i = (n - i) / (4n) for i = 0..n."""
    if n < 2:
        raise InvalidConfigError(f"n must be at least 2, got {n}")
    return np.array([(n - i) / (4.0 * n) for i in range(n + 1)])


def optimal_hard_policy(cfg):
    prices = []
    for i, bit in enumerate(cfg.bits):
        low, high = canonical_prices(cfg.n, i)
        prices.append(high if bit is Bit.HIGH else low)
    return PricePolicy(tuple(prices))


def planted_policy(cfg, mistakes):
    """Canonical-price policy that errs exactly at the buyers in ``mistakes``."""
    mistakes = set(mistakes)
    prices = []
    for i, bit in enumerate(cfg.bits):
        low, high = canonical_prices(cfg.n, i)
        correct_high = bit is Bit.HIGH
        if i in mistakes:
            correct_high = not correct_high
        prices.append(high if correct_high else low)
    return PricePolicy(tuple(prices))


def count_mistakes(policy, cfg, strict=True):
    """Buyers priced at the other distribution's optimal canonical price.

    With ``strict=False`` a non-canonical price (including REJECT) also counts as a mistake
    instead of raising.
    """
    if policy.n != cfg.n:
        raise LengthMismatchError(f"policy has {policy.n} prices, instance has {cfg.n} buyers")
    mistakes = 0
    for i, (price, bit) in enumerate(zip(policy.prices, cfg.bits)):
        low, high = canonical_prices(cfg.n, i)
        if not is_reject(price) and abs(price - low) <= CANONICAL_TOL:
            posted_high = False
        elif not is_reject(price) and abs(price - high) <= CANONICAL_TOL:
            posted_high = True
        elif strict:
            raise NonCanonicalPriceError(
                f"price {price!r} for buyer {i} matches neither {low!r} nor {high!r}"
            )
        else:
            mistakes += 1
            continue
        if posted_high != (bit is Bit.HIGH):
            mistakes += 1
    return mistakes


def mistake_loss_bound(n, eps, M):
    """Upper bound 1/4 - 2 eps (M/n)((M+1)/n) on the revenue of any M-mistake policy."""
    if not 0 <= M <= n:
        raise ValueError(f"M must lie in [0, {n}], got {M}")
    return 0.25 - 2.0 * eps * (M / n) * ((M + 1) / n)


def hellinger_scaling(n, eps, i=0):
    """n * H^2(High_i, Low_i) / eps^2. The Hellinger distance does not depend on i."""
    high = product_hard_marginal(n, eps, i, Bit.HIGH)
    low = product_hard_marginal(n, eps, i, Bit.LOW)
    return n * hellinger_sq(high, low) / eps**2


def tv_product_bound(n, eps, T):
    """Upper bound on TV between T-sample laws of two configurations differing at one buyer.

    Squared Hellinger distance is additive across independent samples (1 - H^2 multiplies), so
    TV <= sqrt(2) * sqrt(1 - (1 - H^2)^T).
    """
    if T < 1:
        raise ValueError(f"T must be at least 1, got {T}")
    h2 = hellinger_scaling(n, eps) * eps**2 / n
    return min(1.0, math.sqrt(2.0) * math.sqrt(1.0 - (1.0 - h2) ** T))


def taylor_lower_bound(C, x):
    """(sqrt(C (C + x)), C + x/2 - x^2/(2C)); the first is never below the second.

    Accepts scalars or numpy arrays.
    """
    C_arr = np.asarray(C, dtype=np.float64)
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any(C_arr <= 0.0):
        raise DomainError("C must be positive")
    if np.any(x_arr < -C_arr):
        raise DomainError("x must be at least -C")
    lhs = np.sqrt(C_arr * np.maximum(C_arr + x_arr, 0.0))
    rhs = C_arr + x_arr / 2.0 - x_arr**2 / (2.0 * C_arr)
    if lhs.ndim == 0:
        return float(lhs), float(rhs)
    return lhs, rhs


def decision_points(cps, objective):
    """Greedy S' over segment starts {0} U S.

    Revenue keeps every start. Welfare adds a start c when c + 1 < n and c - 1 was not added,
    so that i in S' implies i + 1 is a valid buyer outside S'.
    """
    objective = Objective(objective)
    if objective is Objective.REVENUE:
        return cps.starts
    chosen = []
    for c in cps.starts:
        if c + 1 >= cps.n:
            continue
        if chosen and chosen[-1] == c - 1:
            continue
        chosen.append(c)
    return tuple(chosen)


@dataclass(frozen=True)
class CorrelatedHardConfig:
    cps: ChangePointSet
    eps: float
    objective: Objective
    bits: Dict[int, Bit] = field(hash=False)
    sprime: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        objective = Objective(self.objective)
        object.__setattr__(self, "objective", objective)
        if not 0.0 < self.eps < 0.5:
            raise InvalidConfigError(f"eps must lie in (0, 1/2), got {self.eps}")
        sprime = decision_points(self.cps, objective)
        if not sprime:
            raise InvalidConfigError("the instance has no decision points")
        if len(sprime) < (1 + len(self.cps.points)) // 2:
            raise InvalidConfigError(
                f"only {len(sprime)} decision points for |S|={len(self.cps.points)}"
            )
        if objective is Objective.WELFARE:
            for i in sprime:
                if i + 1 >= self.cps.n or i + 1 in sprime:
                    raise InvalidConfigError(
                        f"decision point {i} violates the welfare adjacency rule"
                    )
        bits = dict(self.bits)
        if set(bits) != set(sprime):
            raise InvalidConfigError(
                f"bits given for {sorted(bits)}, decision points are {list(sprime)}"
            )
        object.__setattr__(self, "bits", {i: Bit(bits[i]) for i in sprime})
        object.__setattr__(self, "sprime", sprime)

    @property
    def n(self):
        return self.cps.n


def make_correlated_config(n, points, eps, objective, bits):
    """Build a config; ``bits`` is a dict, a sequence aligned with S', or "random:<seed>"."""
    cps = ChangePointSet(n, tuple(points))
    sprime = decision_points(cps, objective)
    if isinstance(bits, dict):
        mapping = bits
    else:
        mapping = dict(zip(sprime, parse_bits(bits, len(sprime))))
    return CorrelatedHardConfig(cps, eps, Objective(objective), mapping)


def _two_point(low_value, high_value, p_high):
    return make_discrete([low_value, high_value], [1.0 - p_high, p_high])


def gen_correlated_hard(cfg):
    """Equal-weight mixture with one component per decision point."""
    n, eps = cfg.n, cfg.eps
    weight = 1.0 / len(cfg.sprime)
    zero = point_mass(0.0)
    components = []
    for i in cfg.sprime:
        p_high = 0.5 + eps if cfg.bits[i] is Bit.HIGH else 0.5 - eps
        marginals = [zero] * n
        if cfg.objective is Objective.WELFARE:
            marginals[i] = point_mass(0.5)
            marginals[i + 1] = _two_point(0.0, 1.0, p_high)
        else:
            marginals[i] = _two_point(0.5, 1.0, p_high)
        components.append((weight, marginals))
    return mixture_source(components)


def correlated_hard_optimum(cfg):
    """(optimal value, optimal segment prices): 1 on High decision segments, 1/2 on Low ones,
    and 1 on segments that hold no decision point."""
    rho = []
    for start in cfg.cps.starts:
        bit = cfg.bits.get(start)
        rho.append(0.5 if bit is Bit.LOW else 1.0)
    value = math.fsum(
        0.5 + cfg.eps if cfg.bits[i] is Bit.HIGH else 0.5 for i in cfg.sprime
    ) / len(cfg.sprime)
    return value, SegmentPrices(tuple(rho))
