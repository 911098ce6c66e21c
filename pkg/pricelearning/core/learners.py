#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: learners
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 3/20/2023

Learning price policies from sampled trajectories.

- learn_product_welfare: empirical backward induction, pi_i = r_hat_{i+1}.
- learn_product_revenue: revenue_dp on the product of empirical marginals.
- learn_saa: exhaustive sample average approximation over the change-point class Pi_S, scored on
  the realized-value grid of each segment.
- saa_oracle: the same search over a uniform price grid, used to validate learn_saa.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from pricelearning.core.distributions import empirical_product
from pricelearning.core.dp_policy import DPResult, PricePolicy, eval_on_samples, revenue_dp
from pricelearning.enums import REJECT, Objective, is_reject, price_sort_key
from pricelearning.exceptions import (
    EmptySampleSetError,
    GridOverflowError,
    LengthMismatchError,
    OutOfRangeError,
)

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**8
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ChangePointSet:
    """Segments of {0, ..., n-1} split at ``points``; each point starts a new segment."""

    n: int
    points: Tuple[int, ...] = ()

    def __post_init__(self):
        points = tuple(int(p) for p in self.points)
        if self.n < 1:
            raise LengthMismatchError(f"n must be at least 1, got {self.n}")
        if any(b <= a for a, b in zip(points, points[1:])):
            raise OutOfRangeError(f"change points must be strictly increasing, got {points}")
        if points and (points[0] < 1 or points[-1] > self.n - 1):
            raise OutOfRangeError(f"change points must lie in [1, {self.n - 1}], got {points}")
        object.__setattr__(self, "points", points)

    @property
    def k(self):
        return len(self.points) + 1

    @property
    def starts(self):
        return (0,) + self.points

    @property
    def segments(self):
        """List of (start, stop) half-open index ranges."""
        bounds = self.starts + (self.n,)
        return [(bounds[j], bounds[j + 1]) for j in range(self.k)]

    def segment_of(self, i):
        return int(np.searchsorted(np.array(self.points), i, side="right"))


def static_class(n):
    return ChangePointSet(n, ())


def full_class(n):
    return ChangePointSet(n, tuple(range(1, n)))


@dataclass(frozen=True)
class SegmentPrices:
    rho: tuple

    def __post_init__(self):
        rho = tuple(REJECT if is_reject(p) else float(p) for p in self.rho)
        for p in rho:
            if not is_reject(p) and not 0.0 <= p <= 1.0:
                raise OutOfRangeError(f"segment price {p!r} outside [0, 1]")
        object.__setattr__(self, "rho", rho)

    def __len__(self):
        return len(self.rho)

    def __getitem__(self, j):
        return self.rho[j]

    def as_array(self):
        return np.array([math.inf if is_reject(p) else p for p in self.rho], dtype=np.float64)


def expand(cps, rho):
    """pi_i = rho_j for every buyer i in segment I_j."""
    if not isinstance(rho, SegmentPrices):
        rho = SegmentPrices(tuple(rho))
    if len(rho) != cps.k:
        raise LengthMismatchError(f"{len(rho)} segment prices for {cps.k} segments")
    prices = []
    for (start, stop), p in zip(cps.segments, rho.rho):
        prices.extend([p] * (stop - start))
    return PricePolicy(tuple(prices))


def _require_rows(s):
    if s is None or s.T < 1:
        raise EmptySampleSetError("learning needs at least one sample row")


def empirical_recursion(s):
    """r_hat_n = 0, r_hat_i = mean_t (V_i^(t) - r_hat_{i+1})^+ + r_hat_{i+1}."""
    _require_rows(s)
    r = np.zeros(s.n + 1)
    for i in range(s.n - 1, -1, -1):
        excess = np.maximum(s.values[:, i] - r[i + 1], 0.0)
        r[i] = math.fsum(excess) / s.T + r[i + 1]
    r.setflags(write=False)
    return r


def learn_product_welfare(s):
    r_hat = empirical_recursion(s)
    policy = PricePolicy(tuple(float(x) for x in r_hat[1:]))
    return policy, DPResult(r_hat, policy, Objective.WELFARE)


def learn_product_revenue(s):
    _require_rows(s)
    result = revenue_dp(empirical_product(s))
    return result.policy, result


def learn_product(s, objective):
    if Objective(objective) is Objective.WELFARE:
        return learn_product_welfare(s)
    return learn_product_revenue(s)


def realized_grids(s, cps):
    """G_j = {0} U {realized values in the columns of I_j} U {REJECT}, ascending, REJECT last."""
    grids = []
    for start, stop in cps.segments:
        values = np.unique(np.concatenate(([0.0], s.values[:, start:stop].reshape(-1))))
        grids.append([float(v) for v in values] + [REJECT])
    return grids


def uniform_grids(cps, grid_resolution):
    points = [j / grid_resolution for j in range(grid_resolution + 1)]
    return [list(points) + [REJECT] for _ in range(cps.k)]


def _segment_tables(block, grid, objective):
    """accept[u, c] and gain[u, c] for one segment over the unique rows."""
    m = block.shape[0]
    accept = np.zeros((m, len(grid)), dtype=bool)
    gain = np.zeros((m, len(grid)))
    rows = np.arange(m)
    for c, price in enumerate(grid):
        if is_reject(price):
            continue
        hit = block >= price
        accept[:, c] = hit.any(axis=1)
        if objective is Objective.WELFARE:
            gain[:, c] = np.where(accept[:, c], block[rows, np.argmax(hit, axis=1)], 0.0)
        else:
            gain[:, c] = np.where(accept[:, c], price, 0.0)
    return accept, gain


class _SegmentSearch:
    """Depth-first lexicographic enumeration of G_1 x ... x G_k.

    Identical trajectories are merged with multiplicities. A branch stops early once every row
    is sold, completing the vector with the smallest candidate of each later grid; a candidate
    whose effect on the unsold rows repeats an earlier candidate's at the same node is skipped,
    since its subtree scores identically and the earlier one wins ties.
    """

    def __init__(self, s, cps, objective, grids):
        self.objective = Objective(objective)
        self.grids = grids
        unique, counts = np.unique(s.values, axis=0, return_counts=True)
        self.counts = counts.astype(np.float64)
        self.T = float(s.T)
        self.tables = [
            _segment_tables(unique[:, start:stop], grid, self.objective)
            for (start, stop), grid in zip(cps.segments, grids)
        ]
        self.best_score = -math.inf
        self.best = None
        self.visited = 0

    def _offer(self, score, choice):
        if score > self.best_score + TIE_TOL:
            self.best_score = score
            self.best = tuple(choice)

    def _descend(self, level, unsold, outcome, choice):
        self.visited += 1
        if not unsold.any():
            tail = [grid[0] for grid in self.grids[level:]]
            self._offer(float(self.counts @ outcome) / self.T, choice + tail)
            return
        accept, gain = self.tables[level]
        last = level == len(self.grids) - 1
        seen = set()
        for c, price in enumerate(self.grids[level]):
            sold_here = unsold & accept[:, c]
            key = (sold_here.tobytes(), gain[sold_here, c].tobytes())
            if key in seen:
                continue
            seen.add(key)
            nxt = np.where(sold_here, gain[:, c], outcome)
            if last:
                self._offer(float(self.counts @ nxt) / self.T, choice + [price])
            else:
                self._descend(level + 1, unsold & ~sold_here, nxt, choice + [price])

    def run(self):
        m = self.counts.size
        self._descend(0, np.ones(m, dtype=bool), np.zeros(m), [])
        logger.debug("SAA search visited %d nodes, best score %r", self.visited, self.best_score)
        return SegmentPrices(self.best), self.best_score


def grid_size(grids):
    return math.prod(len(g) for g in grids)


def exhaustive_search(s, cps, objective, grids, budget=DEFAULT_BUDGET):
    """Best (rho, sample score) over the product of per-segment candidate grids."""
    _require_rows(s)
    if cps.n != s.n:
        raise LengthMismatchError(f"change-point set covers {cps.n} buyers, samples have {s.n}")
    if len(grids) != cps.k:
        raise LengthMismatchError(f"{len(grids)} grids for {cps.k} segments")
    grids = [sorted(g, key=price_sort_key) for g in grids]
    evaluations = grid_size(grids)
    if evaluations > budget:
        raise GridOverflowError(
            f"search over {evaluations} price vectors exceeds the budget of {budget}"
        )
    logger.debug("exhaustive search: k=%d candidates=%d T=%d", cps.k, evaluations, s.T)
    return _SegmentSearch(s, cps, objective, grids).run()


def learn_saa(s, cps, objective, budget=DEFAULT_BUDGET):
    """Sample average approximation over Pi_S on the realized-value grid."""
    _require_rows(s)
    rho, _ = exhaustive_search(s, cps, objective, realized_grids(s, cps), budget)
    return rho


def learn_saa_scored(s, cps, objective, budget=DEFAULT_BUDGET):
    _require_rows(s)
    return exhaustive_search(s, cps, objective, realized_grids(s, cps), budget)


def saa_oracle(s, cps, objective, grid_resolution, budget=DEFAULT_BUDGET):
    """Brute force over {0, 1/m, ..., 1} U {REJECT} per segment."""
    if grid_resolution < 2:
        raise ValueError(f"grid_resolution must be at least 2, got {grid_resolution}")
    rho, _ = exhaustive_search(s, cps, objective, uniform_grids(cps, grid_resolution), budget)
    return rho


def enumerate_scores(s, cps, objective, grids):
    """Plain itertools enumeration of every candidate vector; for cross-checking small cases."""
    for combo in itertools.product(*grids):
        yield combo, eval_on_samples(s, expand(cps, combo), objective)
