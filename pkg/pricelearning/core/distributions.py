#!/usr/bin/env python
"""Copyright 2023 Ryan Cardenas
Name: distributions
Project: pricelearning
Author: Ryan Cardenas
Creation Date: 3/12/2023

Buyer value distributions and trajectory samples. All values live in [0, 1].

- DiscreteDist: one buyer's marginal, finite support, duplicates merged at construction.
- ProductDist: independent marginals D_1 x ... x D_n.
- CorrelatedSource: a product distribution or a finite mixture of product components.
- SampleSet: T sampled trajectories stored as a read-only T-by-n matrix.

Sampling draws from the counter-based uniform stream in utils, so a (source, T, seed) triple
always produces the same SampleSet regardless of how rows are split across threads.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from pricelearning.enums import SourceKind
from pricelearning.exceptions import (
    EmptySampleSetError,
    IndexOutOfRangeError,
    LengthMismatchError,
    NegativeProbabilityError,
    NonNormalizedError,
    OutOfRangeError,
)
from pricelearning.utils import derive_seed, uniform_block

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-9
ROW_BLOCK = 4096


def _readonly(x, dtype=np.float64):
    x = np.array(x, dtype=dtype)
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class DiscreteDist:
    support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        support = _readonly(self.support)
        probs = _readonly(self.probs)
        if support.ndim != 1 or support.shape != probs.shape or support.size == 0:
            raise LengthMismatchError("support and probs must be nonempty 1-D and equal length")
        if np.any(np.diff(support) <= 0):
            raise OutOfRangeError("support must be strictly increasing")
        if support[0] < 0.0 or support[-1] > 1.0:
            raise OutOfRangeError(f"support values must lie in [0, 1], got {support}")
        if np.any(probs < 0.0):
            raise NegativeProbabilityError(f"negative probability in {probs}")
        if abs(math.fsum(probs) - 1.0) > NORMALIZATION_TOL:
            raise NonNormalizedError(f"probabilities sum to {math.fsum(probs)!r}")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    def __eq__(self, other):
        if not isinstance(other, DiscreteDist):
            return NotImplemented
        return np.array_equal(self.support, other.support) and np.array_equal(
            self.probs, other.probs
        )

    __hash__ = None

    def __len__(self):
        return self.support.size

    def mean(self):
        return math.fsum(self.support * self.probs)

    def prob_at_least(self, p):
        """P[V >= p]."""
        return math.fsum(self.probs[self.support >= p])

    def partial_expectation(self, p):
        """E[V * 1{V >= p}]."""
        mask = self.support >= p
        return math.fsum(self.support[mask] * self.probs[mask])

    def expected_excess(self, r):
        """E[(V - r)^+]."""
        return math.fsum(np.maximum(self.support - r, 0.0) * self.probs)


def make_discrete(support, probs):
    """Validate and canonicalize a discrete distribution.

    Unsorted support is sorted and probabilities at duplicate values are merged.
    """
    support = np.asarray(support, dtype=np.float64).reshape(-1)
    probs = np.asarray(probs, dtype=np.float64).reshape(-1)
    if support.size == 0 or support.size != probs.size:
        raise LengthMismatchError(
            f"support ({support.size}) and probs ({probs.size}) must have the same nonzero length"
        )
    if np.any(~np.isfinite(support)) or np.any((support < 0.0) | (support > 1.0)):
        raise OutOfRangeError(f"support values must lie in [0, 1], got {support}")
    if np.any(probs < 0.0):
        raise NegativeProbabilityError(f"negative probability in {probs}")
    total = math.fsum(probs)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NonNormalizedError(f"probabilities sum to {total!r}, expected 1")

    values, inverse = np.unique(support, return_inverse=True)
    merged = np.bincount(inverse.reshape(-1), weights=probs, minlength=values.size)
    return DiscreteDist(values, merged)


def point_mass(v):
    return make_discrete([v], [1.0])


@dataclass(frozen=True, eq=False)
class ProductDist:
    marginals: Tuple[DiscreteDist, ...]

    def __post_init__(self):
        marginals = tuple(self.marginals)
        if len(marginals) < 1:
            raise LengthMismatchError("a product distribution needs at least one marginal")
        for m in marginals:
            if not isinstance(m, DiscreteDist):
                raise TypeError(f"expected DiscreteDist, got {type(m).__name__}")
        object.__setattr__(self, "marginals", marginals)

    def __eq__(self, other):
        if not isinstance(other, ProductDist):
            return NotImplemented
        return self.marginals == other.marginals

    __hash__ = None

    @property
    def n(self):
        return len(self.marginals)

    def __getitem__(self, i):
        return self.marginals[i]

    def __iter__(self):
        return iter(self.marginals)


@dataclass(frozen=True, eq=False)
class CorrelatedSource:
    kind: SourceKind
    components: Tuple[Tuple[float, ProductDist], ...]

    def __post_init__(self):
        components = tuple((float(w), pd) for w, pd in self.components)
        if not components:
            raise LengthMismatchError("a source needs at least one component")
        weights = np.array([w for w, _ in components])
        if np.any(weights < 0.0):
            raise NegativeProbabilityError(f"negative mixture weight in {weights}")
        if abs(math.fsum(weights) - 1.0) > NORMALIZATION_TOL:
            raise NonNormalizedError(f"mixture weights sum to {math.fsum(weights)!r}")
        widths = {pd.n for _, pd in components}
        if len(widths) != 1:
            raise LengthMismatchError(f"components disagree on n: {sorted(widths)}")
        if self.kind is SourceKind.PRODUCT and len(components) != 1:
            raise ValueError("a product source has exactly one component")
        object.__setattr__(self, "components", components)

    @property
    def n(self):
        return self.components[0][1].n

    @property
    def weights(self):
        return np.array([w for w, _ in self.components])


def product_source(pd):
    return CorrelatedSource(SourceKind.PRODUCT, ((1.0, pd),))


def mixture_source(weighted_components):
    """``weighted_components``: iterable of (weight, ProductDist or list of DiscreteDist)."""
    components = []
    for w, law in weighted_components:
        if not isinstance(law, ProductDist):
            law = ProductDist(tuple(law))
        components.append((w, law))
    return CorrelatedSource(SourceKind.MIXTURE, tuple(components))


def as_source(src):
    if isinstance(src, ProductDist):
        return product_source(src)
    return src


@dataclass(frozen=True, eq=False)
class SampleSet:
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise LengthMismatchError(f"samples must form a T-by-n matrix, got {values.shape}")
        if values.shape[0] < 1:
            raise EmptySampleSetError("a SampleSet needs at least one row")
        if values.shape[1] < 1:
            raise LengthMismatchError("a SampleSet needs at least one column")
        if np.any(~np.isfinite(values)) or np.any((values < 0.0) | (values > 1.0)):
            raise OutOfRangeError("sample values must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None

    @property
    def T(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[1]

    def column(self, i):
        if not 0 <= i < self.n:
            raise IndexOutOfRangeError(f"buyer index {i} outside [0, {self.n})")
        return self.values[:, i]


def _inverse_cdf(dist, u):
    cdf = np.cumsum(dist.probs)
    idx = np.searchsorted(cdf, u, side="right")
    return dist.support[np.minimum(idx, dist.support.size - 1)]


def sample_rows(src, seed, start, stop):
    """Rows ``start:stop`` of the trajectory matrix defined by (src, seed).

    Row t uses n + 1 uniforms: the first picks the mixture component, the rest feed the
    inverse CDF of each coordinate's marginal.
    """
    src = as_source(src)
    n = src.n
    u = uniform_block(seed, np.arange(start, stop), n + 1)
    out = np.empty((stop - start, n), dtype=np.float64)

    if len(src.components) == 1:
        which = np.zeros(stop - start, dtype=np.int64)
    else:
        edges = np.cumsum(src.weights)
        which = np.minimum(np.searchsorted(edges, u[:, 0], side="right"), edges.size - 1)

    for c, (_, pd) in enumerate(src.components):
        rows = np.flatnonzero(which == c)
        if rows.size == 0:
            continue
        for i, dist in enumerate(pd.marginals):
            out[rows, i] = _inverse_cdf(dist, u[rows, i + 1])
    return out


def sample_trajectories(src, T, seed, threads=1):
    """Draw T IID trajectories; a pure function of (src, T, seed)."""
    if T < 1:
        raise EmptySampleSetError(f"T must be at least 1, got {T}")
    bounds = [(a, min(a + ROW_BLOCK, T)) for a in range(0, T, ROW_BLOCK)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(lambda b: sample_rows(src, seed, *b), bounds))
    else:
        blocks = [sample_rows(src, seed, a, b) for a, b in bounds]
    return SampleSet(np.vstack(blocks))


def empirical_marginal(s, i):
    """Uniform distribution over the T observed values of buyer ``i`` (0-based)."""
    col = s.column(i)
    values, counts = np.unique(col, return_counts=True)
    return DiscreteDist(values, counts / s.T)


def empirical_product(s):
    return ProductDist(tuple(empirical_marginal(s, i) for i in range(s.n)))


def _aligned(a, b):
    grid = np.union1d(a.support, b.support)
    pa = np.zeros(grid.size)
    pb = np.zeros(grid.size)
    pa[np.searchsorted(grid, a.support)] = a.probs
    pb[np.searchsorted(grid, b.support)] = b.probs
    return pa, pb


def hellinger_sq(a, b):
    """H^2 = 1 - sum_x sqrt(a(x) b(x)) over the union of supports, clamped to [0, 1]."""
    pa, pb = _aligned(a, b)
    return min(1.0, max(0.0, 1.0 - math.fsum(np.sqrt(pa * pb))))


def tv_distance(a, b):
    pa, pb = _aligned(a, b)
    return 0.5 * math.fsum(np.abs(pa - pb))


def random_discrete(seed, max_support, granularity=1e-3):
    """Random marginal with 1..max_support atoms on the ``granularity`` grid of [0, 1]."""
    u = uniform_block(seed, [0], 2 * max_support + 1)[0]
    size = 1 + int(u[0] * max_support)
    ticks = int(round(1.0 / granularity))
    support = np.round(np.floor(u[1 : 1 + size] * (ticks + 1)) * granularity, 12)
    weights = u[1 + max_support : 1 + max_support + size] + 1e-3
    support = np.minimum(support, 1.0)
    return make_discrete(support, weights / weights.sum())


def random_product_dist(n, max_support, seed, granularity=1e-3):
    """Random ProductDist; marginal i is seeded by ``derive_seed(seed, i)``."""
    return ProductDist(
        tuple(
            random_discrete(derive_seed(seed, i), max_support, granularity) for i in range(n)
        )
    )
